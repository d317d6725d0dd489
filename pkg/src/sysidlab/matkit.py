"""Dense-matrix primitives with fixed sign conventions.

Thin, deterministic wrappers around LAPACK (via numpy/scipy) that pin down
the factor non-uniqueness of SVD and LQ decompositions so that repeated runs
and golden tests are byte-stable:

* SVD: in every left singular vector, the entry of largest absolute value is
  made non-negative (first such entry on ties).
* LQ: the diagonal of ``L`` is made non-negative.

Spectral norms are always computed as the largest singular value; no power
iteration is used anywhere.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, RankError, ShapeError


class SvdResult(NamedTuple):
    left_vectors: np.ndarray      # orthonormal columns, rows x rows
    singular_values: np.ndarray   # non-increasing, length min(rows, cols)
    right_vectors: np.ndarray     # orthonormal columns, cols x cols


def _as_matrix(M, name: str = "matrix") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return M


def default_rank_tol(M: np.ndarray) -> float:
    """Relative rank cutoff: max(rows, cols) * machine epsilon."""
    return max(M.shape) * np.finfo(float).eps


def svd(M) -> SvdResult:
    """Full SVD with a deterministic sign convention.

    Returns singular values sorted descending and full (square) singular
    vector matrices. In each left vector the entry of largest magnitude is
    non-negative; paired right vectors are flipped along with their partner,
    unpaired ones get the same convention applied directly.
    """
    M = _as_matrix(M)
    U, s, Vt = np.linalg.svd(M, full_matrices=True)
    V = Vt.T
    k = s.size
    for i in range(U.shape[1]):
        j = int(np.argmax(np.abs(U[:, i])))
        if U[j, i] < 0:
            U[:, i] = -U[:, i]
            if i < k and i < V.shape[1]:
                V[:, i] = -V[:, i]
    for i in range(k, V.shape[1]):
        j = int(np.argmax(np.abs(V[:, i])))
        if V[j, i] < 0:
            V[:, i] = -V[:, i]
    return SvdResult(U, s, V)


def truncated_svd(M, r: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Top-``r`` SVD factors ``(U_r, s_r, V_r)``.

    The spectral distance from ``M`` to the implied rank-``r`` matrix equals
    the (r+1)-th singular value of ``M`` (zero when ``r`` is the full rank
    dimension).
    """
    M = _as_matrix(M)
    kmax = min(M.shape)
    if not 1 <= r <= kmax:
        raise RankError(f"rank r={r} out of range [1, {kmax}] for shape {M.shape}")
    U, s, V = svd(M)
    return U[:, :r], s[:r], V[:, :r]


def lq(M) -> tuple[np.ndarray, np.ndarray]:
    """LQ decomposition ``M = L @ Qt`` with non-negative diagonal of ``L``.

    ``L`` is lower-trapezoidal of shape (rows, k) and ``Qt`` has orthonormal
    rows of shape (k, cols), with k = min(rows, cols).
    """
    M = _as_matrix(M)
    Q, R = scipy.linalg.qr(M.T, mode="economic")
    L = R.T.copy()
    Qt = Q.T.copy()
    k = min(M.shape)
    for i in range(k):
        if L[i, i] < 0:
            L[:, i] = -L[:, i]
            Qt[i, :] = -Qt[i, :]
    return L, Qt


def pinv(M, rank_tol: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse with an explicit relative rank cutoff.

    Singular values below ``rank_tol * sigma_max`` are treated as zero. The
    default cutoff is ``max(rows, cols) * eps``. A zero matrix maps to the
    zero pseudoinverse.
    """
    M = _as_matrix(M)
    if rank_tol is None:
        rank_tol = default_rank_tol(M)
    elif rank_tol < 0:
        raise InvalidInputError("rank_tol must be non-negative")
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((M.shape[1], M.shape[0]))
    keep = s >= rank_tol * s[0]
    s_inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    return (Vt.T * s_inv) @ U.T


def spectrum(M) -> np.ndarray:
    """All eigenvalues with multiplicity, sorted by (real part, imag part)."""
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ShapeError(f"spectrum requires a square matrix, got {M.shape}")
    ev = np.linalg.eigvals(M)
    order = np.lexsort((ev.imag, ev.real))
    return ev[order]


def singular_values(M) -> np.ndarray:
    """Singular values of ``M``, descending."""
    return np.linalg.svd(_as_matrix(M), compute_uv=False)


def spectral_norm(M) -> float:
    """Largest singular value (deterministic, SVD based)."""
    s = singular_values(M)
    return float(s[0]) if s.size else 0.0


def cond(M, rank_tol: float | None = None) -> float:
    """Condition number ``||M|| * ||pinv(M)||``.

    The pseudoinverse norm is the reciprocal of the smallest singular value
    above the rank cutoff, so rank-deficient matrices get the condition
    number of their retained subspace. A zero matrix has condition number 0.
    """
    M = _as_matrix(M)
    if rank_tol is None:
        rank_tol = default_rank_tol(M)
    s = singular_values(M)
    if s.size == 0 or s[0] == 0.0:
        return 0.0
    kept = s[s >= rank_tol * s[0]]
    return float(s[0] / kept[-1])
