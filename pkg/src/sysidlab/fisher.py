"""Fisher information of the poles of a diagonal MIMO model.

For a diagonal-A system with known B and C, zero initial state, and
identity measurement noise, the information matrix of the pole vector
factors as I = V^T S^T S V: S maps impulse-response entries to stacked
output means (a block lower-triangular Toeplitz matrix built from the
inputs) and V holds the derivatives of those entries with respect to each
pole. The impulse-response entry order is fixed globally as output-major,
input-minor; only the consistency between S columns and V rows matters.

Also provided: the closed-form ceilings on sigma_min(V) and on the smallest
information eigenvalue, the matching estimation-variance floor, and exact
integer inversions of that floor into sample-complexity counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import rho
from .errors import AssumptionError, CapExceededError, InvalidInputError, WindowError
from .lti import StateSpaceModel, markov_sequence


@dataclass
class FisherReport:
    """Information matrix of the poles plus its closed-form ceilings.

    Bound fields are NaN when the trajectory is too short for the window
    precondition K >= ceil(n/(pm)) + 1.
    """

    S_list: list[np.ndarray]
    V: np.ndarray
    I: np.ndarray
    lambda_min: float
    lambda_min_bound: float
    sigma_min_V: float
    sigma_min_V_bound: float


def build_S(inputs: np.ndarray, m: int) -> np.ndarray:
    """Sensitivity of the stacked output mean to the impulse-response entries.

    Block (r, t), r >= t, equals I_m kron u_{r-t}^T; the result is
    (m*K) x (p*m*K) with columns ordered to match :func:`build_V` rows.
    """
    U = np.asarray(inputs, dtype=float)
    if U.ndim != 2:
        raise InvalidInputError("inputs must be a (K, p) array")
    K, p = U.shape
    Im = np.eye(m)
    S = np.zeros((m * K, p * m * K))
    for r in range(K):
        for t in range(r + 1):
            S[r * m : (r + 1) * m, t * p * m : (t + 1) * p * m] = np.kron(Im, U[r - t])
    return S


def build_V(lam: np.ndarray, B: np.ndarray, C: np.ndarray, K: int) -> np.ndarray:
    """Derivatives of all impulse-response entries with respect to each pole.

    Row block k holds d[H_k]_{ij} / d lambda_q = k c_{iq} b_{qj} lambda_q^{k-1}
    for k = 0..K-1 (the k = 0 block is identically zero), rows ordered
    output-major within each block.
    """
    lam = np.asarray(lam, dtype=float).reshape(-1)
    B = np.asarray(B, dtype=float)
    C = np.asarray(C, dtype=float)
    if K < 1:
        raise WindowError("K must be >= 1")
    n = lam.size
    m, p = C.shape[0], B.shape[1]
    CB = np.einsum("iq,qj->ijq", C, B)  # (m, p, n)
    V = np.zeros((p * m * K, n))
    for k in range(1, K):
        V[k * p * m : (k + 1) * p * m, :] = (k * CB * lam ** (k - 1)).reshape(m * p, n)
    return V


def fim(model: StateSpaceModel, input_sets: list[np.ndarray]) -> FisherReport:
    """Information matrix of the poles from N input sequences.

    Requires a diagonal model with identity measurement covariance (reject
    rather than silently whiten, so the entry-scale bookkeeping stays
    honest) and equal-length inputs.
    """
    if not model.diagonal_flag:
        raise AssumptionError("fim requires a model with diagonal_flag set")
    if not np.allclose(model.meas_cov, np.eye(model.m), atol=1e-12, rtol=0.0):
        raise AssumptionError("fim requires identity measurement covariance; pre-whiten first")
    if len(input_sets) < 1:
        raise InvalidInputError("need at least one input sequence")
    sets = [np.asarray(u, dtype=float) for u in input_sets]
    K = sets[0].shape[0]
    if any(u.shape != (K, model.p) for u in sets):
        raise InvalidInputError(f"all input sequences must have shape (K, {model.p})")

    lam = np.diag(model.A)
    V = build_V(lam, model.B, model.C, K)
    S_list = [build_S(u, model.m) for u in sets]
    info = np.zeros((model.n, model.n))
    for S in S_list:
        G = S @ V
        info += G.T @ G
    info = (info + info.T) / 2.0

    lam_min = float(np.linalg.eigvalsh(info)[0])
    sig_min_V = float(np.linalg.svd(V, compute_uv=False)[-1]) if V.size else 0.0
    try:
        sv_bound = sigma_min_V_bound(model.n, model.p, model.m, K, model.delta_bar)
        ev_bound = fim_min_eig_bound(model.n, model.p, model.m, len(sets), K, model.delta_bar)
    except WindowError:
        sv_bound = float("nan")
        ev_bound = float("nan")
    return FisherReport(
        S_list=S_list, V=V, I=info,
        lambda_min=lam_min, lambda_min_bound=ev_bound,
        sigma_min_V=sig_min_V, sigma_min_V_bound=sv_bound,
    )


def response_mean(lam: np.ndarray, B: np.ndarray, C: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Stacked noise-free outputs y_1..y_K of the diagonal model under U."""
    lam = np.asarray(lam, dtype=float).reshape(-1)
    K = U.shape[0]
    m = C.shape[0]
    mu = np.zeros((K, m))
    x = np.zeros(lam.size)
    for k in range(K):
        x = lam * x + B @ U[k]
        mu[k] = C @ x
    return mu.reshape(-1)


def fim_oracle(model: StateSpaceModel, input_sets: list[np.ndarray],
               step: float = 1e-6) -> np.ndarray:
    """Brute-force information matrix via central differences of the mean.

    Perturbs each pole by +/- step, forms the Jacobian of the stacked output
    mean, and returns the summed J^T J. Test-side oracle only; it shares no
    code path with :func:`fim` beyond the model itself.
    """
    if step <= 0:
        raise InvalidInputError("step must be positive")
    lam = np.diag(model.A)
    n = lam.size
    info = np.zeros((n, n))
    for U in input_sets:
        U = np.asarray(U, dtype=float)
        J = np.empty((U.shape[0] * model.m, n))
        for i in range(n):
            lam_hi = lam.copy()
            lam_lo = lam.copy()
            lam_hi[i] += step
            lam_lo[i] -= step
            J[:, i] = (response_mean(lam_hi, model.B, model.C, U)
                       - response_mean(lam_lo, model.B, model.C, U)) / (2.0 * step)
        info += J.T @ J
    return info


def _kappa_window_check(n: int, p: int, m: int, K: int) -> int:
    kappa = n / (p * m)
    K_min = math.ceil(kappa) + 1
    if K < K_min:
        raise WindowError(f"K={K} too small: the bound needs K >= ceil(n/(pm))+1 = {K_min}")
    return n // (p * m)


def sigma_min_V_bound(n: int, p: int, m: int, K: int, delta_bar: float) -> float:
    """Ceiling on the smallest singular value of V (not its square)."""
    floor_kappa = _kappa_window_check(n, p, m, K)
    sq = 16.0 * n ** 2 * p * m * delta_bar ** 2 * K ** 3 \
        * rho() ** (-(floor_kappa - 3) / math.log(2 * K))
    return math.sqrt(sq)


def fim_min_eig_bound(n: int, p: int, m: int, N: int, K: int, delta_bar: float) -> float:
    """Ceiling on the smallest eigenvalue of the pole information matrix."""
    if N < 1:
        raise InvalidInputError("N must be >= 1")
    floor_kappa = _kappa_window_check(n, p, m, K)
    return 16.0 * N * n ** 2 * (p * m) ** 2 * delta_bar ** 2 * K ** 5 \
        * rho() ** (-(floor_kappa - 3) / math.log(2 * K))


def crb_floor(n: int, p: int, m: int, N: int, K: int, delta_bar: float) -> float:
    """Floor on the largest covariance eigenvalue of any unbiased pole estimator.

    Exactly the reciprocal of :func:`fim_min_eig_bound`.
    """
    return 1.0 / fim_min_eig_bound(n, p, m, N, K, delta_bar)


SAMPLE_COMPLEXITY_REGIMES = ("many-short", "one-long")
DEFAULT_ONE_LONG_CAP = 10 ** 6


def sample_complexity(n: int, p: int, m: int, delta_bar: float, epsilon: float,
                      regime: str, k_cap: int = DEFAULT_ONE_LONG_CAP) -> int:
    """Invert the variance floor into a sample count.

    ``many-short`` fixes the shortest usable trajectory length
    K = ceil(n/m) + 1 and returns the smallest N whose floor drops to
    ``epsilon``; ``one-long`` fixes N = 1 and searches the smallest
    admissible K (up to ``k_cap``). Both agree exactly with a brute-force
    integer scan of :func:`crb_floor`.
    """
    if epsilon <= 0:
        raise InvalidInputError("epsilon must be positive")
    if regime == "many-short":
        K = math.ceil(n / m) + 1
        f1 = crb_floor(n, p, m, 1, K, delta_bar)
        N = max(1, math.ceil(f1 / epsilon))
        # pin down float boundary cases so the closed form matches the scan
        while N > 1 and f1 / (N - 1) <= epsilon:
            N -= 1
        while f1 / N > epsilon:
            N += 1
        return N
    if regime == "one-long":
        K = math.ceil(n / (p * m)) + 1
        while K <= k_cap:
            if crb_floor(n, p, m, 1, K, delta_bar) <= epsilon:
                return K
            K += 1
        raise CapExceededError(
            f"no trajectory length up to the cap {k_cap} reaches epsilon={epsilon}", k_cap
        )
    raise InvalidInputError(
        f"unknown regime {regime!r}; choose from {SAMPLE_COMPLEXITY_REGIMES}"
    )


def sample_complexity_asymptotic(n: int, p: int, m: int, delta_bar: float,
                                 epsilon: float, regime: str) -> float:
    """Informational value of the asymptotic-order expression for the regime.

    These are the simplified growth-rate displays, not the exact inversions;
    the many-short form diverges when n = m (its log(n/m) factor vanishes).
    """
    if epsilon <= 0:
        raise InvalidInputError("epsilon must be positive")
    kappa = n / (p * m)
    if regime == "many-short":
        if n == m:
            return math.inf
        inner = (math.pi ** 2 * kappa / (4.0 * math.log(n / m))
                 - 7.0 * math.log(n) - 2.0 * math.log(p * m) + 5.0 * math.log(m))
        return math.exp(inner) / (epsilon * delta_bar ** 2)
    if regime == "one-long":
        log_term = math.log(16.0 * epsilon * delta_bar ** 2 * n ** 2 * (p * m) ** 2)
        inner = math.sqrt(5.0 * math.pi ** 2 * kappa + log_term ** 2) / 10.0
        return math.exp(inner) / (
            epsilon ** 0.1 * delta_bar ** 0.2 * n ** 0.2 * (p * m) ** 0.2
        )
    raise InvalidInputError(
        f"unknown regime {regime!r}; choose from {SAMPLE_COMPLEXITY_REGIMES}"
    )
