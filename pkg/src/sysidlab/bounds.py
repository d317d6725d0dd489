"""Closed-form ill-conditioning bounds and decay-law oracles.

Every evaluator is a pure transcription of one displayed inequality: the
condition-number floors for extended observability/controllability
matrices, the upper bound on the n-th singular value of the block Hankel
matrix (full and right-trimmed variants), the Krylov-matrix singular-value
bound, and the positive-definite Hankel decay law. Logs in all exponents
are natural: the base constant is rho = exp(pi^2 / 4).

Floor expressions are evaluated in integer arithmetic before any float
enters, so no exponent can be off by one through rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import matkit
from .errors import StructureError, WindowError

#: relative slack used when classifying a measured value against its bound
BOUND_SLACK = 1e-9

#: values below this are flagged as numerically indistinguishable from zero
MACHINE_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class BoundReport:
    """One measured-vs-bound comparison."""

    name: str
    measured: float
    bound: float
    direction: str  # "upper": measured <= bound; "lower": measured >= bound
    satisfied: bool
    parameters: dict = field(default_factory=dict)


def check_bound(name: str, measured: float, bound: float, direction: str,
                parameters: dict | None = None) -> BoundReport:
    if direction == "upper":
        ok = measured <= bound * (1.0 + BOUND_SLACK)
    elif direction == "lower":
        ok = measured >= bound * (1.0 - BOUND_SLACK)
    else:
        raise ValueError(f"direction must be 'upper' or 'lower', got {direction!r}")
    return BoundReport(name, float(measured), float(bound), direction, bool(ok),
                       dict(parameters or {}))


def rho() -> float:
    """The decay base exp(pi^2 / 4), roughly 11.79."""
    return math.exp(math.pi ** 2 / 4.0)


def cond_lower_bounds(n: int, m: int, p: int, K1: int, K2: int) -> tuple[float, float]:
    """Floors on cond(O) and cond(Q) for an n-state system.

    Requires windows large enough for full rank: n <= m*K1 and n <= p*K2.
    """
    if n > m * K1 or n > p * K2:
        raise WindowError(
            f"full-rank windows require n <= m*K1 and n <= p*K2 (n={n}, m*K1={m * K1}, p*K2={p * K2})"
        )
    r = rho()
    lb_O = 0.25 * r ** (((n - 1) // (2 * m)) / math.log(2 * m * K1))
    lb_Q = 0.25 * r ** (((n - 1) // (2 * p)) / math.log(2 * p * K2))
    return lb_O, lb_Q


def hankel_sigma_n_bound(n: int, m: int, p: int, K1: int, K2: int,
                         delta_bar: float, variant: str = "full-H") -> float:
    """Upper bound on the n-th largest singular value of the block Hankel matrix.

    ``variant='full-H'`` bounds sigma_n(H) with K = K1 + K2; ``'H-minus'``
    bounds the right-trimmed matrix, replacing K1 by K1 - 1 inside the first
    log and using K = K1 + K2 - 1. Valid for stable or marginally stable
    poles (all |lambda_i| <= 1).
    """
    if variant == "full-H":
        K = K1 + K2
        first_log_arg = 2 * m * K1
    elif variant == "H-minus":
        if K1 <= 1:
            raise WindowError("H-minus variant needs K1 >= 2 (log(2m(K1-1)) undefined)")
        K = K1 + K2 - 1
        first_log_arg = 2 * m * (K1 - 1)
    else:
        raise ValueError(f"variant must be 'full-H' or 'H-minus', got {variant!r}")
    exponent = max(
        ((n - 1) // (2 * m)) / math.log(first_log_arg),
        ((n - 1) // (2 * p)) / math.log(2 * p * K2),
    )
    return 2.0 * delta_bar * n * K * math.sqrt(p * m) * rho() ** (-exponent)


def krylov_sv_bound(n: int, m_blocks: int, p: int, X_norm: float) -> float:
    """Upper bound on the smallest singular value of [W, DW, ..., D^{m-1}W].

    ``p`` is the column count of W (p <= n); D must be real-diagonalizable
    with real eigenvalues (the caller's responsibility). The parity
    correction removes one column when p is odd and greater than one.
    """
    if p > n:
        raise WindowError(f"requires p <= n, got p={p}, n={n}")
    p_star = 1 if (p % 2 == 1 and p > 1) else 0
    exponent = ((min(n, m_blocks * (p - p_star)) - 1) // (2 * p)) / math.log(2 * m_blocks * p)
    return 4.0 * rho() ** (-exponent) * X_norm


def hankel_decay_check(Hn: np.ndarray) -> list[BoundReport]:
    """Check the singular-value decay law of a real PSD Hankel matrix.

    For every admissible pair (j >= 1, k >= 1, j + 2k <= n) verifies
    sigma_{j+2k} <= 16 rho^{-(2k-2)/log(2n)} sigma_j.
    """
    Hn = np.asarray(Hn, dtype=float)
    if Hn.ndim != 2 or Hn.shape[0] != Hn.shape[1]:
        raise StructureError(f"expected a square matrix, got {Hn.shape}")
    n = Hn.shape[0]
    scale = max(1.0, float(np.max(np.abs(Hn))))
    if not np.allclose(Hn, Hn.T, atol=1e-10 * scale):
        raise StructureError("matrix is not symmetric")
    flipped = Hn[::-1, :]  # anti-diagonals of Hn become diagonals of flipped
    for s in range(1 - n, n):
        d = np.diagonal(flipped, offset=s)
        if d.size > 1 and np.max(np.abs(d - d[0])) > 1e-10 * scale:
            raise StructureError("matrix is not Hankel (anti-diagonals not constant)")
    w = np.linalg.eigvalsh((Hn + Hn.T) / 2.0)
    if w.min() < -1e-10 * max(1.0, w.max()):
        raise StructureError(f"matrix is not PSD (min eig {w.min():.3e})")

    s = matkit.singular_values(Hn)
    r = rho()
    reports = []
    for j in range(1, n + 1):
        for k in range(1, (n - j) // 2 + 1):
            bound = 16.0 * r ** (-(2 * k - 2) / math.log(2 * n)) * s[j - 1]
            reports.append(check_bound(
                f"hankel-decay(j={j},k={k})", float(s[j + 2 * k - 1]), bound, "upper",
                {"j": j, "k": k, "n": n},
            ))
    return reports
