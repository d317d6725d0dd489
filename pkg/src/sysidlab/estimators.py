"""Markov-parameter regression and realization algorithms.

Two realization routes are implemented:

* Ho-Kalman: truncated SVD of the right-trimmed block Hankel matrix of
  estimated Markov parameters, symmetric square-root split into balanced
  observability/controllability factors, then A from the shifted Hankel
  matrix sandwiched between pseudoinverses.
* MOESP: LQ decomposition of stacked past-input/past-output Hankel data,
  SVD of the output residual block for the observability estimate, shift
  equation for A, and a linear least-squares step for B.

Both run happily in their ill-conditioned regime; a degraded truncation
only attaches a warning to the estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matkit
from .bounds import BoundReport, check_bound
from .errors import InvalidInputError, RankError, ShapeError, WindowError, ExcitationError
from .lti import (
    Dataset,
    HankelSet,
    MarkovSequence,
    StateSpaceModel,
    build_hankel,
    hausdorff,
    markov_sequence,
    observability_matrix,
)

OLS_MODES = ("toeplitz-ls", "last-step-ls")


@dataclass
class RealizationEstimate:
    """An identified (A, B, C) triple plus the factors that produced it."""

    A_hat: np.ndarray
    B_hat: np.ndarray
    C_hat: np.ndarray
    method: str
    singular_values_used: np.ndarray
    window: tuple[int, int]
    obsv_factor: np.ndarray | None = None
    ctrb_factor: np.ndarray | None = None
    hankel: HankelSet | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.A_hat.shape[0]

    @property
    def p(self) -> int:
        return self.B_hat.shape[1]

    @property
    def m(self) -> int:
        return self.C_hat.shape[0]


@dataclass
class AlignmentReport:
    """Errors of an estimate against a reference, after orthogonal alignment."""

    unitary: np.ndarray
    err_A: float
    err_B: float
    err_C: float
    spectrum_distance: float


@dataclass
class PerturbationReport:
    """Perturbation-bound check for the Ho-Kalman factors.

    ``checks`` holds (achieved, bound) pairs for the observability factor
    (which dominates the C error), the controllability factor (dominates B),
    and the aligned A error. ``c_error``/``b_error`` are the direct matrix
    errors, informational only.
    """

    sigma_n_h_minus: float
    perturbation: float
    precondition_ok: bool
    checks: list[BoundReport] = field(default_factory=list)
    c_error: float = float("nan")
    b_error: float = float("nan")


def _reversed_window(U: np.ndarray, k: int, width: int) -> np.ndarray:
    """Regressor (u_{k-1}, ..., u_0) zero-padded to ``width`` input blocks."""
    p = U.shape[1]
    z = np.zeros(width * p)
    z[: k * p] = U[k - 1 :: -1][:k].ravel()
    return z


def _name_deficient_block(Z: np.ndarray, p: int, T: int) -> int:
    for j in range(T):
        cols = Z[:, : (j + 1) * p]
        if np.linalg.matrix_rank(cols) < (j + 1) * p:
            return j
    return T - 1


def estimate_markov_ols(dataset: Dataset, T: int, mode: str = "toeplitz-ls") -> MarkovSequence:
    """Least-squares Markov parameter estimates H_0..H_{T-1}.

    ``toeplitz-ls`` regresses every output y_k, k = 1..T, on its reversed
    input window (u_{k-1}, ..., u_0), stacking equations across time steps
    and trajectories; the zero initial state makes each of these equations
    exact in the noise-free case. ``last-step-ls`` keeps only the k = T
    equation of each trajectory.
    """
    if mode not in OLS_MODES:
        raise InvalidInputError(f"unknown OLS mode {mode!r}; choose from {OLS_MODES}")
    if T < 1:
        raise WindowError("T must be >= 1")
    if dataset.K < T:
        raise WindowError(f"trajectories have K={dataset.K} < T={T}")
    p = dataset.trajectories[0].inputs.shape[1]
    m = dataset.trajectories[0].outputs.shape[1]

    rows = []
    targets = []
    for traj in dataset.trajectories:
        if mode == "toeplitz-ls":
            for k in range(1, T + 1):
                rows.append(_reversed_window(traj.inputs, k, T))
                targets.append(traj.outputs[k])
        else:
            rows.append(_reversed_window(traj.inputs, T, T))
            targets.append(traj.outputs[T])
    Z = np.asarray(rows)
    Y = np.asarray(targets)

    theta, _, rank, _ = np.linalg.lstsq(Z, Y, rcond=None)
    if rank < p * T:
        j = _name_deficient_block(Z, p, T)
        raise ExcitationError(
            f"input excitation insufficient: design rank {rank} < {p * T}; "
            f"Markov block H_{j} is underdetermined"
        )
    theta = theta.T  # (m, p*T)
    blocks = np.stack([theta[:, j * p : (j + 1) * p] for j in range(T)])
    return MarkovSequence(blocks)


def ho_kalman(markov_est: MarkovSequence, n: int, K1: int, K2: int,
              rank_tol: float | None = None) -> RealizationEstimate:
    """Balanced rank-n realization from estimated Markov parameters.

    Builds the block Hankel matrix and its trimmed companions, truncates the
    right-trimmed one to rank n, splits the singular values symmetrically
    into observability/controllability factors, and reads off C, B, A.
    """
    m, p = markov_est.m, markov_est.p
    if K2 < 2:
        raise WindowError("Ho-Kalman needs K2 >= 2 so the trimmed Hankel matrix is non-empty")
    if not 1 <= n <= min(m * K1, p * (K2 - 1)):
        raise RankError(
            f"order n={n} out of range [1, {min(m * K1, p * (K2 - 1))}] for window ({K1}, {K2})"
        )
    hank = build_hankel(markov_est, K1, K2)
    s_all = matkit.singular_values(hank.H_minus)
    U_r, s_r, V_r = matkit.truncated_svd(hank.H_minus, n)

    warnings = []
    if rank_tol is None:
        rank_tol = matkit.default_rank_tol(hank.H_minus)
    if s_all[0] == 0.0 or s_all[n - 1] < rank_tol * s_all[0]:
        warnings.append(
            f"rank-{n} truncation is ill-conditioned: sigma_n = {s_all[n - 1]:.3e} "
            f"vs sigma_1 = {s_all[0]:.3e}"
        )

    sqrt_s = np.sqrt(s_r)
    O_hat = U_r * sqrt_s
    Q_hat = sqrt_s[:, None] * V_r.T
    C_hat = O_hat[:m, :].copy()
    B_hat = Q_hat[:, :p].copy()
    A_hat = matkit.pinv(O_hat) @ hank.H_plus @ matkit.pinv(Q_hat)

    return RealizationEstimate(
        A_hat=A_hat, B_hat=B_hat, C_hat=C_hat,
        method="ho-kalman",
        singular_values_used=s_all[: min(n + 1, s_all.size)].copy(),
        window=(K1, K2),
        obsv_factor=O_hat, ctrb_factor=Q_hat, hankel=hank,
        warnings=warnings,
    )


def _procrustes(O_est: np.ndarray, O_ref: np.ndarray) -> np.ndarray:
    """Orthogonal minimizer of ||O_ref - O_est @ U||_F."""
    if np.array_equal(O_est, O_ref):
        return np.eye(O_est.shape[1])  # identical factors align exactly
    W, _, Zt = np.linalg.svd(O_est.T @ O_ref)
    return W @ Zt


def hokalman_perturbation_check(
    H_true: HankelSet,
    L: np.ndarray,
    L_hat: np.ndarray,
    est: RealizationEstimate,
    ref: StateSpaceModel,
) -> PerturbationReport:
    """Evaluate the factor-perturbation bounds for a Ho-Kalman run.

    ``L``/``L_hat`` are the rank-n approximations of the true and estimated
    trimmed Hankel matrices. The reference factors come from running the
    same algorithm on the exact Markov parameters of ``ref``. A single
    orthogonal alignment (the Procrustes minimizer for the observability
    factor) is applied uniformly to all three errors.
    """
    n = est.n
    K1, K2 = est.window
    s_true = matkit.singular_values(H_true.H_minus)
    sigma_n = float(s_true[n - 1])
    pert = matkit.spectral_norm(np.asarray(L) - np.asarray(L_hat))

    report = PerturbationReport(sigma_n_h_minus=sigma_n, perturbation=pert, precondition_ok=True)
    if sigma_n <= 0.0 or pert > sigma_n / 2.0 * (1.0 + 1e-12):
        report.precondition_ok = False
        return report

    exact = ho_kalman(markov_sequence(ref, K1 + K2 - 1), n, K1, K2)
    U = _procrustes(est.obsv_factor, exact.obsv_factor)

    factor_bound = pert * np.sqrt(10.0 * n / sigma_n)
    err_O = float(np.linalg.norm(exact.obsv_factor - est.obsv_factor @ U))
    err_Q = float(np.linalg.norm(exact.ctrb_factor - U.T @ est.ctrb_factor))

    H_plus_err = matkit.spectral_norm(H_true.H_plus - est.hankel.H_plus)
    a_bound = (9.0 * np.sqrt(n) / sigma_n) * (
        np.sqrt(pert / sigma_n) * matkit.spectral_norm(H_true.H_plus) + H_plus_err
    )
    err_A = float(np.linalg.norm(exact.A_hat - U.T @ est.A_hat @ U))

    params = {"n": n, "K1": K1, "K2": K2, "sigma_n": sigma_n, "perturbation": pert}
    report.checks = [
        check_bound("obsv-factor", err_O, factor_bound, "upper", params),
        check_bound("ctrb-factor", err_Q, factor_bound, "upper", params),
        check_bound("A", err_A, a_bound, "upper", params),
    ]
    report.c_error = float(np.linalg.norm(exact.C_hat - est.C_hat @ U))
    report.b_error = float(np.linalg.norm(exact.B_hat - U.T @ est.B_hat))
    return report


def _past_hankel(series: np.ndarray, K1: int, K2: int) -> np.ndarray:
    """Block Hankel matrix of past data: block row i, column j holds sample i+j."""
    d = series.shape[1]
    out = np.empty((d * K1, K2))
    for i in range(K1):
        out[i * d : (i + 1) * d, :] = series[i : i + K2, :].T
    return out


def moesp(dataset: Dataset, n: int, K1: int, K2: int,
          rank_tol: float | None = None) -> RealizationEstimate:
    """MOESP realization from input/output data.

    Past-input and past-output Hankel matrices (starting at u_0 and y_0) are
    stacked and LQ-decomposed; the SVD of the output residual block gives
    the observability estimate, truncated to its leading n directions. A
    comes from the observability shift equation and B from a stacked linear
    least-squares problem using the known zero initial state.

    Multiple trajectories are combined by horizontal concatenation of the
    per-trajectory data blocks.
    """
    p = dataset.trajectories[0].inputs.shape[1]
    m = dataset.trajectories[0].outputs.shape[1]
    if K1 < int(np.ceil(n / m)) + 1:
        raise WindowError(f"K1={K1} too small: need K1 >= ceil(n/m)+1 = {int(np.ceil(n / m)) + 1}")
    if dataset.K < K1 + K2 - 1:
        raise WindowError(f"trajectory length K={dataset.K} < K1+K2-1 = {K1 + K2 - 1}")

    blocks = []
    for traj in dataset.trajectories:
        U_p = _past_hankel(traj.inputs, K1, K2)
        Y_p = _past_hankel(traj.outputs, K1, K2)
        blocks.append(np.vstack([U_p, Y_p]))
    Z_p = np.hstack(blocks)
    if Z_p.shape[1] < (p + m) * K1:
        raise WindowError(
            f"not enough data columns: {Z_p.shape[1]} < (p+m)*K1 = {(p + m) * K1}; "
            "increase K2 or the number of trajectories"
        )

    Lmat, _ = matkit.lq(Z_p)
    L22 = Lmat[p * K1 :, p * K1 : (p + m) * K1]
    s2 = matkit.singular_values(L22)
    if rank_tol is None:
        rank_tol = matkit.default_rank_tol(L22)
    usable = int(np.sum(s2 > rank_tol * s2[0])) if s2[0] > 0 else 0
    if usable < n:
        raise RankError(
            f"order deficiency: residual block supports rank {usable} < requested n={n}"
        )
    U2, s2_r, _ = matkit.truncated_svd(L22, n)
    O_hat = U2 * np.sqrt(s2_r)

    C_hat = O_hat[:m, :].copy()
    A_hat = matkit.pinv(O_hat[:-m, :]) @ O_hat[m:, :]
    B_hat = _moesp_b_step(dataset, A_hat, C_hat)

    return RealizationEstimate(
        A_hat=A_hat, B_hat=B_hat, C_hat=C_hat,
        method="moesp",
        singular_values_used=s2[: min(n + 1, s2.size)].copy(),
        window=(K1, K2),
        obsv_factor=O_hat, ctrb_factor=None, hankel=None,
        warnings=[],
    )


def _moesp_b_step(dataset: Dataset, A_hat: np.ndarray, C_hat: np.ndarray) -> np.ndarray:
    """Solve for B given (A, C), zero initial state, and no feedthrough.

    Every output sample is linear in B:
    y_k = sum_{t<k} C A^{k-1-t} B u_t, so vec(B) solves one stacked
    least-squares problem over all time steps and trajectories.
    """
    n = A_hat.shape[0]
    m = C_hat.shape[0]
    p = dataset.trajectories[0].inputs.shape[1]
    K = dataset.K
    N = dataset.N

    G = np.empty((K, m, n))
    X = C_hat.copy()
    for j in range(K):
        G[j] = X
        X = X @ A_hat

    U_all = np.stack([t.inputs for t in dataset.trajectories])    # (N, K, p)
    Y_all = np.stack([t.outputs for t in dataset.trajectories])   # (N, K+1, m)

    design = np.zeros((K, N, m, p * n))
    for k in range(1, K + 1):
        acc = np.zeros((N, m, p, n))
        for t in range(k):
            acc += np.einsum("lp,mn->lmpn", U_all[:, t, :], G[k - 1 - t])
        design[k - 1] = acc.reshape(N, m, p * n)
    rows = design.reshape(K * N * m, p * n)
    targets = Y_all[:, 1:, :].transpose(1, 0, 2).reshape(K * N * m)

    vec_b, _, _, _ = np.linalg.lstsq(rows, targets, rcond=None)
    return vec_b.reshape((n, p), order="F")


def align_realization(est: RealizationEstimate, ref: StateSpaceModel) -> AlignmentReport:
    """Report post-alignment errors of an estimate against a reference model.

    The aligning orthogonal matrix is the Procrustes minimizer for the
    observability matrices over the estimate's row window; the spectrum
    distance needs no alignment.
    """
    if (est.n, est.p, est.m) != (ref.n, ref.p, ref.m):
        raise ShapeError(
            f"estimate dims (n,p,m)={(est.n, est.p, est.m)} do not match "
            f"reference {(ref.n, ref.p, ref.m)}"
        )
    K1 = est.window[0]
    O_ref = observability_matrix(ref.A, ref.C, K1)
    O_est = observability_matrix(est.A_hat, est.C_hat, K1)
    U = _procrustes(O_est, O_ref)
    return AlignmentReport(
        unitary=U,
        err_A=float(np.linalg.norm(ref.A - U.T @ est.A_hat @ U)),
        err_B=float(np.linalg.norm(ref.B - U.T @ est.B_hat)),
        err_C=float(np.linalg.norm(ref.C - est.C_hat @ U)),
        spectrum_distance=hausdorff(matkit.spectrum(ref.A), matkit.spectrum(est.A_hat)),
    )
