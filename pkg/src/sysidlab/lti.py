"""Discrete-time LTI models, simulation, and Hankel machinery.

The model is ``x_{k+1} = A x_k + B u_k + w_k``, ``y_k = C x_k + v_k`` with
Gaussian process/measurement noise. Trajectories store ``y_0`` as well even
though pole-information computations start at ``y_1``; each consumer selects
its own window.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import matkit
from .errors import InvalidInputError, ShapeError, WindowError
from .seeding import STREAM_INPUT, STREAM_MEASUREMENT, STREAM_PROCESS, child_seed, generator

INPUT_KINDS = ("gaussian-unit", "gaussian-energy-normalized", "impulse")


def _sym_psd_check(M: np.ndarray, name: str, tol: float = 1e-12) -> None:
    if M.shape[0] != M.shape[1]:
        raise ShapeError(f"{name} must be square, got {M.shape}")
    if not np.allclose(M, M.T, atol=1e-12, rtol=1e-12):
        raise InvalidInputError(f"{name} must be symmetric")
    if M.size:
        w = np.linalg.eigvalsh((M + M.T) / 2.0)
        scale = max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
        if w.size and w.min() < -tol * scale:
            raise InvalidInputError(f"{name} must be positive semidefinite (min eig {w.min():.3e})")


@dataclass
class StateSpaceModel:
    """State-space model with optional noise covariances.

    ``process_cov``/``meas_cov`` default to zero (a deterministic system).
    With ``diagonal_flag`` set, ``A`` must be exactly diagonal with real,
    pairwise-distinct diagonal entries (gap > 1e-12).
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    process_cov: np.ndarray | None = None
    meas_cov: np.ndarray | None = None
    diagonal_flag: bool = False

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.B = np.asarray(self.B, dtype=float)
        self.C = np.asarray(self.C, dtype=float)
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ShapeError(f"A must be square, got {self.A.shape}")
        if self.B.ndim != 2 or self.B.shape[0] != n:
            raise ShapeError(f"B must be n x p with n={n}, got {self.B.shape}")
        if self.C.ndim != 2 or self.C.shape[1] != n:
            raise ShapeError(f"C must be m x n with n={n}, got {self.C.shape}")
        if self.process_cov is None:
            self.process_cov = np.zeros((n, n))
        else:
            self.process_cov = np.asarray(self.process_cov, dtype=float)
            if self.process_cov.shape != (n, n):
                raise ShapeError(f"process_cov must be {n}x{n}, got {self.process_cov.shape}")
            _sym_psd_check(self.process_cov, "process_cov")
        m = self.C.shape[0]
        if self.meas_cov is None:
            self.meas_cov = np.zeros((m, m))
        else:
            self.meas_cov = np.asarray(self.meas_cov, dtype=float)
            if self.meas_cov.shape != (m, m):
                raise ShapeError(f"meas_cov must be {m}x{m}, got {self.meas_cov.shape}")
            _sym_psd_check(self.meas_cov, "meas_cov")
        for M in (self.A, self.B, self.C):
            if not np.all(np.isfinite(M)):
                raise InvalidInputError("model matrices must be finite")
        if self.diagonal_flag:
            off = self.A - np.diag(np.diag(self.A))
            if np.any(off != 0.0):
                raise InvalidInputError("diagonal_flag set but A has off-diagonal entries")
            d = np.sort(np.diag(self.A))
            if n > 1 and np.min(np.diff(d)) <= 1e-12:
                raise InvalidInputError("diagonal_flag requires pairwise-distinct poles (gap > 1e-12)")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.B.shape[1]

    @property
    def m(self) -> int:
        return self.C.shape[0]

    @property
    def delta_bar(self) -> float:
        """max|b_ij| * max|c_ij|, the entry-scale constant of the bounds."""
        if self.B.size == 0 or self.C.size == 0:
            return 0.0
        return float(np.max(np.abs(self.B)) * np.max(np.abs(self.C)))

    def poles(self) -> np.ndarray:
        return matkit.spectrum(self.A)


@dataclass
class Trajectory:
    """One rollout: inputs u_0..u_{K-1} and outputs y_0..y_K."""

    inputs: np.ndarray   # (K, p)
    outputs: np.ndarray  # (K+1, m)
    seed: int = 0
    energy_constrained: bool = False
    energy: float = field(init=False)

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=float)
        self.outputs = np.asarray(self.outputs, dtype=float)
        if self.inputs.ndim != 2 or self.outputs.ndim != 2:
            raise ShapeError("inputs and outputs must be 2-D (time-major)")
        if self.outputs.shape[0] != self.inputs.shape[0] + 1:
            raise ShapeError(
                f"outputs must hold K+1 samples, got {self.outputs.shape[0]} "
                f"for K={self.inputs.shape[0]}"
            )
        self.energy = float(np.sum(self.inputs ** 2))
        if not np.isfinite(self.energy):
            raise InvalidInputError("input energy must be finite")
        if self.energy_constrained and self.energy > 1.0 + 1e-12:
            raise InvalidInputError(f"energy-constrained trajectory has energy {self.energy!r} > 1")

    @property
    def K(self) -> int:
        return self.inputs.shape[0]


@dataclass
class Dataset:
    """N trajectories of equal length, plus the seed they derive from."""

    trajectories: list[Trajectory]
    master_seed: int = 0

    def __post_init__(self):
        if len(self.trajectories) < 1:
            raise InvalidInputError("dataset needs at least one trajectory")
        K = self.trajectories[0].K
        if any(t.K != K for t in self.trajectories):
            raise InvalidInputError("all trajectories must share the same length K")

    @property
    def N(self) -> int:
        return len(self.trajectories)

    @property
    def K(self) -> int:
        return self.trajectories[0].K


@dataclass
class MarkovSequence:
    """Impulse-response blocks H_0..H_{T-1}, each m x p."""

    blocks: np.ndarray  # (T, m, p)

    def __post_init__(self):
        self.blocks = np.asarray(self.blocks, dtype=float)
        if self.blocks.ndim != 3:
            raise ShapeError("blocks must be a (T, m, p) array")

    def __len__(self) -> int:
        return self.blocks.shape[0]

    @property
    def m(self) -> int:
        return self.blocks.shape[1]

    @property
    def p(self) -> int:
        return self.blocks.shape[2]

    def block_toeplitz(self, K: int) -> np.ndarray:
        """Lower block-triangular Toeplitz map from u_{0:K-1} to mean y_{1:K}."""
        if K > len(self):
            raise WindowError(f"need {K} blocks, have {len(self)}")
        m, p = self.m, self.p
        T = np.zeros((m * K, p * K))
        for i in range(K):
            for j in range(i + 1):
                T[i * m:(i + 1) * m, j * p:(j + 1) * p] = self.blocks[i - j]
        return T


@dataclass
class HankelSet:
    """Block Hankel matrix plus its left/right-trimmed companions.

    ``H`` has block (i, j) equal to H_{i+j}; ``H_plus``/``H_minus`` drop the
    left-most/right-most block column of ``H``.
    """

    H: np.ndarray
    H_plus: np.ndarray
    H_minus: np.ndarray
    K1: int
    K2: int


def markov_sequence(model: StateSpaceModel, T: int) -> MarkovSequence:
    """Exact Markov parameters H_k = C A^k B for k = 0..T-1.

    The product C A^k is accumulated; A is never re-powered from scratch.
    """
    if T < 1:
        raise WindowError("T must be >= 1")
    blocks = np.empty((T, model.m, model.p))
    X = model.C.copy()
    for k in range(T):
        blocks[k] = X @ model.B
        if k + 1 < T:
            X = X @ model.A
    return MarkovSequence(blocks)


def _psd_sqrt(M: np.ndarray) -> np.ndarray | None:
    """Symmetric square root of a PSD matrix; None when M is exactly zero."""
    if not np.any(M):
        return None
    w, V = np.linalg.eigh((M + M.T) / 2.0)
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.T


def simulate(
    model: StateSpaceModel,
    inputs: np.ndarray,
    noise_seed: int = 0,
    x0: np.ndarray | None = None,
) -> Trajectory:
    """Roll the model forward under ``inputs``, recording y_0..y_K.

    Noise draws come from counter-based streams keyed by
    ``(noise_seed, k, stream)``, so results are independent of how many
    trajectories are simulated concurrently.
    """
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 2 or inputs.shape[1] != model.p:
        raise ShapeError(f"inputs must be (K, p={model.p}), got {inputs.shape}")
    K = inputs.shape[0]
    if x0 is None:
        x = np.zeros(model.n)
    else:
        x = np.asarray(x0, dtype=float).reshape(-1)
        if x.shape[0] != model.n:
            raise ShapeError(f"x0 must have length {model.n}")
    Fq = _psd_sqrt(model.process_cov)
    Fr = _psd_sqrt(model.meas_cov)
    outputs = np.empty((K + 1, model.m))
    for k in range(K + 1):
        y = model.C @ x
        if Fr is not None:
            y = y + Fr @ generator(noise_seed, k, STREAM_MEASUREMENT).standard_normal(model.m)
        outputs[k] = y
        if k < K:
            x = model.A @ x + model.B @ inputs[k]
            if Fq is not None:
                x = x + Fq @ generator(noise_seed, k, STREAM_PROCESS).standard_normal(model.n)
    return Trajectory(inputs=inputs, outputs=outputs, seed=noise_seed)


def gen_inputs(kind: str, p: int, K: int, seed: int = 0) -> np.ndarray:
    """Generate a (K, p) input sequence of the requested kind.

    ``gaussian-unit`` draws i.i.d. standard normals, the energy-normalized
    variant rescales them to total energy exactly 1, and ``impulse`` puts
    e_1 at k = 0.
    """
    if K < 1:
        raise WindowError("K must be >= 1")
    if kind == "impulse":
        u = np.zeros((K, p))
        u[0, 0] = 1.0
        return u
    if kind not in ("gaussian-unit", "gaussian-energy-normalized"):
        raise InvalidInputError(f"unknown input kind {kind!r}; choose from {INPUT_KINDS}")
    u = generator(seed, 0, STREAM_INPUT).standard_normal((K, p))
    if kind == "gaussian-energy-normalized":
        norm = np.sqrt(np.sum(u ** 2))
        if norm == 0.0:
            u[0, 0] = 1.0
            return u
        u = u / norm
    return u


def make_dataset(
    model: StateSpaceModel,
    N: int,
    K: int,
    kind: str = "gaussian-unit",
    master_seed: int = 0,
) -> Dataset:
    """Simulate N independent trajectories with per-trajectory derived seeds."""
    trajectories = []
    for ell in range(N):
        u = gen_inputs(kind, model.p, K, seed=child_seed(master_seed, ell, 0))
        trajectories.append(simulate(model, u, noise_seed=child_seed(master_seed, ell, 1)))
    return Dataset(trajectories, master_seed=master_seed)


def build_hankel(markov: MarkovSequence, K1: int, K2: int) -> HankelSet:
    """Assemble H, H_plus, H_minus from at least K1+K2-1 Markov blocks."""
    if K1 < 1 or K2 < 1:
        raise WindowError("K1 and K2 must be >= 1")
    needed = K1 + K2 - 1
    if len(markov) < needed:
        raise WindowError(f"need {needed} Markov blocks for K1={K1}, K2={K2}, have {len(markov)}")
    m, p = markov.m, markov.p
    H = np.empty((m * K1, p * K2))
    for i in range(K1):
        for j in range(K2):
            H[i * m:(i + 1) * m, j * p:(j + 1) * p] = markov.blocks[i + j]
    return HankelSet(H=H, H_plus=H[:, p:].copy(), H_minus=H[:, :p * (K2 - 1)].copy(), K1=K1, K2=K2)


@dataclass
class ObsvCtrb:
    """Extended observability/controllability matrices with diagnostics."""

    O: np.ndarray
    Q: np.ndarray
    cond_O: float
    cond_Q: float
    full_rank_O: bool
    full_rank_Q: bool


def observability_matrix(A: np.ndarray, C: np.ndarray, K1: int) -> np.ndarray:
    rows = [C]
    X = C
    for _ in range(K1 - 1):
        X = X @ A
        rows.append(X)
    return np.vstack(rows)


def controllability_matrix(A: np.ndarray, B: np.ndarray, K2: int) -> np.ndarray:
    cols = [B]
    X = B
    for _ in range(K2 - 1):
        X = A @ X
        cols.append(X)
    return np.hstack(cols)


def build_obsv_ctrb(model: StateSpaceModel, K1: int, K2: int) -> ObsvCtrb:
    """Stacked O = [C; CA; ...] and Q = [B, AB, ...] with conditioning report."""
    if K1 < 1 or K2 < 1:
        raise WindowError("K1 and K2 must be >= 1")
    O = observability_matrix(model.A, model.C, K1)
    Q = controllability_matrix(model.A, model.B, K2)
    sO = matkit.singular_values(O)
    sQ = matkit.singular_values(Q)
    tolO = matkit.default_rank_tol(O) * (sO[0] if sO.size else 0.0)
    tolQ = matkit.default_rank_tol(Q) * (sQ[0] if sQ.size else 0.0)
    return ObsvCtrb(
        O=O,
        Q=Q,
        cond_O=matkit.cond(O),
        cond_Q=matkit.cond(Q),
        full_rank_O=bool(np.sum(sO > tolO) == min(O.shape)),
        full_rank_Q=bool(np.sum(sQ > tolQ) == min(Q.shape)),
    )


def minimal_realization(model: StateSpaceModel, tol: float = 1e-9) -> StateSpaceModel:
    """Restrict to the controllable-and-observable subspace.

    SVD-based: project onto the column space of the controllability matrix,
    then onto the row space of the observability matrix of the reduced
    system. Both subspaces are invariant, so the Markov sequence is
    preserved up to the truncation tolerance.
    """
    if tol < 0:
        raise InvalidInputError("tol must be >= 0")
    A, B, C = model.A, model.B, model.C
    n = A.shape[0]

    ctrb = controllability_matrix(A, B, n)
    U, s, _ = np.linalg.svd(ctrb, full_matrices=False)
    r = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    U = U[:, :r]
    A1, B1, C1 = U.T @ A @ U, U.T @ B, C @ U

    if r:
        obsv = observability_matrix(A1, C1, r)
        _, s2, Vt = np.linalg.svd(obsv, full_matrices=False)
        r2 = int(np.sum(s2 > tol * s2[0])) if s2.size and s2[0] > 0 else 0
        W = Vt[:r2, :].T
        A2, B2, C2 = W.T @ A1 @ W, W.T @ B1, C1 @ W
    else:
        A2, B2, C2 = A1, B1, C1
        W = np.zeros((0, 0))

    red = U @ W if r else np.zeros((n, 0))
    proc = red.T @ model.process_cov @ red
    return StateSpaceModel(A=A2, B=B2, C=C2, process_cov=proc, meas_cov=model.meas_cov)


def hausdorff(spectrum_a, spectrum_b) -> float:
    """Hausdorff distance between two finite spectra in the complex plane."""
    a = np.atleast_1d(np.asarray(spectrum_a, dtype=complex))
    b = np.atleast_1d(np.asarray(spectrum_b, dtype=complex))
    if a.size == 0 or b.size == 0:
        raise InvalidInputError("spectra must be non-empty")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InvalidInputError("spectra must be finite")
    D = np.abs(a[:, None] - b[None, :])
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def model_to_dict(model: StateSpaceModel) -> dict:
    return {
        "A": model.A.tolist(),
        "B": model.B.tolist(),
        "C": model.C.tolist(),
        "Q": model.process_cov.tolist(),
        "R": model.meas_cov.tolist(),
        "diagonal": bool(model.diagonal_flag),
    }


def model_from_dict(data: dict) -> StateSpaceModel:
    try:
        return StateSpaceModel(
            A=np.array(data["A"], dtype=float),
            B=np.array(data["B"], dtype=float),
            C=np.array(data["C"], dtype=float),
            process_cov=np.array(data["Q"], dtype=float) if "Q" in data else None,
            meas_cov=np.array(data["R"], dtype=float) if "R" in data else None,
            diagonal_flag=bool(data.get("diagonal", False)),
        )
    except KeyError as exc:
        raise InvalidInputError(f"model file missing field {exc}") from exc


def save_model(model: StateSpaceModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def load_model(path) -> StateSpaceModel:
    return model_from_dict(json.loads(Path(path).read_text()))
