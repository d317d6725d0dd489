"""Randomized sweeps over sampled systems, with bound overlays.

Protocol: diagonal A with Uniform[-1, 1] poles, all entries of B and C
Uniform[-1, 1]. For each sampled system the sweep records one measured
conditioning quantity next to its closed-form bound:

* ``hankel-sv``: n-th largest singular value of the block Hankel matrix,
  window K1 = ceil(n/m), K2 = ceil(n/p), against its upper bound.
* ``cond-O``: condition number of the extended observability matrix,
  same window, against its lower bound.
* ``fim-min-eig``: smallest information eigenvalue for one energy-1 input
  trajectory of length K = n + 1, measured as the squared n-th singular
  value of S @ V, against its upper bound.

Per-trial RNG streams are keyed by (seed, sweep, n, trial), so results are
identical for any worker count.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds, fisher, matkit
from .errors import InvalidInputError, SamplingError
from .lti import StateSpaceModel, build_hankel, build_obsv_ctrb, markov_sequence
from .seeding import generator

SWEEP_KINDS = ("hankel-sv", "cond-O", "fim-min-eig")
_SWEEP_IDS = {k: i for i, k in enumerate(SWEEP_KINDS)}

SWEEP_CSV_HEADER = ["which", "n", "trial", "measured", "bound", "below_machine_eps"]


@dataclass
class SweepConfig:
    n_values: list[int]
    trials_per_n: int = 200
    p: int = 1
    m: int = 1
    seed: int = 0
    which: str = "hankel-sv"

    def __post_init__(self):
        if not self.n_values:
            raise InvalidInputError("n_values must be non-empty")
        if self.trials_per_n < 1:
            raise InvalidInputError("trials_per_n must be >= 1")
        if self.which not in SWEEP_KINDS:
            raise InvalidInputError(f"unknown sweep kind {self.which!r}; choose from {SWEEP_KINDS}")


def sample_system(n: int, p: int, m: int, rng: np.random.Generator) -> StateSpaceModel:
    """Draw a diagonal model with Uniform[-1, 1] poles and entries.

    Pole vectors with any pair closer than 1e-9 are redrawn (at most 100
    times) to keep the poles numerically distinct.
    """
    lam = None
    for _ in range(100):
        cand = rng.uniform(-1.0, 1.0, size=n)
        if n == 1 or np.min(np.diff(np.sort(cand))) >= 1e-9:
            lam = cand
            break
    if lam is None:
        raise SamplingError("failed to sample distinct poles in 100 attempts")
    B = rng.uniform(-1.0, 1.0, size=(n, p))
    C = rng.uniform(-1.0, 1.0, size=(m, n))
    return StateSpaceModel(
        A=np.diag(lam), B=B, C=C,
        process_cov=np.zeros((n, n)), meas_cov=np.eye(m),
        diagonal_flag=True,
    )


def _trial_row(which: str, n: int, p: int, m: int, seed: int, trial: int) -> dict:
    rng = generator(seed, _SWEEP_IDS[which], n, trial)
    model = sample_system(n, p, m, rng)
    delta_bar = model.delta_bar
    if which == "hankel-sv":
        K1 = -(-n // m)
        K2 = -(-n // p)
        hank = build_hankel(markov_sequence(model, K1 + K2 - 1), K1, K2)
        measured = float(matkit.singular_values(hank.H)[n - 1])
        bound = bounds.hankel_sigma_n_bound(n, m, p, K1, K2, delta_bar, "full-H")
    elif which == "cond-O":
        K1 = -(-n // m)
        K2 = -(-n // p)
        oc = build_obsv_ctrb(model, K1, K2)
        measured = oc.cond_O
        bound, _ = bounds.cond_lower_bounds(n, m, p, K1, K2)
    else:  # fim-min-eig
        K = n + 1
        u = rng.standard_normal((K, p))
        u /= np.sqrt(np.sum(u ** 2))
        S = fisher.build_S(u, m)
        V = fisher.build_V(np.diag(model.A), model.B, model.C, K)
        sv = np.linalg.svd(S @ V, compute_uv=False)
        measured = float(sv[n - 1] ** 2)
        bound = fisher.fim_min_eig_bound(n, p, m, 1, K, delta_bar)
    return {
        "which": which, "n": n, "trial": trial,
        "measured": measured, "bound": bound,
        "below_machine_eps": int(measured < bounds.MACHINE_EPS),
    }


def _rows_for_n(args: tuple) -> list[dict]:
    which, n, p, m, seed, trials = args
    return [_trial_row(which, n, p, m, seed, t) for t in range(trials)]


def sweep(config: SweepConfig, workers: int = 1) -> list[dict]:
    """Run the configured sweep; one row per (n, trial)."""
    tasks = [(config.which, n, config.p, config.m, config.seed, config.trials_per_n)
             for n in config.n_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_rows_for_n, tasks))
    else:
        chunks = [_rows_for_n(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def _format_cell(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path, fieldnames: list[str], rows: list[dict]) -> None:
    """Write rows with floats at 17 significant digits (byte-stable)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_format_cell(row[k]) for k in fieldnames])


def write_sweep_csv(path, rows: list[dict]) -> None:
    write_csv(path, SWEEP_CSV_HEADER, rows)
