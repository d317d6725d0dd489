"""Deterministic, counter-style random streams.

All randomness in the package flows through :func:`generator`, keyed by small
integer tuples such as ``(seed, time_index, stream)``. Streams derived this
way are independent of execution order, so trajectory simulation and sweep
trials can fan out across workers without changing any result.
"""

from __future__ import annotations

import numpy as np

# Stream ids used as the last key component.
STREAM_PROCESS = 0
STREAM_MEASUREMENT = 1
STREAM_INPUT = 2


def generator(*key: int) -> np.random.Generator:
    """Return a Philox-backed generator keyed by an integer tuple."""
    ss = np.random.SeedSequence(key)
    return np.random.Generator(np.random.Philox(key=ss.generate_state(2, np.uint64)))


def child_seed(*key: int) -> int:
    """Derive a single integer seed from a structured key."""
    ss = np.random.SeedSequence(key)
    return int(ss.generate_state(1, np.uint64)[0])
