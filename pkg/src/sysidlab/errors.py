"""Exception hierarchy shared across the package.

Everything user-facing derives from :class:`SysidError` so the CLI can map
precondition failures to a single exit code. Internal bugs surface as plain
Python exceptions and are reported separately.
"""


class SysidError(Exception):
    """Base class for all precondition and domain errors."""


class InvalidInputError(SysidError, ValueError):
    """Non-finite input, empty spectra, or otherwise malformed arguments."""


class ShapeError(SysidError, ValueError):
    """Dimension mismatch (non-square matrix, incompatible blocks, ...)."""


class RankError(SysidError, ValueError):
    """Requested rank/order is out of range or unsupported by the data."""


class WindowError(SysidError, ValueError):
    """Hankel/trajectory window sizes violate a length precondition."""


class ExcitationError(SysidError, RuntimeError):
    """Regression design is rank deficient: the inputs do not excite."""


class StabilityError(SysidError, ValueError):
    """A constructed model violates its stability requirement."""


class StructureError(SysidError, ValueError):
    """A matrix does not have the structure an operation requires."""


class AssumptionError(SysidError, ValueError):
    """A modelling assumption (diagonal A, identity noise, ...) is violated."""


class SamplingError(SysidError, RuntimeError):
    """Rejection sampling failed to produce an admissible draw."""


class CapExceededError(SysidError, RuntimeError):
    """An integer search hit its configured cap without succeeding."""

    def __init__(self, message: str, cap: int):
        super().__init__(message)
        self.cap = cap


class ConfigError(SysidError, ValueError):
    """Malformed or inconsistent run configuration."""
