"""Finite-sample MIMO system identification laboratory.

Realization algorithms (Ho-Kalman, MOESP), closed-form ill-conditioning
bounds for the matrices they factor, Fisher-information limits on pole
estimation, and reproducible experiment harnesses that confront every bound
with sampled systems.
"""

__version__ = "0.1.0"

from . import bounds, errors, estimators, experiments, fisher, heatbench, lti, matkit, seeding

__all__ = [
    "bounds",
    "errors",
    "estimators",
    "experiments",
    "fisher",
    "heatbench",
    "lti",
    "matkit",
    "seeding",
    "__version__",
]
