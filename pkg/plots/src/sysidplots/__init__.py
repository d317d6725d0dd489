"""Figure rendering for sysidlab CSV artifacts.

Kept separate from the numerical package so the main test suite runs with no
plotting stack installed. No science happens here: every number plotted comes
straight out of a CSV, and the only transforms applied are axis scales.
"""

__version__ = "0.1.0"
