"""Numerical laboratory for coupled semilinear time-fractional wave systems."""

__version__ = "0.1.0"
