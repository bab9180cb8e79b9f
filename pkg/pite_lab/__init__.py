"""Numerical laboratory for probabilistic imaginary-time evolution."""

__version__ = "1.0.0"
