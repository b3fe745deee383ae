"""Numerical laboratory for fractional gradients, divergences and variation."""

__version__ = "0.1.0"
