"""Fractional operators with direct and spectral backends."""

from .backend import DIRECT, MULTIPLIER, PERIODIC, SPECTRAL, BackendSpec, OperatorResult
from .exterior import Exterior, exterior_nodes
from .operators import (
    ball_average_kernel,
    dcal_alpha,
    frac_divergence,
    frac_gradient,
    frac_laplacian,
    maximal_function,
    nl_divergence,
    nl_gradient,
    riesz_potential,
    riesz_transform,
)

__all__ = [
    "BackendSpec", "OperatorResult", "DIRECT", "SPECTRAL", "MULTIPLIER", "PERIODIC", "Exterior", "exterior_nodes",
    "frac_gradient", "frac_divergence", "frac_laplacian", "riesz_potential",
    "riesz_transform", "dcal_alpha", "nl_divergence", "nl_gradient",
    "maximal_function", "ball_average_kernel",
]
