"""Normalising constants for the fractional operators."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import gammaln, gamma


def _gamma_ratio(a: float, b: float) -> float:
    """Gamma(a) / Gamma(b) evaluated through log-Gamma, keeping the sign."""
    sign = math.copysign(1.0, gamma(a)) * math.copysign(1.0, gamma(b))
    return sign * math.exp(gammaln(a) - gammaln(b))


def mu(n: int, alpha: float) -> float:
    """Constant of the fractional gradient and divergence.

    Negative orders are accepted (the one-dimensional f_alpha example
    needs ``mu(1, -alpha)``); only the poles of Gamma((1 - alpha)/2) are
    rejected.
    """
    b = (1.0 - alpha) / 2.0
    if b <= 0 and float(b).is_integer():
        raise ValueError(f"mu({n}, {alpha}) hits a pole of Gamma((1-alpha)/2)")
    return 2.0**alpha * math.pi ** (-n / 2.0) * _gamma_ratio((n + alpha + 1.0) / 2.0, b)


def nu_lap(n: int, s: float) -> float:
    """Constant of the singular-integral form of (-Delta)^(s/2).

    Negative for s in (0, 2) because Gamma(-s/2) < 0 there.
    """
    if not 0.0 < s < 2.0:
        raise ValueError("fractional Laplacian order must lie in (0, 2)")
    return 2.0**s * math.pi ** (-n / 2.0) * _gamma_ratio((n + s) / 2.0, -s / 2.0)


def riesz_norm(n: int, alpha: float) -> float:
    """Normalisation of the Riesz potential kernel |x|^(alpha - n)."""
    if not 0.0 < alpha < n:
        raise ValueError(f"Riesz potential order must lie in (0, {n})")
    return 2.0**-alpha * math.pi ** (-n / 2.0) * _gamma_ratio((n - alpha) / 2.0, alpha / 2.0)


def riesz_transform_norm(n: int) -> float:
    return math.pi ** (-(n + 1) / 2.0) * math.gamma((n + 1) / 2.0)


def omega(beta: float) -> float:
    """Volume of the unit ball in (possibly fractional) dimension beta."""
    return math.pi ** (beta / 2.0) / math.gamma((beta + 2.0) / 2.0)


@dataclass(frozen=True)
class FracConstants:
    """Evaluated constants for a given dimension and order."""

    n: int
    alpha: float

    @property
    def mu(self) -> float:
        return mu(self.n, self.alpha)

    @property
    def nu_lap(self) -> float:
        return nu_lap(self.n, self.alpha)

    def riesz_norm(self, order: float | None = None) -> float:
        return riesz_norm(self.n, self.alpha if order is None else order)

    @staticmethod
    def omega(beta: float) -> float:
        return omega(beta)
