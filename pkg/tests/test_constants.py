import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import gamma

from fracvar import constants as C


def gauss(x):
    return np.exp(-np.pi * x * x)


def frac_grad_real(alpha, x):
    """mu int_0^inf (f(x+z) - f(x-z)) z^(-1-alpha) dz for the unit Gaussian."""
    g = lambda z: (gauss(x + z) - gauss(x - z)) / z ** (1 + alpha)
    v = integrate.quad(g, 0, 1, limit=200)[0] + integrate.quad(g, 1, np.inf, limit=200)[0]
    return C.mu(1, alpha) * v


def frac_grad_fourier(alpha, x):
    """Inverse transform of i 2 pi xi |2 pi xi|^(alpha-1) exp(-pi xi^2)."""
    g = lambda s: (2 * np.pi * s) ** alpha * gauss(s) * np.sin(2 * np.pi * s * x)
    return -2.0 * integrate.quad(g, 0, np.inf, limit=200)[0]


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("x", [0.1, 0.4, 1.3])
def test_mu_matches_fourier_side(alpha, x):
    assert frac_grad_real(alpha, x) == pytest.approx(frac_grad_fourier(alpha, x), rel=1e-7)


@pytest.mark.parametrize("s", [0.3, 1.0, 1.6])
def test_nu_lap_gives_positive_laplacian_at_peak(s):
    # (-Delta)^(s/2) of the Gaussian at 0 from the transform side
    exact = (2 * np.pi) ** s * gamma((s + 1) / 2) / np.pi ** ((s + 1) / 2)
    g = lambda z: (gauss(z) - 1.0) / z ** (1 + s)
    integral = 2 * (integrate.quad(g, 0, 1, limit=200)[0] + integrate.quad(g, 1, np.inf)[0])
    assert C.nu_lap(1, s) < 0
    assert C.nu_lap(1, s) * integral == pytest.approx(exact, rel=1e-7)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_riesz_norm_matches_fourier_side(alpha):
    exact = (2 * np.pi) ** -alpha * gamma((1 - alpha) / 2) / np.pi ** ((1 - alpha) / 2)
    real = C.riesz_norm(1, alpha) * gamma(alpha / 2) / np.pi ** (alpha / 2)
    assert real == pytest.approx(exact, rel=1e-12)


def test_mu_negative_order_and_pole():
    # mu(1, -alpha) is finite; alpha = 1 hits the pole of Gamma(0)
    assert math.isfinite(C.mu(1, -0.5))
    with pytest.raises(ValueError):
        C.mu(1, 1.0)


def test_omega_integer_dimensions():
    assert C.omega(1) == pytest.approx(2.0)
    assert C.omega(2) == pytest.approx(math.pi)
    assert C.omega(3) == pytest.approx(4 * math.pi / 3)


def test_frac_constants_bundle():
    fc = C.FracConstants(2, 0.4)
    assert fc.mu == C.mu(2, 0.4)
    assert fc.riesz_norm(1.0) == C.riesz_norm(2, 1.0)
    with pytest.raises(ValueError):
        C.riesz_norm(1, 1.0)
