import math

import numpy as np
import pytest
from scipy import integrate

from fracvar import constants as C
from fracvar import examples1d as ex
from fracvar.grid import Grid, GridField, SignedMeasure

from conftest import bump_values


# ---------------------------------------------------------------- f_alpha

@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_f_alpha_even_about_half(alpha):
    # the two odd power terms swap under x -> 1 - x, so f_alpha is even about 1/2
    # and its derivative delta_0 - delta_1 is odd
    p = ex.FAlphaParams(alpha)
    t = np.array([0.1, 0.37, 2.0, 7.5])
    assert np.allclose(ex.f_alpha_eval(p, 0.5 + t), ex.f_alpha_eval(p, 0.5 - t), rtol=1e-13)


def test_f_alpha_poles_and_parameters():
    p = ex.FAlphaParams(0.5)
    assert np.all(np.isinf(ex.f_alpha_eval(p, [0.0, 1.0])))
    with pytest.raises(ValueError):
        ex.FAlphaParams(1.0)
    assert p.c == C.mu(1, -0.5)


@pytest.mark.parametrize("alpha", [0.3, 0.7])
def test_f_alpha_cell_averages_match_quadrature(alpha):
    p = ex.FAlphaParams(alpha)
    g = Grid(1, 4.0, 256)
    f = ex.f_alpha_field(p, g).values
    edges = ex.cell_edges(g)
    for i in (10, 127, 128, 130, 160, 200):
        a, b = edges[i], edges[i + 1]
        val = integrate.quad(lambda s: float(ex.f_alpha_eval(p, s)), a, b, points=[x for x in (0.0, 1.0) if a < x < b])[0]
        assert f[i] == pytest.approx(val / g.h, rel=1e-8)
    # cells holding a pole stay finite
    assert np.all(np.isfinite(f))


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_f_alpha_pairing(alpha):
    g = Grid(1, 4.0, 4096)
    x = g.centers()
    phi = GridField(g, (bump_values(x, 0.3, 1.5) * (1 + x))[None])
    assert ex.f_alpha_pairing_residual(ex.FAlphaParams(alpha), phi) <= 1e-2


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_f_alpha_integrability_threshold(alpha):
    rows = ex.integrability_scan(ex.f_alpha_sampler(alpha), [1, 2, 4, 8], range(4))
    lo, hi = ex.threshold_bracket(rows)
    assert lo < 1 / (1 - alpha) <= hi


# ---------------------------------------------------------------- indicator gradient

def indicator_gradient_quad(alpha, r, y):
    """mu int_0^inf (chi(y + z) - chi(y - z)) z^(-1-alpha) dz for chi = 1 on (-r, r)."""
    f = lambda z: (float(abs(y + z) < r) - float(abs(y - z) < r)) * z ** (-1 - alpha)
    pts = sorted({abs(r - y), abs(r + y)})
    v = sum(integrate.quad(f, a, b, limit=200)[0] for a, b in zip([0] + pts, pts)) + \
        integrate.quad(f, pts[-1], np.inf)[0]
    return C.mu(1, alpha) * v


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("y", [-1.7, -0.3, 0.45, 2.5])
def test_grad_indicator_closed_form(alpha, y):
    assert ex.grad_indicator_1d(alpha, 0.0, 1.0, y) == pytest.approx(indicator_gradient_quad(alpha, 1.0, y), rel=1e-7)


def test_grad_indicator_centre_and_poles():
    assert ex.grad_indicator_1d(0.4, 0.5, 1.0, 0.5) == 0.0
    with pytest.raises(ValueError):
        ex.grad_indicator_1d(0.4, 0.5, 1.0, 1.5)


def test_grad_indicator_norm_exponent():
    radii = [0.25, 0.5, 1.0, 2.0]
    for alpha in (0.3, 0.6):
        slope = np.polyfit(np.log(radii), np.log([ex.indicator_gradient_l1(alpha, r) for r in radii]), 1)[0]
        assert slope == pytest.approx(1 - alpha, abs=1e-6)


# ---------------------------------------------------------------- Cantor measures

def test_cantor_level_one():
    mu = ex.cantor_measure(ex.CantorMeasureSpec(1))
    assert np.allclose(mu.locations[:, 0], [1 / 6, 5 / 6])
    assert np.allclose(mu.weights, [0.5, 0.5])


@pytest.mark.parametrize("level", [1, 5, 10])
def test_cantor_total_mass(level):
    mu = ex.cantor_measure(ex.CantorMeasureSpec(level, scale=2.0, offset=-1.0))
    assert len(mu.weights) == 2**level
    assert mu.total_mass == 1.0
    assert mu.locations.min() > -1.0 and mu.locations.max() < 1.0


def test_cantor_spec_limits():
    for bad in (dict(level=0), dict(level=21), dict(level=3, scale=0.0)):
        with pytest.raises(ValueError):
            ex.CantorMeasureSpec(**bad)


def test_cantor_growth_constant_and_slope():
    gr = ex.cantor_growth(ex.CantorMeasureSpec(8))
    assert gr["constant"] <= 4.0
    assert gr["slope"] == pytest.approx(math.log(2) / math.log(3), abs=0.05)


def test_ball_mass_exhaustive_sweep():
    mu = ex.cantor_measure(ex.CantorMeasureSpec(7))
    eps = ex.EPS_CANTOR
    worst = 0.0
    for k in range(1, 7):
        r = 2.0**-k
        for x in np.linspace(0, 1, 129):
            worst = max(worst, ex.ball_mass(mu, x, r) / r**eps)
    assert worst <= 4.0


# ---------------------------------------------------------------- u_alpha

def test_u_alpha_with_dirac_is_f_alpha():
    delta = SignedMeasure.atoms([[0.0]], [1.0])
    x = np.array([-2.0, 0.3, 0.7, 3.1])
    p = ex.FAlphaParams(0.4)
    assert np.allclose(ex.u_alpha_eval(0.4, delta, x), ex.f_alpha_eval(p, x), rtol=1e-14)
    g = Grid(1, 4.0, 128)
    assert np.allclose(ex.u_alpha_cell_averages(0.4, delta, g), ex.f_alpha_field(p, g).values, rtol=1e-12)


def test_u_alpha_linear_in_measure():
    a = ex.cantor_measure(ex.CantorMeasureSpec(3))
    b = SignedMeasure.atoms([[0.25], [-0.4]], [0.7, -1.2])
    both = SignedMeasure(np.concatenate([a.locations, b.locations]), np.concatenate([2 * a.weights, -3 * b.weights]))
    x = np.linspace(-2.05, 3.05, 41)
    lhs = ex.u_alpha_eval(0.3, both, x)
    rhs = 2 * ex.u_alpha_eval(0.3, a, x) - 3 * ex.u_alpha_eval(0.3, b, x)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("alpha", [0.2, 0.5])
def test_u_alpha_pairing(alpha):
    g = Grid(1, 4.0, 4096)
    x = g.centers()
    nu = ex.cantor_measure(ex.CantorMeasureSpec(8))
    phi = GridField(g, (bump_values(x, 0.8, 2.0) * (1 + x))[None])
    assert ex.u_alpha_pairing_residual(alpha, nu, phi) <= 1e-2


def test_u_alpha_integrability_alpha_small():
    # threshold (1 - eps)/(1 - alpha - eps) ~ 2.18 for alpha = 0.2
    rows = {r["p"]: r for r in ex.integrability_scan(ex.u_alpha_sampler(0.2), [2, 3, 4], range(4, 8))}
    assert rows[2]["class"] == "finite"
    assert rows[3]["slope"] > ex.FINITE_SLOPE
    assert rows[4]["class"] == "divergent"


def test_u_alpha_bounded_for_large_alpha():
    rows = ex.integrability_scan(ex.u_alpha_sampler(0.5), [1, 2, 4, 8, math.inf], range(4, 8))
    assert all(r["class"] == "finite" for r in rows)


# ---------------------------------------------------------------- classification

@pytest.mark.parametrize("slope,cls", [(0.0, "finite"), (0.05, "finite"), (0.1, "indeterminate"),
                                       (0.2, "divergent"), (1.3, "divergent")])
def test_classify_slope(slope, cls):
    assert ex.classify_slope(slope) == cls


def test_zero_field_finite_everywhere():
    rows = ex.integrability_scan(lambda l: (np.zeros(2**l), 2.0**-l), [1, 2, math.inf], range(3, 6))
    assert all(r["class"] == "finite" for r in rows)
    assert ex.threshold_bracket(rows) == (math.inf, math.inf)


def test_threshold_bracket_ignores_indeterminate():
    rows = [{"p": 1, "class": "finite"}, {"p": 2, "class": "indeterminate"}, {"p": 4, "class": "divergent"}]
    assert ex.threshold_bracket(rows) == (1, 4)


def test_example_table_outputs():
    g = Grid(1, 4.0, 512)
    x, v, verdict = ex.example_table("grad-indicator", 0.4, g)
    assert len(x) == len(v) == 512
    assert verdict["fitted_exponent"] == pytest.approx(0.6, abs=1e-6)
    with pytest.raises(ValueError):
        ex.example_table("nothing", 0.4, g)
