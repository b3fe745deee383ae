import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracvar import analytics as an
from fracvar.examples1d import FAlphaParams, f_alpha_field
from fracvar.grid import UNKNOWN, CutoffSpec, Grid, GridField, MollifierSpec, SignedMeasure, mollify
from fracvar.ops import DIRECT, PERIODIC

from conftest import bump_values


# ---------------------------------------------------------------- norms

@pytest.mark.parametrize("p,q", [(2.0, 1.0), (1.5, 3.0), (3.0, math.inf)])
def test_lorentz_norm_of_indicator(p, q):
    # ||chi_E||_{p,q} = (p/q)^(1/q) |E|^(1/p)
    g = Grid(1, 4.0, 256)
    x = g.centers()
    chi = GridField(g, (np.abs(x) < 1.0).astype(float))
    exact = 2.0 ** (1 / p) * (1.0 if math.isinf(q) else (p / q) ** (1 / q))
    assert an.lorentz_norm(chi, p, q) == pytest.approx(exact, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.0, 5.0), min_size=1, max_size=20), st.floats(1.0, 4.0), st.floats(1.0, 3.0))
def test_lorentz_diagonal_and_nested(vals, p, q):
    # ||f||_{p,r} <= (q/p)^(1/q - 1/r) ||f||_{p,q} for q < r
    v = np.asarray(vals)
    w = np.full(v.shape, 0.25)
    obj = (v, w)
    assert an.lorentz_norm(obj, p, p) == pytest.approx(an.lp_norm(obj, p), rel=1e-9, abs=1e-12)
    base = an.lorentz_norm(obj, p, q)
    r = 2 * q
    assert an.lorentz_norm(obj, p, r) <= (q / p) ** (1 / q - 1 / r) * base * (1 + 1e-12) + 1e-12
    assert an.lorentz_norm(obj, p, math.inf) <= (q / p) ** (1 / q) * base * (1 + 1e-12) + 1e-12


def test_weak_norm_of_power_singularity_is_stable_while_strong_norm_grows():
    p = 2.0
    weak, strong = [], []
    for N in (1024, 4096, 16384):
        g = Grid(1, 1.0, N)
        x = g.centers()
        f = GridField(g, np.abs(x) ** (-1 / p), UNKNOWN)
        weak.append(an.lorentz_norm(f, p, math.inf))
        strong.append(an.lp_norm(f, p))
    assert max(weak) / min(weak) - 1 < 1e-2
    assert strong[2] ** p - strong[1] ** p == pytest.approx(strong[1] ** p - strong[0] ** p, rel=1e-2)
    assert strong[2] > strong[1] > strong[0]


def test_lorentz_rejects_bad_indices():
    with pytest.raises(ValueError):
        an.lorentz_norm((np.ones(2), np.ones(2)), 2.0, 0.5)
    with pytest.raises(ValueError):
        an.NormSpec(0.5)
    assert an.NormSpec(2.0)((np.array([3.0]), np.array([1.0]))) == pytest.approx(3.0)


def test_loglog_fit_recovers_power():
    r = np.array([1.0, 2.0, 4.0, 8.0])
    slope, ci, icpt = an.loglog_fit(r, 3.0 * r**0.37)
    assert slope == pytest.approx(0.37, abs=1e-12)
    assert ci == pytest.approx(0.0, abs=1e-9)
    assert math.exp(icpt) == pytest.approx(3.0)


def test_conjugate_exponents():
    assert an.conjugate(1) == math.inf
    assert an.conjugate(math.inf) == 1.0
    assert an.conjugate(2.0) == 2.0


# ---------------------------------------------------------------- variation

def test_variation_scales_with_dilation():
    # TV(f(./lam)) = lam^(n - alpha) TV(f)
    g = Grid(1, 16.0, 8192)
    x = g.centers()
    alpha = 0.4
    tv = [an.total_variation_smooth(GridField(g, bump_values(x, 0, w)), alpha) for w in (1.0, 2.0)]
    assert tv[1] / tv[0] == pytest.approx(2.0 ** (1 - alpha), rel=1e-2)


def test_dual_variation_is_a_lower_bound():
    g = Grid(1, 8.0, 1024)
    f = GridField(g, bump_values(g.centers(), 0, 1.0))
    tv = an.total_variation_smooth(f, 0.5)
    assert an.dual_variation(f, 0.5) <= tv * (1 + 1e-12)


def test_variation_on_ball_of_atoms():
    # the fractional derivative of f_alpha is delta_0 - delta_1
    mu = SignedMeasure.atoms([[0.0], [1.0]], [1.0, -1.0])
    masses = [an.variation_on_ball(mu, 0.5, 0.0, r) for r in (0.1, 0.2, 0.4, 0.8)]
    assert masses == [1.0] * 4
    fit = an.decay_fit(mu, 0.3, 2.0, 0.0, [0.1, 0.2, 0.4, 0.8])
    assert fit.slope == pytest.approx(0.0, abs=1e-12)
    # an atom carries no decay, below the target 1/2 - alpha
    assert fit.target == pytest.approx(0.2) and fit.violation


def test_decay_fit_rejects_bad_radii(gauss1d):
    with pytest.raises(ValueError):
        an.decay_fit(gauss1d, 0.5, 2.0, 0.0, [0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        an.decay_fit(gauss1d, 0.5, 2.0, 0.0, [1e-3, 2e-3, 4e-3, 8e-3])


def test_jump_variation_of_indicator():
    g = Grid(2, 4.0, 64)
    X, Y = g.mesh()
    sq = GridField(g, ((np.abs(X) < 1) & (np.abs(Y) < 1)).astype(float))
    # isotropic differences cut each corner: 8 - (2 - sqrt 2) h
    assert an.jump_variation(sq) == pytest.approx(8.0 - (2 - math.sqrt(2)) * g.h, rel=1e-12)
    g1 = Grid(1, 4.0, 64)
    chi = GridField(g1, (np.abs(g1.centers()) < 1).astype(float))
    assert an.jump_variation(chi) == pytest.approx(2.0)


# ---------------------------------------------------------------- inequalities

def test_gns_ratio_dilation_invariant():
    g = Grid(1, 16.0, 8192)
    x = g.centers()
    r = [an.gns_ratio(GridField(g, bump_values(x, 0, w)), 0.5) for w in (1.0, 2.0)]
    assert r[1] == pytest.approx(r[0], rel=1e-2)


def test_interpolation_constant_bounded():
    g = Grid(1, 8.0, 2048)
    x = g.centers()
    for w in (0.5, 1.0, 2.0):
        rec = an.interpolation_check(GridField(g, bump_values(x, 0, w)), 0.8, 0.4, 1.0)
        assert rec.passed and rec.lhs <= 10.0


def test_interpolation_exponent_and_range():
    # n = 1, q = 1: theta = beta / alpha
    assert an.interpolation_exponent(1, 0.8, 0.4, 1.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        an.interpolation_exponent(1, 0.4, 0.8, 1.0)
    with pytest.raises(ValueError):
        an.interpolation_exponent(1, 0.8, 0.4, 2.0)


def test_weak_exponent():
    assert an.weak_exponent(0.5, 1.0) == pytest.approx(1.0)
    assert an.weak_exponent(0.5, 2.0) == pytest.approx(4 / 3)


def test_weak_integrability_ratio_finite_for_step():
    g = Grid(1, 8.0, 2048)
    chi = GridField(g, (np.abs(g.centers()) < 1).astype(float))
    for p in (1.0, 2.0):
        rec = an.weak_integrability_check(chi, 0.3, p, t_min_cells=64)
        assert math.isfinite(rec.lhs) and rec.lhs > 0


# ---------------------------------------------------------------- integration by parts, lift, localisation

def test_ibp_on_balls_small_residual():
    g = Grid(1, 8.0, 1024)
    x = g.centers()
    f = GridField(g, bump_values(x, 0.2, 2.0))
    phi = GridField(g, bump_values(x, -0.3, 1.5)[None])
    t = an.ibp_terms(f, phi, 0.5, 0.1, 0.6)
    assert (2 * t["r"] / g.h) == pytest.approx(round(2 * t["r"] / g.h))
    assert an.ibp_on_balls_residual(f, phi, 0.5, 0.1, 0.6) <= 1e-2
    with pytest.raises(ValueError):
        an.ibp_terms(f, phi, 0.5, 0.0, g.h)


@pytest.mark.parametrize("alpha", [0.3, 0.6])
def test_riesz_lift_spectral_and_direct(alpha):
    g = Grid(1, 8.0, 1024)
    f = GridField(g, np.exp(-np.pi * g.centers() ** 2))
    assert an.riesz_lift_check(f, alpha, 1.0, PERIODIC).lhs <= 1e-10
    assert an.riesz_lift_check(f, alpha, 1.0, DIRECT).lhs <= 1e-2
    with pytest.raises(ValueError):
        an.riesz_lift_check(f, alpha, 5.0)


def test_riesz_lift_bound_dilation_invariant():
    g = Grid(1, 16.0, 8192)
    x = g.centers()
    r = [an.riesz_lift_bound(GridField(g, bump_values(x, 0, w)), 0.5, 1.5) for w in (0.5, 1.0, 2.0)]
    assert max(r) / min(r) - 1 <= 1e-3


@pytest.mark.parametrize("alpha", [0.3, 0.7])
def test_leibniz_localization(alpha):
    g = Grid(1, 8.0, 1024)
    f = GridField(g, bump_values(g.centers(), 0.4, 2.5))
    assert an.leibniz_localization_check(f, CutoffSpec(1.0), alpha) <= 1e-3


def test_nonlocal_gradient_bound_finite_over_radii():
    g = Grid(1, 16.0, 4096)
    f = GridField(g, bump_values(g.centers(), 0, 3.0))
    vals = [an.nonlocal_gradient_bound(f, CutoffSpec(R).field(g), 0.5, 2.0) for R in (0.5, 1.0, 2.0)]
    assert np.all(np.isfinite(vals)) and max(vals) < 10


# ---------------------------------------------------------------- precise representative

def test_precise_representative_at_jump_and_smooth_point():
    g = Grid(1, 4.0, 4096)
    x = g.centers()
    chi = GridField(g, (np.abs(x) < 1).astype(float))
    f = mollify(chi, MollifierSpec(4 * g.h))
    radii = 8 * g.h * 2.0 ** np.arange(4)
    pr = an.precise_representative(f, 1.0, radii)
    assert pr.exists and pr.value == pytest.approx(0.5, abs=1e-3)
    smooth = GridField(g, np.exp(-x**2), UNKNOWN)
    pr = an.precise_representative(smooth, 0.3, radii)
    assert pr.exists and pr.value == pytest.approx(math.exp(-0.09), abs=1e-3)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("pole", [0.0, 1.0])
def test_precise_representative_missing_at_pole(alpha, pole):
    g = Grid(1, 4.0, 4096)
    f = f_alpha_field(FAlphaParams(alpha), g)
    pr = an.precise_representative(f, pole, 8 * g.h * 2.0 ** np.arange(4))
    assert not pr.exists


def test_precise_representative_needs_radii(gauss1d):
    with pytest.raises(ValueError):
        an.precise_representative(gauss1d, 0.0, [1.0, 2.0])
