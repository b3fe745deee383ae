import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracvar.grid import (COMPACT, UNKNOWN, CutoffSpec, Grid, GridField, MollifierSpec, SignedMeasure,
                          mollify, pair, pair_measure, power_tail, read_field, translate_measure,
                          write_field, write_field_csv)
from fracvar.examples1d import CantorMeasureSpec, cantor_measure

from conftest import bump_values


def test_grid_geometry():
    g = Grid(1, 4.0, 64)
    assert g.h == pytest.approx(0.125)
    assert g.centers()[0] == pytest.approx(-4 + 0.0625)
    g2 = Grid(2, 1.0, 8, (1.0, -1.0))
    assert g2.shape == (8, 8)
    assert g2.contains(np.array([[1.5, -0.5]]))[0]
    assert not g2.contains(np.array([[2.5, 0.0]]))[0]
    assert g.refined().h == pytest.approx(g.h / 2)


@pytest.mark.parametrize("kw", [dict(dim=3, L=1, N=8), dict(dim=1, L=1, N=12), dict(dim=1, L=1, N=4),
                                dict(dim=1, L=0, N=8)])
def test_grid_rejects_bad_parameters(kw):
    with pytest.raises(ValueError):
        Grid(**kw)


def test_fields_are_immutable():
    g = Grid(1, 1.0, 16)
    f = GridField(g, np.zeros(16))
    with pytest.raises(ValueError):
        f.values[0] = 1.0


def test_compact_field_must_vanish_on_rim():
    g = Grid(1, 1.0, 16)
    with pytest.raises(ValueError):
        GridField(g, np.ones(16), COMPACT)
    GridField(g, np.ones(16), UNKNOWN)
    with pytest.raises(ValueError):
        power_tail(-1.0)


def test_pair_of_gaussians():
    # int exp(-2 pi x^2) dx = 2^-1/2
    g = Grid(1, 8.0, 1024)
    x = g.centers()
    f = GridField(g, np.exp(-np.pi * x**2))
    assert pair(f, f) == pytest.approx(2**-0.5, abs=1e-6)


def test_pair_measure_cantor_matches_direct_sum():
    g = Grid(1, 2.0, 4096)
    x = g.centers()
    phi = GridField(g, bump_values(x, 0.4, 1.2))
    nu = cantor_measure(CantorMeasureSpec(6))
    direct = np.sum(2.0**-6 * bump_values(nu.locations[:, 0], 0.4, 1.2))
    # linear interpolation error is O(h^2 |phi''|)
    assert pair_measure(phi, nu) == pytest.approx(direct, abs=1e-5)
    assert nu.total_mass == pytest.approx(1.0, abs=1e-15)


def test_translate_measure_moves_atoms():
    mu = SignedMeasure.atoms([[0.0], [1.0]], [1.0, -1.0])
    t = translate_measure(mu, 0.5)
    assert np.allclose(t.locations[:, 0], [0.5, 1.5])
    assert t.total_variation == 2.0
    with pytest.raises(ValueError):
        translate_measure(mu, 5.0, Grid(1, 1.0, 16))


def test_mollifier_keeps_mass_and_converges():
    for N in (512, 1024, 2048):
        g = Grid(1, 4.0, N)
        x = g.centers()
        chi = GridField(g, (np.abs(x) < 1).astype(float))
        m = mollify(chi, MollifierSpec(0.125))
        assert np.sum(m.values) == pytest.approx(np.sum(chi.values), rel=1e-12)
    # L1 distance to the indicator shrinks at least linearly in epsilon
    d = []
    for eps in (0.2, 0.1, 0.05):
        g = Grid(1, 4.0, 4096)
        x = g.centers()
        chi = GridField(g, (np.abs(x) < 1).astype(float))
        d.append(np.sum(np.abs(mollify(chi, MollifierSpec(eps)).values - chi.values)) * g.h)
    orders = np.log2(np.array(d[:-1]) / np.array(d[1:]))
    assert np.all(orders >= 0.95)


def test_mollifier_radius_below_two_cells_rejected():
    g = Grid(1, 1.0, 16)
    with pytest.raises(ValueError):
        mollify(GridField(g, np.zeros(16)), MollifierSpec(0.1))


def test_cutoff_plateau_and_scaling():
    g = Grid(1, 8.0, 1024)
    c = CutoffSpec(1.0)
    eta = c.field(g).values
    x = g.centers()
    assert np.all(eta[np.abs(x) <= 1] == 1.0)
    assert np.all(eta[np.abs(x) >= 2] == 0.0)
    assert c.lipschitz == pytest.approx(2.0)
    # eta_R(x) = eta_1(x / R)
    e2 = CutoffSpec(2.0).profile(np.abs(x))
    assert np.allclose(e2, c.profile(np.abs(x) / 2))
    with pytest.raises(ValueError):
        CutoffSpec(1.0, "radial_ramp")


def test_binary_roundtrip(tmp_path):
    g = Grid(2, 3.0, 16)
    X, Y = g.mesh()
    f = GridField(g, np.sin(X) * Y, UNKNOWN)
    write_field(tmp_path / "f.bin", f)
    back = read_field(tmp_path / "f.bin")
    assert back.grid == g
    assert np.array_equal(back.values, f.values)
    write_field_csv(tmp_path / "f.csv", f)
    assert (tmp_path / "f.csv").read_text().splitlines()[0] == "x,y,value"


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=2, max_size=6),
       st.lists(st.floats(-1, 1), min_size=2, max_size=6))
def test_pair_is_symmetric_and_bilinear(a, b):
    g = Grid(1, 2.0, 64)
    x = g.centers()
    f = GridField(g, sum(c * np.cos(k * x) for k, c in enumerate(a)), UNKNOWN)
    h = GridField(g, sum(c * np.sin(k * x) for k, c in enumerate(b)), UNKNOWN)
    assert pair(f, h) == pytest.approx(pair(h, f), abs=1e-12)
    assert pair(2.0 * f, h) == pytest.approx(2.0 * pair(f, h), abs=1e-12)
