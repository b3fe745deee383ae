"""Fractional variation, Lorentz norms, decay fits and identity checks.

Norms of operator outputs are taken over the whole space: box cells carry
weight ``h^n`` and the complement of the box is covered by the quadrature
of :func:`fracvar.ops.exterior_nodes`, evaluated through the result's
exterior handle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import constants as C
from .grid import CutoffSpec, Grid, GridField, SignedMeasure, COMPACT
from .ops import (DIRECT, SPECTRAL, BackendSpec, OperatorResult, dcal_alpha, exterior_nodes,
                  frac_divergence, frac_gradient, maximal_function, nl_divergence, nl_gradient,
                  riesz_potential)
from .ops.backend import PERIODIC
from .ops import spectral as sp
from .reports import CheckRecord


# ---------------------------------------------------------------- samples and norms

@dataclass(frozen=True)
class NormSpec:
    """Exponent of an ``L^p`` or Lorentz ``L^{p,q}`` norm."""

    p: float
    lorentz_q: float | None = None

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError("p must be at least 1")
        if math.isinf(self.p) and self.lorentz_q is not None:
            raise ValueError("Lorentz index is meaningless for p = inf")
        if self.lorentz_q is not None and not self.lorentz_q >= 1:
            raise ValueError("Lorentz q must be at least 1")

    def __call__(self, obj) -> float:
        if self.lorentz_q is None:
            return lp_norm(obj, self.p)
        return lorentz_norm(obj, self.p, self.lorentz_q)


def samples(obj, exterior: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise magnitudes and quadrature weights covering the whole space.

    ``obj`` is a :class:`GridField` (taken as zero outside the box), an
    :class:`OperatorResult` (exterior evaluated when available) or a
    ``(values, weights)`` pair.
    """
    if isinstance(obj, tuple):
        v, w = obj
        return np.abs(np.asarray(v, dtype=float)).ravel(), np.asarray(w, dtype=float).ravel()
    if isinstance(obj, OperatorResult):
        f = obj.field
        v = f.norm().ravel()
        w = np.full(v.shape, f.grid.cell_volume)
        if exterior and obj.exterior is not None:
            pts, wts = exterior_nodes(f.grid)
            ev = obj.exterior.evaluate(pts)
            ev = np.abs(ev) if ev.ndim == 1 else np.sqrt(np.sum(ev * ev, axis=1))
            v = np.concatenate([v, ev])
            w = np.concatenate([w, wts])
        return v, w
    v = obj.norm().ravel()
    return v, np.full(v.shape, obj.grid.cell_volume)


def lp_norm(obj, p: float, exterior: bool = True) -> float:
    v, w = samples(obj, exterior)
    if math.isinf(p):
        return float(np.max(v)) if v.size else 0.0
    return float(np.sum(w * v**p) ** (1.0 / p))


def lorentz_norm(obj, p: float, q: float, exterior: bool = True, t_min: float = 0.0) -> float:
    """Lorentz norm from the decreasing rearrangement of weighted samples.

    ``(int_0^inf (t^(1/p) f*(t))^q dt/t)^(1/q)``, exact for the step function
    defined by the samples; ``q = inf`` gives ``sup_t t^(1/p) f*(t)``, with
    the supremum restricted to ``t >= t_min`` when that is given.
    """
    if not p > 0:
        raise ValueError("p must be positive")
    if not q >= 1:
        raise ValueError("q must be at least 1")
    v, w = samples(obj, exterior)
    order = np.argsort(-v, kind="stable")
    v, w = v[order], w[order]
    keep = v > 0
    v, w = v[keep], w[keep]
    if not v.size:
        return 0.0
    t = np.cumsum(w)
    if math.isinf(q):
        keep = t >= t_min
        if not keep.any():
            raise ValueError("t_min exceeds the total measure")
        return float(np.max(v[keep] * t[keep] ** (1.0 / p)))
    t0 = np.concatenate([[0.0], t[:-1]])
    e = q / p
    return float(np.sum(v**q * (p / q) * (t**e - t0**e)) ** (1.0 / q))


# ---------------------------------------------------------------- variation

def total_variation_smooth(f: GridField, alpha: float, b: BackendSpec = SPECTRAL,
                           grad: OperatorResult | None = None) -> float:
    """``||grad^alpha f||_{L^1}`` over the whole space."""
    if not np.any(f.values):
        return 0.0
    g = grad if grad is not None else frac_gradient(f, alpha, b)
    return lp_norm(g, 1.0)


def dual_variation(f: GridField, alpha: float, b: BackendSpec = SPECTRAL) -> float:
    """Pairing of ``f`` with ``div^alpha`` of the pointwise optimal test field.

    ``phi* = -grad^alpha f / |grad^alpha f|`` restricted to the box; the
    value is a lower bound for the variation.
    """
    gr = frac_gradient(f, alpha, b).values
    nrm = np.sqrt(np.sum(gr * gr, axis=0))
    phi = np.where(nrm > 0, -gr / np.where(nrm > 0, nrm, 1.0), 0.0)
    # the optimiser is not compactly supported; pair against it directly
    return float(-np.sum(phi * gr) * f.grid.cell_volume)


def ball_weights(grid: Grid, x, r: float) -> np.ndarray:
    """Fraction of each cell inside ``B_r(x)``: exact overlap in 1D, by centre in 2D."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = grid.h
    if grid.dim == 1:
        c = grid.centers()
        lo = np.maximum(c - h / 2, x[0] - r)
        hi = np.minimum(c + h / 2, x[0] + r)
        return np.clip(hi - lo, 0.0, None) / h
    X, Y = grid.mesh()
    return (((X - x[0]) ** 2 + (Y - x[1]) ** 2) <= r * r).astype(float)


def variation_on_ball(obj, alpha: float, x, r: float, b: BackendSpec = SPECTRAL,
                      grad: OperatorResult | None = None) -> float:
    """``|D^alpha f|(B_r(x))`` for a field, or ``|mu|(B_r(x))`` for a measure."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(obj, SignedMeasure):
        d = np.sqrt(np.sum((obj.locations - x[None]) ** 2, axis=1))
        w = obj.weights
        wn = np.abs(w) if w.ndim == 1 else np.sqrt(np.sum(w * w, axis=1))
        mass = float(np.sum(wn[d <= r]))
        if obj.density is not None:
            dg = obj.density.grid
            if r < 2 * dg.h:
                raise ValueError("ball radius below two cells")
            mass += float(np.sum(ball_weights(dg, x, r) * obj.density.norm()) * dg.cell_volume)
        return mass
    grid = obj.grid
    if r < 2 * grid.h:
        raise ValueError("ball radius below two cells")
    g = grad if grad is not None else frac_gradient(obj, alpha, b)
    return float(np.sum(ball_weights(grid, x, r) * g.field.norm()) * grid.cell_volume)


@dataclass
class DecayFit:
    """Log-log fit of ball masses against radius."""

    center: tuple
    radii: np.ndarray
    masses: np.ndarray
    slope: float
    slope_ci: float
    target: float
    empty: bool = False

    @property
    def violation(self) -> bool:
        """Fitted slope below the target by more than the confidence half-width."""
        return (not self.empty) and self.slope < self.target - self.slope_ci


def conjugate(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def loglog_fit(x, y) -> tuple[float, float, float]:
    """OLS slope, its 95% half-width and intercept of ``log y`` on ``log x``."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    res = stats.linregress(lx, ly)
    dof = len(lx) - 2
    ci = float(stats.t.ppf(0.975, dof) * res.stderr) if dof > 0 else math.inf
    return float(res.slope), ci, float(res.intercept)


def decay_fit(obj, alpha: float, p: float, x, radii, b: BackendSpec = SPECTRAL,
              grad: OperatorResult | None = None) -> DecayFit:
    """Fit ``log |D^alpha f|(B_r(x))`` against ``log r``; target is ``n/q - alpha``."""
    radii = np.sort(np.asarray(radii, dtype=float))
    if len(radii) < 4 or radii[-1] / radii[0] < 4.0 - 1e-12:
        raise ValueError("need at least 4 radii spanning two octaves")
    x = tuple(np.atleast_1d(np.asarray(x, dtype=float)))
    if isinstance(obj, SignedMeasure):
        n = obj.dim
    else:
        n = obj.grid.dim
        h, L = obj.grid.h, obj.grid.L
        if radii[0] < 4 * h - 1e-12 or radii[-1] > L / 4 + 1e-12:
            raise ValueError("radii must lie in [4h, L/4]")
        if grad is None:
            grad = frac_gradient(obj, alpha, b)
    q = conjugate(p)
    target = (0.0 if math.isinf(q) else n / q) - alpha
    masses = np.array([variation_on_ball(obj, alpha, x, r, b, grad) for r in radii])
    if not np.any(masses > 0):
        return DecayFit(x, radii, masses, math.nan, math.nan, target, empty=True)
    pos = masses > 0
    slope, ci, _ = loglog_fit(radii[pos], masses[pos])
    return DecayFit(x, radii, masses, slope, ci, target)


# ---------------------------------------------------------------- inequalities

def gns_ratio(f: GridField, alpha: float, b: BackendSpec = SPECTRAL) -> float:
    """``||f||_{L^{n/(n-alpha), r}} / |D^alpha f|``, weak-type numerator in 1D."""
    n = f.grid.dim
    tv = total_variation_smooth(f, alpha, b)
    if tv == 0:
        raise ValueError("zero variation")
    p = n / (n - alpha)
    num = lorentz_norm(f, p, math.inf) if n == 1 else lp_norm(f, p)
    return num / tv


def interpolation_exponent(n: int, alpha: float, beta: float, q: float) -> float:
    if not 0 < beta < alpha < 1:
        raise ValueError("need 0 < beta < alpha < 1")
    if not 1 <= q < n / (n + beta - alpha):
        raise ValueError("need 1 <= q < n/(n + beta - alpha)")
    return beta * q / (n - q * (n - alpha))


def interpolation_check(f: GridField, alpha: float, beta: float, q: float,
                        b: BackendSpec = SPECTRAL, bound: float = 10.0) -> CheckRecord:
    """``||grad^beta f||_q <= C ||f||_q^(1-theta) ||grad^alpha f||_1^theta``; reports C."""
    n = f.grid.dim
    theta = interpolation_exponent(n, alpha, beta, q)
    lhs = lp_norm(frac_gradient(f, beta, b), q)
    rhs = lp_norm(f, q) ** (1 - theta) * lp_norm(frac_gradient(f, alpha, b), 1.0) ** theta
    return CheckRecord("interpolation", lhs / rhs, bound, 0.0, "le",
                       {"alpha": alpha, "beta": beta, "q": q, "theta": theta},
                       {"lhs": lhs, "rhs": rhs})


def jump_variation(f: GridField) -> float:
    """``|Df|(R^n)`` from forward differences (jumps counted exactly on aligned grids)."""
    v = f.values
    g = f.grid
    tot = np.zeros(g.shape)
    for ax in range(g.dim):
        d = np.diff(np.pad(v, [(1, 1) if a == ax else (0, 0) for a in range(g.dim)]), axis=ax)
        sl = [slice(None)] * g.dim
        sl[ax] = slice(0, g.N)
        part = np.zeros(g.shape)
        part += d[tuple(sl)] ** 2
        tot = tot + part
    # one extra difference at the upper edge is zero for compact fields
    return float(np.sum(np.sqrt(tot)) * g.h ** (g.dim - 1))


def weak_exponent(alpha: float, p: float) -> float:
    return p / (1.0 - alpha + alpha * p)


def weak_integrability_check(f: GridField, alpha: float, p: float, b: BackendSpec = DIRECT,
                             bound: float = math.inf, t_min_cells: float = 0.0) -> CheckRecord:
    """Ratio ``||dcal f||_{L^{p_alpha,inf}} / (||f||_p^(1-alpha) |Df|^alpha)``.

    For ``p = 1`` the strong form with the ``L^1`` norm is used.

    Next to a jump ``dcal f ~ |x - x0|^-alpha`` and the centre samples of
    the adjacent cells overstate the rearrangement at measure levels of a
    few cells, a bias that fades only like ``h^(1/p_alpha - alpha)``.  The
    continuum ``t^(1/p_alpha) f*(t)`` increases near ``t = 0``, so
    ``t_min_cells`` (in cell volumes) can exclude those levels without
    missing the supremum.
    """
    d = dcal_alpha(f, alpha, b)
    pa = weak_exponent(alpha, p)
    t_min = t_min_cells * f.grid.cell_volume
    lhs = lp_norm(d, 1.0) if p == 1 else lorentz_norm(d, pa, math.inf, t_min=t_min)
    rhs = lp_norm(f, p) ** (1 - alpha) * jump_variation(f) ** alpha
    return CheckRecord("weak-integrability", lhs / rhs, bound, 0.0, "le",
                       {"alpha": alpha, "p": p, "p_alpha": pa}, {"lhs": lhs, "rhs": rhs})


def maximal_bound_ratio(f: GridField, alpha: float, b: BackendSpec = DIRECT) -> float:
    """Largest cellwise ``dcal f / ((Mf)^(1-alpha) (M|grad f|)^alpha)``."""
    d = dcal_alpha(f, alpha, b).values
    mf = maximal_function(f).values
    gr = np.stack(np.gradient(f.values, f.grid.h)) if f.grid.dim > 1 else np.gradient(f.values, f.grid.h)[None]
    mg = maximal_function(GridField(f.grid, np.sqrt(np.sum(gr * gr, axis=0)), COMPACT
                                    if f.decay.kind == "compact_support" else f.decay)).values
    den = mf ** (1 - alpha) * mg**alpha
    ok = den > 1e-12 * max(den.max(), 1e-300)
    return float(np.max(d[ok] / den[ok]))


# ---------------------------------------------------------------- integration by parts on balls

def _power_cell_integrals(edges: np.ndarray, c: float, alpha: float) -> np.ndarray:
    """``int |y - c|^-alpha dy`` over consecutive cells given by ``edges``."""
    F = np.sign(edges - c) * np.abs(edges - c) ** (1.0 - alpha) / (1.0 - alpha)
    return np.diff(F)


def indicator_gradient_cells(grid: Grid, alpha: float, x0: float, r: float) -> np.ndarray:
    """Cell averages of the closed-form fractional gradient of ``chi_(x0-r, x0+r)``."""
    edges = grid.lower() + grid.h * np.arange(grid.N + 1)
    m = C.mu(1, alpha) / alpha
    return m * (_power_cell_integrals(edges, x0 - r, alpha) - _power_cell_integrals(edges, x0 + r, alpha)) / grid.h


def snap_to_faces(grid: Grid, x: float, r: float) -> tuple[float, float]:
    """Move the ball so that both endpoints fall on cell faces."""
    h, lo = grid.h, grid.lower()
    a = lo + round((x - r - lo) / h) * h
    bnd = lo + round((x + r - lo) / h) * h
    if bnd - a < 2 * h:
        raise ValueError("ball too small for the grid")
    return 0.5 * (a + bnd), 0.5 * (bnd - a)


def ibp_terms(f: GridField, phi: GridField, alpha: float, x: float, r: float,
              b: BackendSpec = DIRECT) -> dict:
    """The four terms of integration by parts on ``B_r(x)`` (1D).

    The ball is snapped to cell faces first.  Returns a dict with
    ``ball`` (``int_B f div phi``), ``indicator`` (``int f phi grad chi_B``),
    ``nonlocal`` (``int f div_NL(chi_B, phi)``), ``measure``
    (``-int_B phi dD^alpha f``) and the snapped ``x, r``.
    """
    g = f.grid
    if g.dim != 1:
        raise ValueError("integration by parts on balls is implemented in 1D")
    if r < 2 * g.h:
        raise ValueError("ball radius below two cells")
    x, r = snap_to_faces(g, x, r)
    h = g.h
    c = g.centers()
    chi = ((c > x - r) & (c < x + r)).astype(float)
    div = frac_divergence(phi, alpha, b).values
    grad = frac_gradient(f, alpha, b).values[0]
    t1 = float(np.sum(chi * f.values * div) * h)
    t2 = float(np.sum(f.values * phi.values[0] * indicator_gradient_cells(g, alpha, x, r)) * h)
    nl = nl_divergence(GridField(g, chi, _compactness(chi)), phi, alpha, b).values
    t3 = float(np.sum(f.values * nl) * h)
    t4 = -float(np.sum(chi * phi.values[0] * grad) * h)
    return {"ball": t1, "indicator": t2, "nonlocal": t3, "measure": t4, "x": x, "r": r}


def _compactness(v: np.ndarray):
    from .grid import UNKNOWN
    return COMPACT if np.all(v[:2] == 0) and np.all(v[-2:] == 0) else UNKNOWN


def ibp_on_balls_residual(f: GridField, phi: GridField, alpha: float, x: float, r: float,
                          b: BackendSpec = DIRECT) -> float:
    """``|T1 + T2 + T3 - T4|`` normalised by the largest of the four terms."""
    t = ibp_terms(f, phi, alpha, x, r, b)
    vals = [t["ball"], t["indicator"], t["nonlocal"], t["measure"]]
    scale = max(abs(v) for v in vals)
    if scale == 0:
        return 0.0
    return abs(t["ball"] + t["indicator"] + t["nonlocal"] - t["measure"]) / scale


# ---------------------------------------------------------------- Riesz lift

def _spectral_gradient(u: np.ndarray, grid: Grid, b: BackendSpec) -> np.ndarray:
    P = sp.transform_length(grid, b)

    def sym(xi):
        ny = sp.nyquist_mask(grid, P)
        out = []
        for x_ in xi:
            s = 2j * np.pi * x_
            s = np.where(ny, 0.0, s)
            out.append(s)
        return np.stack(out)[:, None]

    out, _ = sp.apply_symbols(u[None], grid, b, sym)
    return out


def riesz_lift_check(f: GridField, alpha: float, p: float, b: BackendSpec = PERIODIC) -> CheckRecord:
    """Relative ``L^1`` distance between ``grad I_(1-alpha) f`` and ``grad^alpha f``.

    Spectral: both sides are multipliers on the periodic box (no padding,
    so nothing is cropped between the two factors) and the identity is
    exact up to rounding.
    Direct: ``I_(1-alpha) f`` by product quadrature, its gradient by
    central differences, compared on the interior of the box.
    """
    n = f.grid.dim
    if not 1 <= p < n / (1 - alpha):
        raise ValueError("need 1 <= p < n/(1 - alpha)")
    g = f.grid
    if b.kind == "spectral":
        bb = BackendSpec("spectral", periodic=True, image_correction=False)
        u = riesz_potential(f, 1 - alpha, bb).values
        du = _spectral_gradient(u, g, bb)
        ga = frac_gradient(f, alpha, bb).values
        inner = (slice(None),) * (n + 1)
    else:
        u = riesz_potential(f, 1 - alpha, b).values
        du = np.stack(np.gradient(u, g.h)) if n > 1 else np.gradient(u, g.h)[None]
        ga = frac_gradient(f, alpha, b).values
        inner = (slice(None),) + (slice(2, -2),) * n
    num = float(np.sum(np.sqrt(np.sum((du - ga) ** 2, axis=0))[inner[1:]]))
    den = float(np.sum(np.sqrt(np.sum(ga * ga, axis=0))[inner[1:]]))
    return CheckRecord("riesz-lift", num / den, 0.0, 0.0, "le", {"alpha": alpha, "p": p, "backend": b.kind})


def riesz_lift_bound(f: GridField, alpha: float, p: float, b: BackendSpec = DIRECT) -> float:
    """``||I_(1-alpha) f||_q / ||f||_p`` with ``q = np/(n - (1-alpha)p)``."""
    n = f.grid.dim
    if not 1 < p < n / (1 - alpha):
        raise ValueError("need 1 < p < n/(1 - alpha)")
    q = n * p / (n - (1 - alpha) * p)
    return lp_norm(riesz_potential(f, 1 - alpha, b), q) / lp_norm(f, p)


# ---------------------------------------------------------------- precise representative

@dataclass
class PreciseRep:
    value: float
    exists: bool
    averages: np.ndarray
    oscillation: np.ndarray
    oscillation_slope: float
    q_sweep: dict = field(default_factory=dict)


def ball_average(f: GridField, x, r: float, power: float | None = None, center: float = 0.0) -> float:
    """``avg_{B_r(x)} f``, or ``avg |f - center|^power`` when ``power`` is given."""
    w = ball_weights(f.grid, x, r)
    v = f.values if power is None else np.abs(f.values - center) ** power
    return float(np.sum(w * v) / np.sum(w))


def precise_representative(f: GridField, x, radii, beta: float | None = None,
                           q: float | None = None, osc_slope_tol: float = -0.1) -> PreciseRep:
    """Limit of ball averages at ``x`` with an existence flag.

    The two smallest radii give a linear Richardson extrapolation.  The
    limit is declared to exist when the averages settle (the last step is
    no more than 10 times the extrapolation step, or below 1e-12) and the
    mean oscillation ``avg |f - a_r|`` does not grow as ``r`` decreases
    (log-log slope above ``osc_slope_tol``).
    """
    radii = np.sort(np.asarray(radii, dtype=float))[::-1]
    h = f.grid.h
    if len(radii) < 4 or radii[-1] < 4 * h - 1e-12:
        raise ValueError("need at least 4 radii, the smallest at least 4h")
    a = np.array([ball_average(f, x, r) for r in radii])
    r1, r2 = radii[-1], radii[-2]
    a1, a2 = a[-1], a[-2]
    value = (r2 * a1 - r1 * a2) / (r2 - r1)
    step = abs(value - a1)
    diffs = np.abs(np.diff(a))
    settled = diffs[-1] <= max(10.0 * step, 1e-12) and diffs[-1] <= diffs[0] + 1e-12
    osc = np.array([ball_average(f, x, r, 1.0, ak) for r, ak in zip(radii, a)])
    if np.all(osc > 0):
        slope, _, _ = loglog_fit(radii, osc)
    else:
        slope = math.inf
    exists = bool(settled and slope > osc_slope_tol)
    sweep = {}
    if beta is not None and q is not None:
        n = f.grid.dim
        tmax = n * q / (n - beta * q)
        for t in np.linspace(1.0, tmax, 4):
            sweep[float(t)] = ball_average(f, x, r1, float(t), value)
    return PreciseRep(float(value), exists, a, osc, float(slope), sweep)


# ---------------------------------------------------------------- localization

def leibniz_terms(f: GridField, eta: GridField, alpha: float, b: BackendSpec = DIRECT) -> dict:
    """Both sides of the product rule for ``grad^alpha (f eta)``.

    ``eta`` may be nonzero up to the rim if its rim value is constant; the
    constant is removed before differentiating (it has zero gradient).
    """
    from .ops.operators import _edge_value
    g = f.grid
    e = _edge_value(eta.values)
    if e is None:
        raise ValueError("cutoff must be constant on the rim of the box")
    et = GridField(g, eta.values - e, COMPACT)
    lhs = frac_gradient(GridField(g, f.values * eta.values, f.decay), alpha, b).values
    t1 = eta.values[None] * frac_gradient(f, alpha, b).values
    t2 = f.values[None] * frac_gradient(et, alpha, b).values
    t3 = nl_gradient(f, eta, alpha, b).values
    return {"lhs": lhs, "eta_grad_f": t1, "f_grad_eta": t2, "nonlocal": t3}


def leibniz_localization_check(f: GridField, cutoff: CutoffSpec | GridField, alpha: float,
                               b: BackendSpec = DIRECT) -> float:
    """Relative ``L^1`` residual of the product rule on the box."""
    eta = cutoff if isinstance(cutoff, GridField) else cutoff.field(f.grid)
    t = leibniz_terms(f, eta, alpha, b)
    res = t["lhs"] - t["eta_grad_f"] - t["f_grad_eta"] - t["nonlocal"]
    num = float(np.sum(np.sqrt(np.sum(res * res, axis=0))))
    den = float(np.sum(np.sqrt(np.sum(t["lhs"] ** 2, axis=0))))
    return num / den if den > 0 else num


def nonlocal_gradient_bound(f: GridField, eta: GridField, alpha: float, p: float,
                            b: BackendSpec = DIRECT) -> float:
    """``||grad_NL(f, eta)||_1 / (||f||_p ||eta||_{W^{1,p'}})``."""
    g = f.grid
    nl = nl_gradient(f, eta, alpha, b)
    pc = conjugate(p)
    gr = np.stack(np.gradient(eta.values, g.h)) if g.dim > 1 else np.gradient(eta.values, g.h)[None]
    gn = np.sqrt(np.sum(gr * gr, axis=0))
    if math.isinf(pc):
        w = float(np.max(np.abs(eta.values)) + np.max(gn))
    else:
        w = float((np.sum(np.abs(eta.values) ** pc) * g.cell_volume) ** (1 / pc)
                  + (np.sum(gn**pc) * g.cell_volume) ** (1 / pc))
    return lp_norm(nl, 1.0) / (lp_norm(f, p) * w)
