"""Closed-form one-dimensional examples.

* ``f_alpha = c (|x|^(alpha-1) sgn x - |x-1|^(alpha-1) sgn(x-1))`` with
  ``c = mu(1, -alpha)``, whose fractional derivative is ``delta_0 - delta_1``;
* the fractional gradient of an interval indicator;
* middle-thirds Cantor measures and ``u_alpha = f_alpha * nu``;
* refinement scans that classify ``L^p`` integrability.

Grid samples are exact cell averages obtained from the elementary
primitive ``c (|x|^alpha - |x-1|^alpha) / alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import constants as C
from .analytics import indicator_gradient_cells, loglog_fit
from .grid import Grid, GridField, SignedMeasure, pair_measure, power_tail, translate_measure
from .ops import DIRECT, BackendSpec, exterior_nodes, frac_divergence

POLE = math.inf
EPS_CANTOR = math.log(2.0) / math.log(3.0)


# ---------------------------------------------------------------- f_alpha

@dataclass(frozen=True)
class FAlphaParams:
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")

    @property
    def c(self) -> float:
        return C.mu(1, -self.alpha)


def _spow(x, e):
    return np.sign(x) * np.abs(x) ** e


def f_alpha_eval(params: FAlphaParams, x) -> np.ndarray:
    """Closed form; the poles 0 and 1 return ``POLE`` (``inf``)."""
    x = np.asarray(x, dtype=float)
    a = params.alpha
    with np.errstate(divide="ignore", invalid="ignore"):
        v = params.c * (_spow(x, a - 1.0) - _spow(x - 1.0, a - 1.0))
    return np.where((x == 0) | (x == 1), POLE, v)


def f_alpha_primitive(params: FAlphaParams, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    a = params.alpha
    return params.c * (np.abs(x) ** a - np.abs(x - 1.0) ** a) / a


def cell_edges(grid: Grid) -> np.ndarray:
    return grid.lower() + grid.h * np.arange(grid.N + 1)


def f_alpha_field(params: FAlphaParams, grid: Grid) -> GridField:
    """Exact cell averages of ``f_alpha``; decays like ``|x|^(alpha-2)``."""
    F = f_alpha_primitive(params, cell_edges(grid))
    return GridField(grid, np.diff(F) / grid.h, power_tail(2.0 - params.alpha))


def _exterior_pairing(u_eval, div_result) -> float:
    """``int_{outside box} u * div`` with the exterior quadrature."""
    pts, wts = exterior_nodes(div_result.grid)
    return float(np.sum(wts * u_eval(pts[:, 0]) * div_result.exterior.evaluate(pts)))


def weak_pairing_residual(u_field: GridField, u_eval, phi: GridField, measure: SignedMeasure,
                          alpha: float, b: BackendSpec = DIRECT) -> dict:
    """``|int u div^alpha phi + int phi d(measure)| / ||phi||_inf``.

    ``measure`` is the claimed fractional derivative of ``u``; the pairing
    covers the whole line (box by cell sums, outside by quadrature).
    """
    div = frac_divergence(phi, alpha, b)
    box = float(np.sum(u_field.values * div.values) * u_field.grid.h)
    ext = _exterior_pairing(u_eval, div)
    lhs = box + ext
    rhs = -pair_measure(GridField(phi.grid, phi.values[0], phi.decay), measure)
    scale = float(np.max(np.abs(phi.values)))
    return {"pairing": lhs, "expected": rhs, "residual": abs(lhs - rhs) / scale}


def f_alpha_pairing_residual(params: FAlphaParams, phi: GridField, b: BackendSpec = DIRECT) -> float:
    g = phi.grid
    u = f_alpha_field(params, g)
    mu = SignedMeasure.atoms([[0.0], [1.0]], [1.0, -1.0])
    return weak_pairing_residual(u, lambda x: f_alpha_eval(params, x), phi, mu, params.alpha, b)["residual"]


# ---------------------------------------------------------------- interval indicator

def grad_indicator_1d(alpha: float, x0: float, r: float, y) -> np.ndarray:
    """``mu(1, alpha)/alpha (|y - x0 + r|^-alpha - |y - x0 - r|^-alpha)``."""
    y = np.asarray(y, dtype=float)
    if np.any((y == x0 - r) | (y == x0 + r)):
        raise ValueError("evaluation at an endpoint of the interval")
    m = C.mu(1, alpha) / alpha
    return m * (np.abs(y - x0 + r) ** -alpha - np.abs(y - x0 - r) ** -alpha)


def indicator_gradient_l1(alpha: float, r: float) -> float:
    """``L^1(R)`` norm of the closed form by adaptive quadrature (odd, so twice the half line)."""
    g = lambda y: abs(float(grad_indicator_1d(alpha, 0.0, r, y)))
    near = integrate.quad(g, 0.0, r, limit=200)[0]
    far = integrate.quad(g, r, 2 * r, limit=200)[0] + integrate.quad(g, 2 * r, np.inf, limit=200)[0]
    return 2.0 * (near + far)


# ---------------------------------------------------------------- Cantor measures

@dataclass(frozen=True)
class CantorMeasureSpec:
    """Level-``level`` middle-thirds measure on ``[offset, offset + scale]``."""

    level: int
    scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if not 1 <= self.level <= 20:
            raise ValueError("level must lie in 1..20")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def epsilon(self) -> float:
        return EPS_CANTOR


def cantor_midpoints(level: int) -> np.ndarray:
    """Midpoints of the ``2^level`` surviving intervals of ``[0, 1]``."""
    left = np.zeros(1)
    for k in range(1, level + 1):
        left = np.concatenate([left, left + 2.0 * 3.0**-k])
    return np.sort(left) + 0.5 * 3.0**-level


def cantor_measure(spec: CantorMeasureSpec) -> SignedMeasure:
    loc = spec.offset + spec.scale * cantor_midpoints(spec.level)
    w = np.full(loc.shape, 2.0**-spec.level)
    return SignedMeasure(loc[:, None], w)


def ball_mass(mu: SignedMeasure, x: float, r: float) -> float:
    d = np.abs(mu.locations[:, 0] - x)
    return float(np.sum(np.abs(mu.weights)[d <= r]))


def cantor_growth(spec: CantorMeasureSpec, xs=None, radii=None) -> dict:
    """Growth constant ``max nu(B_r(x)) / r^eps`` and fitted sup-slope over a sweep.

    The sup-slope is the log-log slope of ``max_x nu(B_r(x))`` against ``r``.
    Radii stay above the level resolution ``3^-level``.
    """
    mu = cantor_measure(spec)
    eps = spec.epsilon
    if radii is None:
        kmax = max(2, spec.level - 1)
        radii = spec.scale * 2.0 ** -np.arange(1, int(kmax * math.log2(3)) + 1)
        radii = radii[radii >= spec.scale * 3.0 ** -(spec.level - 1)]
    if xs is None:
        xs = spec.offset + spec.scale * np.linspace(0, 1, 257)
        xs = np.concatenate([xs, mu.locations[:, 0]])
    radii = np.asarray(radii, dtype=float)
    sups = []
    ratio = 0.0
    for r in radii:
        m = max(ball_mass(mu, x, r) for x in xs)
        sups.append(m)
        ratio = max(ratio, m / (r / spec.scale) ** eps)
    slope, ci, _ = loglog_fit(radii, sups)
    return {"constant": ratio, "slope": slope, "slope_ci": ci, "radii": radii, "sup_mass": np.array(sups)}


# ---------------------------------------------------------------- u_alpha

def u_alpha_eval(alpha: float, nu: SignedMeasure, x) -> np.ndarray:
    """``sum_k w_k f_alpha(x - x_k)``; ``POLE`` where ``x - x_k`` hits 0 or 1."""
    params = FAlphaParams(alpha)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(x.shape)
    loc = nu.locations[:, 0]
    w = nu.weights
    for s in range(0, len(loc), 64):
        v = f_alpha_eval(params, x[:, None] - loc[None, s:s + 64])
        out += np.sum(v * w[None, s:s + 64], axis=1)
    return out


def u_alpha_cell_averages(alpha: float, nu: SignedMeasure, grid_or_edges) -> np.ndarray:
    """Exact cell averages of ``u_alpha`` on a grid or on explicit cell edges."""
    params = FAlphaParams(alpha)
    edges = cell_edges(grid_or_edges) if isinstance(grid_or_edges, Grid) else np.asarray(grid_or_edges)
    loc = nu.locations[:, 0]
    w = nu.weights
    out = np.zeros(len(edges) - 1)
    for s in range(0, len(loc), 16):
        F = f_alpha_primitive(params, edges[:, None] - loc[None, s:s + 16])
        out += np.diff(F, axis=0) @ w[s:s + 16]
    return out / np.diff(edges)


def u_alpha_field(alpha: float, nu: SignedMeasure, grid: Grid) -> GridField:
    return GridField(grid, u_alpha_cell_averages(alpha, nu, grid), power_tail(2.0 - alpha))


def u_alpha_pairing_residual(alpha: float, nu: SignedMeasure, phi: GridField,
                             b: BackendSpec = DIRECT) -> float:
    """Weak-derivative residual of ``u_alpha`` against ``nu - (tau_1)_# nu``."""
    g = phi.grid
    u = u_alpha_field(alpha, nu, g)
    shifted = translate_measure(nu, 1.0)
    target = SignedMeasure(np.concatenate([nu.locations, shifted.locations]),
                           np.concatenate([nu.weights, -shifted.weights]))
    return weak_pairing_residual(u, lambda x: u_alpha_eval(alpha, nu, x), phi, target, alpha, b)["residual"]


# ---------------------------------------------------------------- integrability scans

FINITE_SLOPE = 0.05
DIVERGENT_SLOPE = 0.2


def classify_slope(slope: float) -> str:
    if slope <= FINITE_SLOPE:
        return "finite"
    if slope >= DIVERGENT_SLOPE:
        return "divergent"
    return "indeterminate"


def integrability_scan(sampler, ps, levels) -> list[dict]:
    """Classify ``L^p`` integrability from refinement growth.

    Parameters
    ----------
    sampler : callable
        ``sampler(level) -> (values, h)``: cell averages on a fixed window
        at resolution ``h``, finer for larger ``level``.
    ps : sequence of float
        Exponents; ``inf`` uses the grid supremum.
    levels : sequence of int

    Returns
    -------
    list of dict
        One row per ``p`` with the slope of ``log ||f_h||_p^p`` (or
        ``log max|f_h|``) against ``log(1/h)`` and its class.
    """
    data = [sampler(l) for l in levels]
    hs = np.array([h for _, h in data])
    rows = []
    for p in ps:
        if math.isinf(p):
            vals = np.array([np.max(np.abs(v)) for v, _ in data])
        else:
            vals = np.array([np.sum(np.abs(v) ** p) * h for v, h in data])
        if np.all(vals == 0):
            rows.append({"p": p, "slope": 0.0, "class": "finite", "norms": vals})
            continue
        slope, _, _ = loglog_fit(1.0 / hs, vals)
        rows.append({"p": p, "slope": slope, "class": classify_slope(slope), "norms": vals})
    return rows


def threshold_bracket(rows) -> tuple[float, float]:
    """Largest ``p`` classified finite and smallest classified divergent."""
    fin = [r["p"] for r in rows if r["class"] == "finite"]
    div = [r["p"] for r in rows if r["class"] == "divergent"]
    lo = max(fin) if fin else math.nan
    hi = min(div) if div else math.inf
    return lo, hi


def f_alpha_sampler(alpha: float, L: float = 4.0, base: int = 10):
    params = FAlphaParams(alpha)

    def sample(level: int):
        g = Grid(1, L, 2 ** (base + level))
        return f_alpha_field(params, g).values, g.h
    return sample


def u_alpha_sampler(alpha: float, window: tuple[int, int] = (-2, 3), cells_per_gap: int = 2):
    """Joint refinement: level ``l`` Cantor measure sampled with ``h = 3^-l / cells_per_gap``.

    The window has integer ends, so cell faces line up with the Cantor
    intervals at every level and the sequence of samples is self-similar.
    """
    lo, hi = window

    def sample(level: int):
        h = 3.0**-level / cells_per_gap
        n = int(round((hi - lo) / h))
        edges = lo + h * np.arange(n + 1)
        nu = cantor_measure(CantorMeasureSpec(level))
        return u_alpha_cell_averages(alpha, nu, edges), h
    return sample


# ---------------------------------------------------------------- per-example tables

EXAMPLES = ("f-alpha", "grad-indicator", "u-alpha")
SCAN_PS = (1.0, 2.0, 4.0, 8.0, math.inf)


def example_table(name: str, alpha: float, grid: Grid, radius: float = 1.0, level: int = 6):
    """Cell samples ``(x, value)`` of one closed-form example and its verdict.

    The verdict holds the integrability scan of the example (for the
    indicator gradient: the closed-form ``L^p`` scaling exponent at
    ``p = 1``) next to the exponent it should reproduce.
    """
    if grid.dim != 1:
        raise ValueError("closed-form examples are one-dimensional")
    x = grid.centers()
    if name == "f-alpha":
        vals = f_alpha_field(FAlphaParams(alpha), grid).values
        rows = integrability_scan(f_alpha_sampler(alpha), SCAN_PS[:-1], range(4))
        verdict = {"threshold": 1.0 / (1.0 - alpha)}
    elif name == "u-alpha":
        nu = cantor_measure(CantorMeasureSpec(level))
        vals = u_alpha_cell_averages(alpha, nu, grid)
        rows = integrability_scan(u_alpha_sampler(alpha), SCAN_PS, range(4, 8))
        eps = EPS_CANTOR
        verdict = {"threshold": (1.0 - eps) / (1.0 - alpha - eps) if alpha + eps < 1 else math.inf}
    elif name == "grad-indicator":
        vals = indicator_gradient_cells(grid, alpha, 0.0, radius)
        radii = np.array([0.25, 0.5, 1.0, 2.0])
        slope, ci, _ = loglog_fit(radii, [indicator_gradient_l1(alpha, r) for r in radii])
        return x, vals, {"example": name, "alpha": alpha, "p": 1.0, "fitted_exponent": slope,
                         "expected_exponent": 1.0 - alpha, "ci": ci}
    else:
        raise ValueError(f"unknown example {name!r}; choose from {', '.join(EXAMPLES)}")
    lo, hi = threshold_bracket(rows)
    verdict |= {"example": name, "alpha": alpha, "bracket": [lo, hi],
                "scan": [{"p": r["p"], "slope": r["slope"], "class": r["class"]} for r in rows]}
    return x, vals, verdict
