"""Uniform grids, sampled fields, signed measures, mollifiers and cutoffs.

Everything here is immutable: arrays handed to a :class:`GridField` are
copied and frozen, and every operation returns a new object.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.signal import fftconvolve


COMPACT_TOL = 1e-9


@dataclass(frozen=True)
class Grid:
    """Isotropic cell-centred box ``origin + [-L, L]^dim`` with ``N`` cells per axis."""

    dim: int
    L: float
    N: int
    origin: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        if self.N < 8 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two and at least 8")
        if not self.L > 0:
            raise ValueError("half-width L must be positive")
        origin = (0.0,) * self.dim if self.origin is None else tuple(float(o) for o in self.origin)
        if len(origin) != self.dim:
            raise ValueError("origin must have one entry per axis")
        object.__setattr__(self, "origin", origin)

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.dim

    def centers(self, axis: int = 0) -> np.ndarray:
        return self.origin[axis] - self.L + (np.arange(self.N) + 0.5) * self.h

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*[self.centers(a) for a in range(self.dim)], indexing="ij"))

    def lower(self, axis: int = 0) -> float:
        return self.origin[axis] - self.L

    def upper(self, axis: int = 0) -> float:
        return self.origin[axis] + self.L

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        lo = np.array([self.lower(a) for a in range(self.dim)])
        hi = np.array([self.upper(a) for a in range(self.dim)])
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.dim, self.L, self.N * factor, self.origin)

    def dilated(self, lam: float) -> "Grid":
        return Grid(self.dim, self.L * lam, self.N, tuple(o * lam for o in self.origin))


@dataclass(frozen=True)
class DecayClass:
    kind: str = "compact_support"
    exponent: float | None = None

    def __post_init__(self):
        if self.kind not in ("compact_support", "power_tail", "unknown"):
            raise ValueError(f"unknown decay class {self.kind!r}")
        if self.kind == "power_tail" and (self.exponent is None or self.exponent <= 0):
            raise ValueError("power_tail needs a positive exponent")


COMPACT = DecayClass("compact_support")
UNKNOWN = DecayClass("unknown")


def power_tail(exponent: float) -> DecayClass:
    return DecayClass("power_tail", float(exponent))


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GridField:
    """Scalar or vector samples on a :class:`Grid`.

    Scalar values have shape ``grid.shape``; vector values carry a leading
    component axis, ``(dim,) + grid.shape``.
    """

    grid: Grid
    values: np.ndarray
    decay: DecayClass = COMPACT

    def __post_init__(self):
        vals = _frozen(self.values)
        object.__setattr__(self, "values", vals)
        g = self.grid
        if vals.shape not in (g.shape, (g.dim,) + g.shape):
            raise ValueError(f"values of shape {vals.shape} do not fit grid {g.shape}")
        if self.decay.kind == "compact_support":
            scale = max(1.0, float(np.max(np.abs(vals)))) if vals.size else 1.0
            if np.max(np.abs(_rim(vals, g.dim, 2)), initial=0.0) > COMPACT_TOL * scale:
                raise ValueError("compact_support field must vanish on the outer two cells")

    @property
    def rank(self) -> str:
        return "scalar" if self.values.shape == self.grid.shape else "vector"

    @property
    def components(self) -> np.ndarray:
        """Values with a leading component axis, also for scalars."""
        return self.values[None] if self.rank == "scalar" else self.values

    def with_values(self, values, decay: DecayClass | None = None) -> "GridField":
        return GridField(self.grid, values, self.decay if decay is None else decay)

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[..., np.ndarray],
                      decay: DecayClass = COMPACT) -> "GridField":
        return cls(grid, np.asarray(fn(*grid.mesh()), dtype=float), decay)

    @classmethod
    def zeros(cls, grid: Grid, rank: str = "scalar") -> "GridField":
        shape = grid.shape if rank == "scalar" else (grid.dim,) + grid.shape
        return cls(grid, np.zeros(shape))

    def norm(self) -> np.ndarray:
        """Pointwise Euclidean norm (absolute value for scalars)."""
        return np.sqrt(np.sum(self.components**2, axis=0))

    def __add__(self, other: "GridField") -> "GridField":
        _check_same_grid(self, other)
        return self.with_values(self.values + other.values, _weaker(self.decay, other.decay))

    def __sub__(self, other: "GridField") -> "GridField":
        _check_same_grid(self, other)
        return self.with_values(self.values - other.values, _weaker(self.decay, other.decay))

    def __mul__(self, c: float) -> "GridField":
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __neg__(self) -> "GridField":
        return self.with_values(-self.values)


def _rim(values: np.ndarray, dim: int, width: int) -> np.ndarray:
    mask = np.zeros(values.shape[-dim:], dtype=bool)
    for ax in range(dim):
        idx = [slice(None)] * dim
        idx[ax] = slice(0, width)
        mask[tuple(idx)] = True
        idx[ax] = slice(-width, None)
        mask[tuple(idx)] = True
    return values[..., mask]


def _weaker(a: DecayClass, b: DecayClass) -> DecayClass:
    order = {"compact_support": 0, "power_tail": 1, "unknown": 2}
    if a.kind == b.kind == "power_tail":
        return power_tail(min(a.exponent, b.exponent))
    return a if order[a.kind] >= order[b.kind] else b


def _check_same_grid(f: GridField, g: GridField) -> None:
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")


def pair(f: GridField, g: GridField) -> float:
    """Midpoint-rule L^2 pairing of two fields on the same grid."""
    _check_same_grid(f, g)
    a, b = f.components, g.components
    if a.shape != b.shape:
        raise ValueError("incompatible ranks in pairing")
    return float(np.sum(a * b) * f.grid.cell_volume)


@dataclass(frozen=True)
class SignedMeasure:
    """Finite atomic part plus an optional grid density.

    ``locations`` has shape ``(m, dim)``; ``weights`` has shape ``(m,)`` for
    scalar measures or ``(m, dim)`` for vector measures.
    """

    locations: np.ndarray
    weights: np.ndarray
    density: GridField | None = None
    dim: int = 1

    def __post_init__(self):
        loc = _frozen(np.reshape(self.locations, (-1, self.dim)))
        w = _frozen(self.weights)
        if w.shape[0] != loc.shape[0]:
            raise ValueError("one weight per atom required")
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "weights", w)
        if self.density is not None and not np.all(self.density.grid.contains(loc)):
            raise ValueError("atom outside the grid box")

    @classmethod
    def atoms(cls, locations: Sequence, weights: Sequence, dim: int = 1,
              density: GridField | None = None) -> "SignedMeasure":
        return cls(np.asarray(locations, dtype=float), np.asarray(weights, dtype=float),
                   density, dim)

    @property
    def total_variation(self) -> float:
        w = self.weights
        atom_tv = np.sum(np.abs(w)) if w.ndim == 1 else np.sum(np.sqrt(np.sum(w**2, axis=1)))
        dens_tv = 0.0
        if self.density is not None:
            dens_tv = float(np.sum(self.density.norm()) * self.density.grid.cell_volume)
        return float(atom_tv) + dens_tv

    @property
    def total_mass(self) -> float:
        m = float(np.sum(self.weights))
        if self.density is not None:
            m += float(np.sum(self.density.values) * self.density.grid.cell_volume)
        return m


def interpolate(f: GridField, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of ``f`` at ``points`` (shape ``(m, dim)``).

    Points in the half cell between the outermost centres and the box
    edge are linearly extrapolated.  Returns shape ``(m,)`` for scalars and
    ``(m, dim)`` for vectors.
    """
    g = f.grid
    pts = np.atleast_2d(np.asarray(points, dtype=float)).reshape(-1, g.dim)
    if not np.all(g.contains(pts)):
        raise ValueError("interpolation point outside the grid box")
    axes = [g.centers(a) for a in range(g.dim)]
    out = []
    for comp in f.components:
        interp = RegularGridInterpolator(axes, comp, bounds_error=False, fill_value=None)
        out.append(interp(pts))
    out = np.stack(out, axis=-1)
    return out[:, 0] if f.rank == "scalar" else out


def pair_measure(phi: GridField, mu: SignedMeasure) -> float:
    """Integral of ``phi`` against ``mu``: atoms by interpolation, density by midpoint."""
    if not np.all(phi.grid.contains(mu.locations)):
        raise ValueError("atom outside the grid box")
    total = 0.0
    if len(mu.locations):
        vals = interpolate(phi, mu.locations)
        w = mu.weights
        if vals.ndim == 2 and w.ndim == 1:
            if vals.shape[1] != 1:
                raise ValueError("scalar weights need a one-component test field")
            vals = vals[:, 0]
        elif vals.ndim == 1 and w.ndim == 2:
            if w.shape[1] != 1:
                raise ValueError("vector weights need a vector test field")
            w = w[:, 0]
        total += float(np.sum(vals * w))
    if mu.density is not None:
        d = mu.density
        if d.rank != phi.rank:
            d = GridField(d.grid, np.reshape(d.values, phi.values.shape), d.decay)
        total += pair(phi, d)
    return total


def translate_measure(mu: SignedMeasure, v, grid: Grid | None = None) -> SignedMeasure:
    """Push ``mu`` forward under ``x -> x + v``."""
    v = np.reshape(np.asarray(v, dtype=float), (1, mu.dim))
    loc = mu.locations + v
    box = grid if grid is not None else (mu.density.grid if mu.density is not None else None)
    if box is not None and not np.all(box.contains(loc)):
        raise ValueError("translated atom leaves the grid box")
    density = None
    if mu.density is not None:
        d = mu.density
        pts = np.stack([m.ravel() for m in d.grid.mesh()], axis=1) - v
        inside = d.grid.contains(pts)
        comps = []
        axes = [d.grid.centers(a) for a in range(d.grid.dim)]
        for comp in d.components:
            interp = RegularGridInterpolator(axes, comp, bounds_error=False, fill_value=0.0)
            vals = np.where(inside, interp(np.where(inside[:, None], pts, 0.0)), 0.0)
            comps.append(vals.reshape(d.grid.shape))
        vals = comps[0] if d.rank == "scalar" else np.stack(comps)
        density = GridField(d.grid, vals, UNKNOWN if d.decay.kind == "compact_support" else d.decay)
    return SignedMeasure(loc, mu.weights, density, mu.dim)


@dataclass(frozen=True)
class MollifierSpec:
    """Radial bump exp(1 / (|x/eps|^2 - 1)), renormalised to unit mass on the grid."""

    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("mollifier radius must be positive")

    def kernel(self, grid: Grid) -> np.ndarray:
        if self.epsilon < 2 * grid.h:
            raise ValueError(f"mollifier radius {self.epsilon} is below two cells ({2 * grid.h})")
        m = int(np.ceil(self.epsilon / grid.h))
        offs = np.arange(-m, m + 1) * grid.h
        r2 = sum(o**2 for o in np.meshgrid(*([offs] * grid.dim), indexing="ij")) / self.epsilon**2
        k = np.zeros_like(r2)
        inside = r2 < 1.0
        k[inside] = np.exp(1.0 / (r2[inside] - 1.0))
        return k / (k.sum() * grid.cell_volume)


def mollify(f: GridField, m: MollifierSpec) -> GridField:
    """Discrete convolution with the renormalised bump."""
    k = m.kernel(f.grid) * f.grid.cell_volume
    comps = [fftconvolve(c, k, mode="same") for c in f.components]
    vals = comps[0] if f.rank == "scalar" else np.stack(comps)
    decay = f.decay
    if decay.kind == "compact_support" and np.max(np.abs(_rim(vals, f.grid.dim, 2)), initial=0) > \
            COMPACT_TOL * max(1.0, np.max(np.abs(vals))):
        decay = UNKNOWN
    return GridField(f.grid, vals, decay)


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, slope at most 2."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class CutoffSpec:
    """Radial cutoff: a smooth plateau ``eta_R(x) = eta_1(x/R)`` or a linear ramp.

    The plateau equals 1 on ``B_R`` and vanishes outside ``B_2R``.  The ramp is
    1 on ``B_R``, decays linearly to 0 over a shell of width ``eps``.
    """

    R: float
    shape: str = "smooth_plateau"
    eps: float | None = None
    center: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("cutoff radius must be positive")
        if self.shape not in ("smooth_plateau", "radial_ramp"):
            raise ValueError(f"unknown cutoff shape {self.shape!r}")
        if self.shape == "radial_ramp":
            if self.eps is None or not 0 < self.eps <= self.R:
                raise ValueError("radial_ramp needs 0 < eps <= R")

    @property
    def lipschitz(self) -> float:
        return 2.0 / self.R if self.shape == "smooth_plateau" else 1.0 / self.eps

    def profile(self, r: np.ndarray) -> np.ndarray:
        if self.shape == "smooth_plateau":
            return 1.0 - _smooth_step(r / self.R - 1.0)
        return np.clip((self.R + self.eps - r) / self.eps, 0.0, 1.0)

    def field(self, grid: Grid) -> GridField:
        c = (0.0,) * grid.dim if self.center is None else self.center
        r = np.sqrt(sum((x - ci) ** 2 for x, ci in zip(grid.mesh(), c)))
        vals = self.profile(r)
        decay = COMPACT if np.max(_rim(vals, grid.dim, 2), initial=0) == 0 else UNKNOWN
        return GridField(grid, vals, decay)


def cutoff_field(grid: Grid, c: CutoffSpec) -> GridField:
    return c.field(grid)


def apply_cutoff(f: GridField, c: CutoffSpec) -> GridField:
    eta = c.field(f.grid).values
    vals = f.values * eta if f.rank == "scalar" else f.values * eta[None]
    decay = COMPACT if np.max(np.abs(_rim(vals, f.grid.dim, 2)), initial=0) == 0 else f.decay
    return GridField(f.grid, vals, decay)


# --- serialisation ---------------------------------------------------------

_HEADER = struct.Struct("<qqdq")


def write_field(path, f: GridField) -> None:
    """Flat binary layout: little-endian (dim, N, L, rank) then row-major doubles."""
    rank = 1 if f.rank == "scalar" else f.grid.dim
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(f.grid.dim, f.grid.N, f.grid.L, rank))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_field(path, decay: DecayClass = UNKNOWN) -> GridField:
    raw = Path(path).read_bytes()
    dim, n, L, rank = _HEADER.unpack_from(raw)
    grid = Grid(dim, L, n)
    shape = grid.shape if rank == 1 else (dim,) + grid.shape
    vals = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(shape)
    return GridField(grid, vals, decay)


def write_field_csv(path, f: GridField, max_cells: int = 1 << 16) -> None:
    g = f.grid
    if g.N**g.dim > max_cells:
        raise ValueError("grid too large for CSV output")
    coords = [m.ravel() for m in g.mesh()]
    comps = [c.ravel() for c in f.components]
    names = ["x", "y"][: g.dim]
    vnames = ["value"] if f.rank == "scalar" else [f"value_{i}" for i in range(g.dim)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + vnames)
        for row in zip(*coords, *comps):
            w.writerow([repr(float(v)) for v in row])
