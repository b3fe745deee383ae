"""Operator values outside the sampled box.

Nonlocal operators of compactly supported data do not vanish outside the
support; their tails decay only like a power of the distance, so norms of
the outputs need the exterior region.  An :class:`Exterior` stores the
source samples and evaluates the operator at arbitrary exterior points by
a midpoint sum over source cells (the target is outside the support, so
the kernel is smooth there).  :func:`exterior_nodes` supplies a
quadrature for the complement of the box that follows the power-law decay
with geometric radial panels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..grid import Grid

N_PANELS = 96
PANEL_ORDER = 6
CHUNK = 1 << 22


@dataclass(frozen=True)
class Exterior:
    """Kernel sum ``scale * sum_j k(y_j - x) src_j h^n`` at exterior points.

    ``form`` is ``"vector"`` for kernels ``(y - x)|y - x|^-power`` or
    ``"radial"`` for ``|y - x|^-power``.  With ``contract=True`` a vector
    kernel is dotted with a vector source (scalar output); otherwise it
    multiplies the scalar source ``source[0]`` (vector output).
    """

    grid: Grid
    form: str
    power: float
    scale: float
    source: np.ndarray  # (ncomp, *grid.shape)
    absolute: bool = False
    contract: bool = False

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        g = self.grid
        pts = np.atleast_2d(points).reshape(-1, g.dim)
        ys = np.stack([m.ravel() for m in g.mesh()], axis=1)
        src = self.source.reshape(self.source.shape[0], -1)
        if self.absolute:
            src = np.abs(src)
        keep = np.any(src != 0, axis=0)
        ys, src = ys[keep], src[:, keep]
        vector_out = self.form == "vector" and not self.contract
        out = np.zeros((len(pts), g.dim) if vector_out else (len(pts),))
        if not len(ys):
            return out
        step = max(1, CHUNK // len(ys))
        for s in range(0, len(pts), step):
            d = ys[None, :, :] - pts[s:s + step, None, :]          # (m, J, dim)
            r2 = np.sum(d * d, axis=-1)
            w = r2 ** (-self.power / 2.0)
            if self.form == "radial":
                out[s:s + step] = w @ src[0]
            elif vector_out:
                out[s:s + step] = np.einsum("mj,mjd,j->md", w, d, src[0])
            else:
                out[s:s + step] = np.einsum("mj,mjd,dj->m", w, d, src)
        return out * (self.scale * g.cell_volume)


@lru_cache(maxsize=32)
def exterior_nodes(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature points and weights covering the complement of the box."""
    x, w = np.polynomial.legendre.leggauss(PANEL_ORDER)
    edges = np.concatenate([[0.0], grid.h * 2.0 ** np.arange(N_PANELS)])
    a, b = edges[:-1], edges[1:]
    d = (0.5 * (b - a)[:, None] * (x[None] + 1.0) + a[:, None]).ravel()
    wd = (0.5 * (b - a)[:, None] * w[None]).ravel()
    if grid.dim == 1:
        lo, hi = grid.lower(0), grid.upper(0)
        pts = np.concatenate([lo - d[::-1], hi + d])[:, None]
        wts = np.concatenate([wd[::-1], wd])
        return pts, wts
    # 2D: polar coordinates about the box centre, one sector per octant.
    L = grid.L
    ta, tw = np.polynomial.legendre.leggauss(4)
    pts, wts = [], []
    for octant in range(8):
        t0 = octant * math.pi / 4
        th = t0 + (ta + 1.0) * math.pi / 8
        thw = tw * math.pi / 8
        for t, tw_ in zip(th, thw):
            rmin = L / max(abs(math.cos(t)), abs(math.sin(t)))
            r = rmin + d
            pts.append(np.stack([grid.origin[0] + r * math.cos(t), grid.origin[1] + r * math.sin(t)], axis=1))
            wts.append(wd * r * tw_)
    return np.concatenate(pts), np.concatenate(wts)
