"""Discrete (alpha, 2)-capacity of a cell set by projected gradient descent.

The energy ``F(f) = ||f||_2^2 + ||grad^alpha f||_2^2`` is a quadratic form
diagonal in Fourier space, ``h^n / N^n sum (1 + |s(xi)|^2) |f_hat|^2``,
evaluated on the periodic box.  The obstacle set sits in the inner half of
the box, so the outer half plays the role of zero padding.
"""

from __future__ import annotations

import configparser
import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import fft

from .analytics import loglog_fit
from .grid import Grid, GridField, UNKNOWN, read_field, write_field
from .ops import spectral as sp

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CapacityProblem:
    """Minimise ``F(f)`` over grid fields with ``f >= 1`` on the cells of ``K``.

    Parameters
    ----------
    grid : Grid
    K : ndarray of bool, shape ``grid.shape``
        Obstacle cells; nonempty and inside the inner half of the box.
    alpha : float in (0, 1)
    max_iters : int
    tol_kkt : float
        Stop when the sup norm of the projected gradient falls below this.
    armijo : float
        Sufficient-decrease constant of the backtracking line search.
    """

    grid: Grid
    K: np.ndarray
    alpha: float
    p: float = 2.0
    solver: str = "projected_gradient"
    max_iters: int = 20000
    tol_kkt: float = 1e-6
    armijo: float = 1e-4

    def __post_init__(self):
        K = np.array(self.K, dtype=bool)
        K.flags.writeable = False
        object.__setattr__(self, "K", K)
        g = self.grid
        if K.shape != g.shape:
            raise ValueError(f"obstacle mask of shape {K.shape} does not fit grid {g.shape}")
        if not K.any():
            raise ValueError("obstacle set K is empty")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.p != 2:
            raise ValueError("only p = 2 is supported")
        if self.solver != "projected_gradient":
            raise ValueError(f"unknown solver {self.solver!r}")
        if not self.tol_kkt > 0 or self.max_iters < 1:
            raise ValueError("need tol_kkt > 0 and max_iters >= 1")
        inner = np.ones(g.shape, dtype=bool)
        for a, c in enumerate(g.mesh()):
            inner &= np.abs(c - g.origin[a]) <= g.L / 2
        if np.any(K & ~inner):
            raise ValueError("obstacle set must lie in the inner half of the box")


@dataclass
class CapacitySolution:
    value: float
    minimizer: GridField
    kkt_residual: float
    iterations: int
    converged: bool
    objective_history: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))

    def to_dict(self) -> dict:
        return {"value": self.value, "kkt_residual": self.kkt_residual,
                "iterations": self.iterations, "converged": self.converged}


def energy_symbol(grid: Grid, alpha: float) -> np.ndarray:
    """``1 + |s(xi)|^2`` with ``s`` the periodic gradient symbol (Nyquist zeroed)."""
    P = grid.N
    s = sp.gradient_symbol(alpha, grid, P)(sp.frequencies(grid, P))
    return 1.0 + np.sum(np.abs(s) ** 2, axis=0)


class _Quadratic:
    """``F(f) = h^n <f, A f>`` with ``A`` the Fourier multiplier ``energy_symbol``."""

    def __init__(self, grid: Grid, alpha: float):
        self.m = energy_symbol(grid, alpha)
        self.dv = grid.cell_volume

    def apply(self, f: np.ndarray) -> np.ndarray:
        w = sp.fft_workers()
        return fft.ifftn(self.m * fft.fftn(f, workers=w), workers=w).real

    def value(self, f: np.ndarray, Af: np.ndarray) -> float:
        return float(self.dv * np.sum(f * Af))


def projected_gradient(g: np.ndarray, f: np.ndarray, K: np.ndarray, tol: float) -> np.ndarray:
    """Gradient with the components blocked by active constraints removed."""
    pg = g.copy()
    active = K & (f <= 1.0 + tol)
    pg[active] = np.minimum(g[active], 0.0)
    return pg


def solve_capacity(prob: CapacityProblem, f0: np.ndarray | None = None) -> CapacitySolution:
    """Projected gradient with Barzilai-Borwein trial steps and Armijo backtracking.

    The gradient is taken in ``L^2`` (``2 A f``), so the KKT residual does
    not depend on the cell volume.  Accepted steps never increase ``F``.
    """
    K = prob.K
    Q = _Quadratic(prob.grid, prob.alpha)

    def project(v):
        return np.where(K, np.maximum(v, 1.0), v)

    f = project(np.zeros(prob.grid.shape) if f0 is None else np.asarray(f0, dtype=float))
    Af = Q.apply(f)
    F = Q.value(f, Af)
    grad = 2.0 * Af
    step = 1.0 / (2.0 * float(Q.m.max()))
    history = [F]
    res = float(np.max(np.abs(projected_gradient(grad, f, K, prob.tol_kkt))))
    it = 0
    while res > prob.tol_kkt and it < prob.max_iters:
        it += 1
        t = step
        while True:
            # the decrease is formed from the step itself: differencing two
            # energies loses it to rounding near the optimum
            d = project(f - t * grad) - f
            Ad = Q.apply(d)
            dF = Q.dv * float(np.sum(d * grad) + np.sum(d * Ad))
            if dF <= prob.armijo * Q.dv * float(np.sum(grad * d)) or t < 1e-16:
                break
            t *= 0.5
        if dF > 0:
            break
        gn = grad + 2.0 * Ad
        y = gn - grad
        sy = float(np.sum(d * y))
        step = float(np.sum(d * d)) / sy if sy > 0 else 1.0 / (2.0 * float(Q.m.max()))
        f, Af, F, grad = f + d, Af + Ad, F + dF, gn
        history.append(F)
        res = float(np.max(np.abs(projected_gradient(grad, f, K, prob.tol_kkt))))
    # refresh the accumulated quantities once at the end
    Af = Q.apply(f)
    F = Q.value(f, Af)
    res = float(np.max(np.abs(projected_gradient(2.0 * Af, f, K, prob.tol_kkt))))
    converged = res <= prob.tol_kkt
    if not converged:
        warnings.warn(f"capacity solver stopped after {it} iterations with KKT residual {res:.3g}",
                      RuntimeWarning, stacklevel=2)
    logger.info("capacity alpha=%g N=%d iterations=%d value=%.12g kkt=%.3g",
                prob.alpha, prob.grid.N, it, F, res)
    return CapacitySolution(F, GridField(prob.grid, f, UNKNOWN), res, it, converged, np.array(history))


def capacity_energy(f: GridField, alpha: float) -> float:
    """``||f||_2^2 + ||grad^alpha f||_2^2`` on the periodic box."""
    Q = _Quadratic(f.grid, alpha)
    v = np.asarray(f.values)
    return Q.value(v, Q.apply(v))


# ---------------------------------------------------------------- obstacle sets

def interval_mask(grid: Grid, intervals) -> np.ndarray:
    """Cells whose centres lie in the union of boxes.

    ``intervals`` holds ``(lo, hi)`` pairs in 1D and ``((lo0, hi0), (lo1, hi1))``
    pairs of ranges in 2D.
    """
    mask = np.zeros(grid.shape, dtype=bool)
    mesh = grid.mesh()
    for iv in intervals:
        iv = np.asarray(iv, dtype=float).reshape(grid.dim, 2)
        m = np.ones(grid.shape, dtype=bool)
        for a in range(grid.dim):
            m &= (mesh[a] >= iv[a, 0]) & (mesh[a] <= iv[a, 1])
        mask |= m
    return mask


def capacity_scaling_sweep(alpha: float, lengths, grid: Grid, center: float = 0.0,
                           tol_kkt: float = 1e-6) -> dict:
    """Capacity of centred intervals of the given lengths and the log-log slope.

    The heuristic comparison exponent is ``n - 2 alpha``.
    """
    if grid.dim != 1:
        raise ValueError("the scaling sweep is one-dimensional")
    lengths = np.sort(np.asarray(lengths, dtype=float))
    if lengths[0] < 2 * grid.h:
        raise ValueError("interval length below two cells")
    rows = []
    f0 = None
    for ell in lengths:
        K = interval_mask(grid, [(center - ell / 2, center + ell / 2)])
        sol = solve_capacity(CapacityProblem(grid, K, alpha, tol_kkt=tol_kkt), f0)
        f0 = sol.minimizer.values
        rows.append((float(ell), sol.value, int(K.sum()), sol.kkt_residual))
    slope, ci, _ = loglog_fit(lengths, [r[1] for r in rows]) if len(rows) >= 3 else (math.nan, math.nan, 0)
    return {"rows": rows, "slope": slope, "slope_ci": ci, "heuristic": 1.0 - 2.0 * alpha}


# ---------------------------------------------------------------- config and output

def read_config(path) -> dict:
    """Key-value file (``key = value`` lines, ``#`` comments, no section header)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.read_string("[config]\n" + Path(path).read_text())
    return dict(cp["config"])


def parse_intervals(text: str) -> list:
    """``"-0.5:0.5, 1:1.25"`` in 1D; ``"a:b x c:d; ..."`` boxes in 2D."""
    out = []
    sep = ";" if "x" in text else ","
    for item in text.split(sep):
        item = item.strip()
        if not item:
            continue
        ranges = [tuple(float(v) for v in r.split(":")) for r in item.split("x")]
        out.append(ranges[0] if len(ranges) == 1 else tuple(ranges))
    return out


def problem_from_config(cfg: dict) -> CapacityProblem:
    dim = int(cfg.get("dim", 1))
    grid = Grid(dim, float(cfg.get("grid_l", 4.0)), int(cfg.get("grid_n", 512)))
    if "mask_file" in cfg:
        K = read_field(cfg["mask_file"]).values > 0.5
        if K.shape != grid.shape:
            raise ValueError("mask file does not match the configured grid")
    elif "obstacle" in cfg:
        K = interval_mask(grid, parse_intervals(cfg["obstacle"]))
    else:
        raise ValueError("config needs 'obstacle' (interval list) or 'mask_file'")
    return CapacityProblem(grid, K, float(cfg.get("alpha", 0.5)),
                           max_iters=int(cfg.get("max_iters", 20000)),
                           tol_kkt=float(cfg.get("tol_kkt", 1e-6)))


def write_solution(out_dir, sol: CapacitySolution, prob: CapacityProblem) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = sol.to_dict() | {"alpha": prob.alpha, "grid": {"dim": prob.grid.dim, "N": prob.grid.N,
                                                          "L": prob.grid.L},
                            "obstacle_cells": int(prob.K.sum())}
    with open(out / "capacity.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_field(out / "minimizer.bin", sol.minimizer)
    return out / "capacity.json"
