"""Nonlocal operators on sampled fields.

Direct backend
--------------
Product quadrature: the field is reconstructed cell by cell as
``f_j + s_j (y - y_j)`` with minmod-limited slopes ``s_j`` (zero data
outside the box) and the kernel is integrated exactly against that
reconstruction, see :mod:`fracvar.ops.weights`.  The sums over offsets are
correlations and are evaluated with aperiodic FFT convolution.

Spectral backend
----------------
Multiplier on the zero-padded transform (or on the torus when
``periodic=True``).  Odd multipliers vanish on Nyquist modes, which makes
the discrete gradient and divergence exactly adjoint.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.signal import fftconvolve

from .. import constants as C
from ..grid import Grid, GridField, power_tail
from . import spectral as sp
from .backend import DIRECT, SPECTRAL, BackendSpec, OperatorResult, logged
from .exterior import Exterior
from .weights import _square_complement_integral, kernel_weights

logger = logging.getLogger("fracvar.ops")

DCAL_NEAR_2D = 16


# ---------------------------------------------------------------- helpers

def _check_alpha(alpha: float, lo: float = 0.0, hi: float = 1.0, what: str = "alpha") -> float:
    alpha = float(alpha)
    if not lo < alpha < hi:
        raise ValueError(f"{what}={alpha} outside ({lo}, {hi})")
    return alpha


def _check_decay(f: GridField, op: str) -> None:
    if f.decay.kind == "unknown":
        logger.warning("%s: decay class unknown, treating the field as compactly supported", op)


def _check_rank(f: GridField, rank: str, op: str) -> None:
    if f.rank != rank:
        raise ValueError(f"{op} expects a {rank} field, got {f.rank}")


def _tail(grid: Grid):
    # outputs of nonlocal operators are never compactly supported
    return power_tail(grid.dim)


def corr(f: np.ndarray, W: np.ndarray) -> np.ndarray:
    """``out_i = sum_k W_k f_{i+k}`` with ``W`` on a centred odd-length offset lattice."""
    if not np.any(f) or not np.any(W):
        return np.zeros(f.shape)
    return fftconvolve(f, W[(slice(None, None, -1),) * f.ndim], mode="same")


def slopes(f: np.ndarray, h: float, limited: bool = False) -> np.ndarray:
    """Slopes along each axis with zero data outside the box.

    Central differences by default: linear and antisymmetric, which keeps
    the direct gradient and divergence exactly adjoint.  ``limited=True``
    gives minmod slopes instead.
    """
    out = []
    for ax in range(f.ndim):
        p = np.pad(f, [(1, 1) if a == ax else (0, 0) for a in range(f.ndim)])
        n = f.shape[ax]
        fwd = (np.take(p, np.arange(2, n + 2), axis=ax) - f) / h
        bwd = (f - np.take(p, np.arange(0, n), axis=ax)) / h
        if limited:
            out.append(np.where(fwd * bwd > 0, np.sign(fwd) * np.minimum(np.abs(fwd), np.abs(bwd)), 0.0))
        else:
            out.append(0.5 * (fwd + bwd))
    return np.stack(out)


def _M(grid: Grid, b: BackendSpec) -> int:
    return grid.N if b.far_field_radius is None else min(grid.N, b.far_field_radius + 1)


def _weights(kind: str, grid: Grid, order: float, b: BackendSpec):
    return kernel_weights(kind, grid.dim, float(order), grid.h, _M(grid, b), max(3, b.exclusion_radius))


def _far_bound(src: np.ndarray, grid: Grid, b: BackendSpec, power: float) -> float:
    if b.far_field_radius is None or b.far_field_radius + 1 >= grid.N:
        return 0.0
    R = b.far_field_radius * grid.h
    return float(np.sum(np.abs(src)) * grid.cell_volume * R ** (-power))


def _reject_mean(src: np.ndarray, b: BackendSpec, op: str) -> None:
    if b.kind == "spectral" and b.zero_mode_policy == "reject_nonzero_mean":
        tot = np.abs(src).sum(axis=tuple(range(1, src.ndim)))
        mean = np.abs(src.sum(axis=tuple(range(1, src.ndim))))
        if np.any(mean > 1e-12 * np.maximum(tot, 1e-300)):
            raise ValueError(f"{op}: nonzero mean rejected by zero_mode_policy")


def _spectral(src, grid, b, symbols, images=None):
    """Multiplier output; ``images=(form, power, scale)`` removes the periodic copies.

    The estimate is the size of the removed copies times the relative
    midpoint error of the image sum, or the torus leak when no correction
    is made.
    """
    out, leak = sp.apply_symbols(src, grid, b, symbols)
    scale = float(np.max(np.abs(out))) if out.size else 0.0
    if images is None or b.periodic or not b.image_correction:
        return out, leak * scale
    form, power, c = images
    P = sp.transform_length(grid, b)
    G = sp.image_kernel(form, float(power), grid, P)
    w = c * grid.cell_volume
    if form == "radial":
        fix = np.stack([corr(s, G) for s in src]) * w
    elif src.shape[0] == 1:
        fix = np.stack([corr(src[0], G[a]) for a in range(grid.dim)]) * w
    else:
        fix = sum(corr(src[a], G[a]) for a in range(grid.dim))[None] * w
    gap = (P - 2 * grid.N + 2) * grid.h
    est = float(np.max(np.abs(fix))) * (grid.h / gap) ** 2
    return out - fix, est


def _odd_direct(vals: np.ndarray, grid: Grid, alpha: float, b: BackendSpec):
    """Unnormalised direct fractional gradient of one scalar array; also the correction size."""
    w = _weights("grad", grid, alpha, b)
    out = np.stack([corr(vals, w.A[a]) for a in range(grid.dim)])
    corr_size = 0.0
    if b.local_correction:
        s = slopes(vals, grid.h, b.slope_limiter)
        extra = np.stack([sum(corr(s[c], w.B[a, c]) for c in range(grid.dim)) for a in range(grid.dim)])
        corr_size = float(np.max(np.abs(extra)))
        out = out + extra
    return out, corr_size


# ---------------------------------------------------------------- gradient / divergence

def frac_gradient(f: GridField, alpha: float, b: BackendSpec = SPECTRAL) -> OperatorResult:
    """Fractional gradient of a scalar field (vector result)."""
    alpha = _check_alpha(alpha)
    _check_rank(f, "scalar", "frac_gradient")
    _check_decay(f, "frac_gradient")
    g, n = f.grid, f.grid.dim
    mu = C.mu(n, alpha)
    with logged("frac_gradient", alpha, b, g, {}) as box:
        if b.kind == "spectral":
            _reject_mean(f.components, b, "frac_gradient")
            P = sp.transform_length(g, b)
            sym = sp.gradient_symbol(alpha, g, P)
            out, est = _spectral(f.components, g, b, lambda xi: sym(xi)[:, None],
                                 ("vector", n + alpha + 1.0, mu))
        else:
            raw, cs = _odd_direct(f.values, g, alpha, b)
            out = mu * raw
            est = mu * cs * g.h + _far_bound(f.values, g, b, n + alpha)
        box["est_error"] = est
    ext = Exterior(g, "vector", n + alpha + 1.0, mu, f.components)
    return OperatorResult(GridField(g, out, _tail(g)), b, est, ext)


def frac_divergence(phi: GridField, alpha: float, b: BackendSpec = SPECTRAL) -> OperatorResult:
    """Fractional divergence of a vector field (scalar result)."""
    alpha = _check_alpha(alpha)
    _check_rank(phi, "vector", "frac_divergence")
    _check_decay(phi, "frac_divergence")
    g, n = phi.grid, phi.grid.dim
    mu = C.mu(n, alpha)
    with logged("frac_divergence", alpha, b, g, {}) as box:
        if b.kind == "spectral":
            _reject_mean(phi.values, b, "frac_divergence")
            P = sp.transform_length(g, b)
            sym = sp.gradient_symbol(alpha, g, P)
            out, est = _spectral(phi.values, g, b, lambda xi: sym(xi)[None],
                                 ("vector", n + alpha + 1.0, mu))
            out = out[0]
        else:
            # negative adjoint of the direct gradient: A_a phi_a + sum_c D_c (B_ac phi_a)
            w = _weights("grad", g, alpha, b)
            out = sum(corr(phi.values[a], w.A[a]) for a in range(n))
            cs = 0.0
            if b.local_correction:
                extra = sum(slopes(corr(phi.values[a], w.B[a, c]), g.h, b.slope_limiter)[c] for a in range(n) for c in range(n))
                cs = float(np.max(np.abs(extra)))
                out = out + extra
            out = mu * out
            est = mu * cs * g.h + _far_bound(phi.values, g, b, n + alpha)
        box["est_error"] = est
    ext = Exterior(g, "vector", n + alpha + 1.0, mu, phi.values, contract=True)
    return OperatorResult(GridField(g, out, _tail(g)), b, est, ext)


# ---------------------------------------------------------------- Laplacian / potentials

def frac_laplacian(f: GridField, s: float, b: BackendSpec = SPECTRAL) -> OperatorResult:
    """``(-Delta)^(s/2) f`` for ``s`` in (0, 2), multiplier ``+|2 pi xi|^s``.

    The singular-integral form carries the negative constant ``nu_lap``;
    with it the operator is positive at the peak of a Gaussian.  Vector
    fields are processed componentwise.
    """
    s = _check_alpha(s, 0.0, 2.0, "s")
    _check_decay(f, "frac_laplacian")
    g, n = f.grid, f.grid.dim
    nu = C.nu_lap(n, s)
    src = f.components
    with logged("frac_laplacian", s, b, g, {}) as box:
        if b.kind == "spectral":
            sym = sp.laplacian_symbol(s)
            out, est = _spectral(src, g, b, lambda xi: _diag(sym(xi), src.shape[0]),
                                 ("radial", n + s, nu))
        else:
            w = _weights("lap", g, s, b)
            T0, C2 = w.centre["T0"], w.centre["C2"]
            out = np.empty(src.shape)
            cs = 0.0
            for c in range(src.shape[0]):
                v = src[c]
                acc = corr(v, w.A) - T0 * v
                if b.local_correction:
                    sl = slopes(v, g.h, b.slope_limiter)
                    extra = sum(corr(sl[a], w.B[a]) for a in range(n)) + C2 * _laplace5(v, g.h)
                    cs = max(cs, float(np.max(np.abs(extra))))
                    acc = acc + extra
                out[c] = nu * acc
            est = abs(nu) * cs * g.h + _far_bound(src, g, b, n + s)
        box["est_error"] = est
    ext = Exterior(g, "radial", n + s, nu, src)
    vals = out[0] if f.rank == "scalar" else out
    return OperatorResult(GridField(g, vals, _tail(g)), b, est, ext)


def _diag(m: np.ndarray, k: int) -> np.ndarray:
    eye = np.eye(k).reshape((k, k) + (1,) * m.ndim)
    return eye * m[None, None]


def _laplace5(v: np.ndarray, h: float) -> np.ndarray:
    p = np.pad(v, 1)
    out = -2.0 * v.ndim * v
    for ax in range(v.ndim):
        n = v.shape[ax]
        sl = [slice(1, -1)] * v.ndim
        for lo in (0, 2):
            sl[ax] = slice(lo, lo + n)
            out = out + p[tuple(sl)]
        sl[ax] = slice(1, -1)
    return out / (h * h)


def riesz_potential(f: GridField, alpha: float, b: BackendSpec = SPECTRAL) -> OperatorResult:
    """Riesz potential ``I_alpha f`` for ``alpha`` in (0, n); vector fields componentwise."""
    g, n = f.grid, f.grid.dim
    alpha = _check_alpha(alpha, 0.0, float(n))
    _check_decay(f, "riesz_potential")
    c = C.riesz_norm(n, alpha)
    src = f.components
    with logged("riesz_potential", alpha, b, g, {}) as box:
        if b.kind == "spectral":
            _reject_mean(src, b, "riesz_potential")
            sym = sp.riesz_potential_symbol(alpha)
            out, est = _spectral(src, g, b, lambda xi: _diag(sym(xi), src.shape[0]))
        else:
            w = _weights("riesz", g, alpha, b)
            out = np.empty(src.shape)
            cs = 0.0
            for k in range(src.shape[0]):
                acc = corr(src[k], w.A)
                if b.local_correction:
                    sl = slopes(src[k], g.h, b.slope_limiter)
                    extra = sum(corr(sl[a], w.B[a]) for a in range(n))
                    cs = max(cs, float(np.max(np.abs(extra))))
                    acc = acc + extra
                out[k] = c * acc
            est = c * cs * g.h + _far_bound(src, g, b, n - alpha)
        box["est_error"] = est
    ext = Exterior(g, "radial", n - alpha, c, src)
    vals = out[0] if f.rank == "scalar" else out
    return OperatorResult(GridField(g, vals, power_tail(n - alpha)), b, est, ext)


def riesz_transform(f: GridField, b: BackendSpec = SPECTRAL) -> OperatorResult:
    """Vector Riesz transform with multiplier ``i xi/|xi|`` (the gradient of ``I_1``).

    Scalar input gives a vector; a vector input is contracted
    (``sum_a R_a phi_a``) so that ``R . R f = -f`` can be formed.
    """
    if b.kind != "spectral":
        raise ValueError("riesz_transform is available with the spectral backend only")
    _check_decay(f, "riesz_transform")
    g, n = f.grid, f.grid.dim
    P = sp.transform_length(g, b)
    sym = sp.riesz_transform_symbol(g, P)
    with logged("riesz_transform", 0.0, b, g, {}) as box:
        cR = C.riesz_transform_norm(n)
        if f.rank == "scalar":
            out, est = _spectral(f.components, g, b, lambda xi: sym(xi)[:, None], ("vector", n + 1.0, cR))
        else:
            out, est = _spectral(f.values, g, b, lambda xi: sym(xi)[None], ("vector", n + 1.0, cR))
            out = out[0]
        box["est_error"] = est
    ext = Exterior(g, "vector", n + 1.0, C.riesz_transform_norm(n), f.components,
                   contract=f.rank == "vector")
    return OperatorResult(GridField(g, out, _tail(g)), b, est, ext)


# ---------------------------------------------------------------- absolute and bilinear operators

def _shift(p: np.ndarray, pad: int, k: tuple[int, ...], shape) -> np.ndarray:
    return p[tuple(slice(pad + kk, pad + kk + n) for kk, n in zip(k, shape))]


def dcal_alpha(f: GridField, alpha: float, b: BackendSpec = DIRECT) -> OperatorResult:
    """``int |f(x + z) - f(x)| |z|^(-n-alpha) dz`` by direct summation.

    Built from the same cell moments as the direct gradient, so that
    ``|grad^alpha f| <= mu * dcal f`` holds cell by cell.  Offsets beyond
    ``far_field_radius`` (default: the whole box in 1D, 16 cells in 2D) are
    replaced by the triangle-inequality bound, which keeps the estimate an
    upper bound.
    """
    if b.kind != "direct":
        raise ValueError("dcal_alpha needs the direct backend")
    alpha = _check_alpha(alpha)
    _check_rank(f, "scalar", "dcal_alpha")
    g, n, h = f.grid, f.grid.dim, f.grid.h
    v = f.values
    with logged("dcal_alpha", alpha, b, g, {}) as box:
        w = kernel_weights("abs", n, alpha, h, g.N, max(3, b.exclusion_radius))
        M = g.N
        R = b.far_field_radius if b.far_field_radius is not None else (M - 1 if n == 1 else DCAL_NEAR_2D)
        R = min(R, M - 1)
        k = np.arange(-(M - 1), M)
        grids = np.meshgrid(*([k] * n), indexing="ij")
        dist = np.max(np.abs(np.stack(grids)), axis=0)
        near = (dist <= R) & (dist > 0)
        Abar = np.asarray(w.A)
        pad = R
        p = np.pad(v, pad)
        out = np.zeros(g.shape)
        for idx in zip(*np.nonzero(near)):
            off = tuple(int(i) - (M - 1) for i in idx)
            out += Abar[idx] * np.abs(_shift(p, pad, off, g.shape) - v)
        far = np.where(dist > R, Abar, 0.0)
        out += corr(np.abs(v), far)
        T0 = 2.0 * (h / 2.0) ** (-alpha) / alpha if n == 1 else _square_complement_integral(h, alpha)
        out += np.abs(v) * max(T0 - float(np.sum(Abar[near])), 0.0)
        est = 0.0
        if b.local_correction:
            sl = slopes(v, h, b.slope_limiter)
            sn = np.sqrt(np.sum(sl * sl, axis=0))
            extra = corr(sn, np.asarray(w.B)[0])
            est = float(np.max(extra)) * h
            out += extra
        box["est_error"] = est
    ext = Exterior(g, "radial", n + alpha, 1.0, f.components, absolute=True)
    return OperatorResult(GridField(g, out, _tail(g)), b, est, ext)


def _edge_value(v: np.ndarray, tol: float = 1e-12) -> float | None:
    """Common value on the outer cells, or None if the rim is not constant."""
    dim = v.ndim
    mask = np.zeros(v.shape, dtype=bool)
    for ax in range(dim):
        idx = [slice(None)] * dim
        idx[ax] = 0
        mask[tuple(idx)] = True
        idx[ax] = -1
        mask[tuple(idx)] = True
    rim = v[mask]
    e = float(np.mean(rim))
    return e if np.max(np.abs(rim - e)) <= tol * max(1.0, np.max(np.abs(v))) else None


def _nl_core(u: np.ndarray, eta: np.ndarray, e: float, grid: Grid, alpha: float, b: BackendSpec):
    """Vector ``sum_k A_k (u(x+k) - u(x)) (eta(x+k) - eta(x))`` per gradient component.

    ``u`` is extended by 0 and ``eta`` by its edge value ``e`` outside the box.
    """
    n = grid.dim
    w = _weights("grad", grid, alpha, b)
    et = eta - e
    if n == 1:
        M = w.M
        A = np.asarray(w.A)[0]
        pad = M - 1
        pu = np.pad(u, pad)
        pe = np.pad(et, pad)
        out = np.zeros(grid.shape)
        for i, k in enumerate(range(-(M - 1), M)):
            if k == 0 or A[i] == 0:
                continue
            out += A[i] * (pu[pad + k:pad + k + grid.N] - u) * (pe[pad + k:pad + k + grid.N] - et)
        return out[None]
    # 2D: expand the product; the constant term vanishes because A is odd
    return np.stack([corr(u * et, w.A[a]) - et * corr(u, w.A[a]) - u * corr(et, w.A[a]) for a in range(n)])


def nl_divergence(eta: GridField, phi: GridField, alpha: float, b: BackendSpec = DIRECT) -> OperatorResult:
    """Bilinear remainder of ``div^alpha(eta phi)``.

    ``mu * int (y - x).(phi(y) - phi(x)) (eta(y) - eta(x)) |y - x|^(-n-alpha-1) dy``;
    no principal value is needed.  ``eta`` is extended by its rim value.
    """
    alpha = _check_alpha(alpha)
    _check_rank(eta, "scalar", "nl_divergence")
    _check_rank(phi, "vector", "nl_divergence")
    if eta.grid != phi.grid:
        raise ValueError("grid mismatch")
    g, n = eta.grid, eta.grid.dim
    mu = C.mu(n, alpha)
    e = _edge_value(eta.values)
    with logged("nl_divergence", alpha, b, g, {}) as box:
        out = np.zeros(g.shape)
        for a in range(n):
            out += _nl_core(phi.values[a], eta.values, e if e is not None else 0.0, g, alpha, b)[a]
        out *= mu
        box["est_error"] = 0.0
    ext = None if e is None else Exterior(g, "vector", n + alpha + 1.0, mu, phi.values * (eta.values - e), contract=True)
    return OperatorResult(GridField(g, out, _tail(g)), b, 0.0, ext)


def nl_gradient(f: GridField, eta: GridField, alpha: float, b: BackendSpec = DIRECT) -> OperatorResult:
    """Bilinear remainder of ``grad^alpha(f eta)`` (vector result)."""
    alpha = _check_alpha(alpha)
    _check_rank(f, "scalar", "nl_gradient")
    _check_rank(eta, "scalar", "nl_gradient")
    if eta.grid != f.grid:
        raise ValueError("grid mismatch")
    g, n = f.grid, f.grid.dim
    mu = C.mu(n, alpha)
    e = _edge_value(eta.values)
    with logged("nl_gradient", alpha, b, g, {}) as box:
        out = mu * _nl_core(f.values, eta.values, e if e is not None else 0.0, g, alpha, b)
        box["est_error"] = 0.0
    ext = None if e is None else Exterior(g, "vector", n + alpha + 1.0, mu, (f.values * (eta.values - e))[None])
    return OperatorResult(GridField(g, out, _tail(g)), b, 0.0, ext)


# ---------------------------------------------------------------- maximal function

def ball_average_kernel(grid: Grid, r: float) -> np.ndarray:
    """Normalised weights of the ball of radius ``r`` on the cell lattice.

    In 1D the weights are exact cell-overlap fractions; in 2D cells are
    included by centre.
    """
    h = grid.h
    m = int(np.ceil(r / h - 0.5))
    k = np.arange(-m, m + 1)
    if grid.dim == 1:
        lo = np.maximum(k * h - h / 2, -r)
        hi = np.minimum(k * h + h / 2, r)
        w = np.clip(hi - lo, 0.0, None)
    else:
        K1, K2 = np.meshgrid(k, k, indexing="ij")
        w = ((K1 * h) ** 2 + (K2 * h) ** 2 <= r * r).astype(float)
    return w / w.sum()


def maximal_function(f: GridField, radii=None) -> GridField:
    """Centred maximal function over dyadic radii ``h/2 * 2^j`` up to the box size."""
    g = f.grid
    a = f.norm()
    if radii is None:
        radii = g.h / 2 * 2.0 ** np.arange(0, int(np.log2(2 * g.N)) + 1)
    out = a.copy()
    for r in radii:
        out = np.maximum(out, corr(a, ball_average_kernel(g, r)))
    return GridField(g, out, _tail(g))
