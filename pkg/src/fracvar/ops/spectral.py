"""Fourier-multiplier evaluation on a zero-padded (or periodic) grid."""

from __future__ import annotations

import os
from functools import lru_cache

import numpy as np
from scipy import fft, special

from ..grid import Grid
from .backend import BackendSpec
from .weights import _square_complement_integral


def frequencies(grid: Grid, P: int) -> tuple[np.ndarray, ...]:
    """Frequency mesh (cycles per unit length) of a length-``P`` transform."""
    xi = fft.fftfreq(P, d=grid.h)
    return tuple(np.meshgrid(*([xi] * grid.dim), indexing="ij"))


def nyquist_mask(grid: Grid, P: int) -> np.ndarray:
    """True on modes carrying a Nyquist index along some axis."""
    idx = np.zeros(P, dtype=bool)
    if P % 2 == 0:
        idx[P // 2] = True
    masks = np.meshgrid(*([idx] * grid.dim), indexing="ij")
    return np.logical_or.reduce(masks)


def fft_workers() -> int:
    """FFT thread count: ``FRACVAR_THREADS`` if set, else all cores."""
    v = os.environ.get("FRACVAR_THREADS")
    if not v:
        return -1
    n = int(v)
    if n < 1:
        raise ValueError("FRACVAR_THREADS must be a positive integer")
    return n


def transform_length(grid: Grid, b: BackendSpec) -> int:
    return grid.N if b.periodic else grid.N * b.zero_padding_factor


def apply_symbols(src: np.ndarray, grid: Grid, b: BackendSpec, symbols) -> tuple[np.ndarray, float]:
    """Apply multipliers to source components and return cropped outputs.

    Parameters
    ----------
    src : ndarray, shape (ncomp, *grid.shape)
    symbols : callable
        ``symbols(xi_mesh) -> array (nout, ncomp, *mesh_shape)``; output
        component ``a`` is ``sum_c symbol[a, c] * src_hat[c]``.

    Returns
    -------
    out : ndarray, shape (nout, *grid.shape)
    leak : float
        Norm of the output that fell outside the box on the padded torus,
        relative to the total; a rough aliasing indicator.
    """
    P = transform_length(grid, b)
    axes = tuple(range(1, grid.dim + 1))
    shape = (src.shape[0],) + (P,) * grid.dim
    padded = np.zeros(shape)
    padded[(slice(None),) + (slice(0, grid.N),) * grid.dim] = src
    S = fft.fftn(padded, axes=axes, workers=fft_workers())
    m = symbols(frequencies(grid, P))
    F = np.einsum("ac...,c...->a...", m, S)
    full = fft.ifftn(F, axes=axes, workers=fft_workers()).real
    crop = full[(slice(None),) + (slice(0, grid.N),) * grid.dim]
    tot = float(np.linalg.norm(full))
    leak = 0.0 if tot == 0 else float(np.sqrt(max(tot**2 - np.linalg.norm(crop) ** 2, 0.0))) / tot
    return crop, leak


def radial(xi) -> np.ndarray:
    return 2.0 * np.pi * np.sqrt(sum(x * x for x in xi))


def _safe_power(k: np.ndarray, p: float) -> np.ndarray:
    out = np.zeros_like(k)
    nz = k > 0
    out[nz] = k[nz] ** p
    return out


def gradient_symbol(alpha: float, grid: Grid, P: int):
    """Components ``2 pi i xi_a |2 pi xi|^(alpha - 1)`` (odd; Nyquist zeroed)."""
    def sym(xi):
        k = radial(xi)
        w = _safe_power(k, alpha - 1.0)
        ny = nyquist_mask(grid, P)
        comps = []
        for x in xi:
            s = 2j * np.pi * x * w
            s[ny] = 0.0
            comps.append(s)
        return np.stack(comps)
    return sym


def laplacian_symbol(s: float):
    def sym(xi):
        return _safe_power(radial(xi), s)
    return sym


def riesz_potential_symbol(alpha: float):
    def sym(xi):
        return _safe_power(radial(xi), -alpha)
    return sym


def riesz_transform_symbol(grid: Grid, P: int):
    """Components ``i xi_a / |xi|``, the multiplier of the gradient of ``I_1``."""
    def sym(xi):
        k = radial(xi)
        inv = _safe_power(k, -1.0)
        ny = nyquist_mask(grid, P)
        comps = []
        for x in xi:
            s = 2j * np.pi * x * inv
            s[ny] = 0.0
            comps.append(s)
        return np.stack(comps)
    return sym


# ---------------------------------------------------------------- periodic images

IMAGE_SHELLS_2D = 8


@lru_cache(maxsize=32)
def image_kernel(form: str, power: float, grid: Grid, P: int) -> np.ndarray:
    """``sum_{m != 0} k(d + m P h)`` on the offset lattice ``d = -(N-1)..(N-1)`` cells.

    ``k(z) = z |z|^-power`` (``form="vector"``, leading component axis) or
    ``|z|^-power`` (``form="radial"``).  In 1D the sums are Hurwitz zeta
    (digamma when the vector exponent is 1); in 2D the lattice is summed
    over ``IMAGE_SHELLS_2D`` square shells, the radial kernel getting the
    continuum tail beyond them.
    """
    N, h = grid.N, grid.h
    Lp = P * h
    k = np.arange(-(N - 1), N) * h
    if grid.dim == 1:
        a = k / Lp
        if form == "radial":
            G = Lp**-power * (special.zeta(power, 1 + a) + special.zeta(power, 1 - a))
            return G
        q = power - 1.0
        if abs(q - 1.0) < 1e-12:
            G = (special.digamma(1 - a) - special.digamma(1 + a)) / Lp
        else:
            G = Lp**-q * (special.zeta(q, 1 + a) - special.zeta(q, 1 - a))
        return G[None]
    D1, D2 = np.meshgrid(k, k, indexing="ij")
    M = IMAGE_SHELLS_2D
    out = np.zeros((2,) + D1.shape) if form == "vector" else np.zeros(D1.shape)
    for m1 in range(-M, M + 1):
        for m2 in range(-M, M + 1):
            if m1 == 0 and m2 == 0:
                continue
            z1 = D1 + m1 * Lp
            z2 = D2 + m2 * Lp
            w = (z1 * z1 + z2 * z2) ** (-power / 2.0)
            if form == "radial":
                out += w
            else:
                out[0] += z1 * w
                out[1] += z2 * w
    if form == "radial":
        out += _square_complement_integral((2 * M + 1) * Lp, power - 2.0) / Lp**2
    return out
