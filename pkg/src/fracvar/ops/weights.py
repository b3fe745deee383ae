"""Cell-integrated kernel weights for the direct (real-space) backend.

For a homogeneous kernel ``K`` and cell offset ``k`` we need

* ``A_k = int_{cell k} K(z) dz``                      (piecewise-constant part)
* ``B_k = int_{cell k} K(z) (z - k h) dz``            (linear-reconstruction part)

plus a few centre-cell moments.  In 1D all of them are closed form; in 2D
off-centre cells use tensor Gauss-Legendre rules whose order grows near
the singularity, and the centre cell uses the polar formula for the
square.

Weights are laid out on the offset lattice ``-(M-1) .. (M-1)`` per axis,
offset 0 sitting at index ``M-1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

KINDS = ("grad", "abs", "lap", "riesz")


@dataclass(frozen=True)
class KernelWeights:
    kind: str
    dim: int
    order: float
    h: float
    M: int
    A: np.ndarray          # grad: (dim, *offsets); others: offsets
    B: np.ndarray          # grad: (dim, dim, *offsets); others: (dim, *offsets)
    centre: dict


def _power_moments_1d(k: np.ndarray, h: float, gamma: float):
    """int z^-gamma and int z^-gamma (z - kh) over [(k-1/2)h, (k+1/2)h], k > 0."""
    a = (k - 0.5) * h
    b = (k + 0.5) * h
    c = k * h

    def prim(z, p):
        # int z^(p-1) dz
        if abs(p) < 1e-14:
            return np.log(z)
        return z**p / p

    m0 = prim(b, 1.0 - gamma) - prim(a, 1.0 - gamma)
    m1 = prim(b, 2.0 - gamma) - prim(a, 2.0 - gamma) - c * m0
    return m0, m1


def _weights_1d(kind: str, order: float, h: float, M: int) -> KernelWeights:
    k = np.arange(-(M - 1), M)
    kk = np.abs(k).astype(float)
    pos = kk > 0
    sgn = np.sign(k).astype(float)
    A = np.zeros(k.shape)
    B = np.zeros(k.shape)
    centre = {}
    if kind in ("grad", "abs"):
        gamma = 1.0 + order
        m0, m1 = _power_moments_1d(kk[pos], h, gamma)
        A[pos] = m0 * (sgn[pos] if kind == "grad" else 1.0)
        B[pos] = m1 if kind == "grad" else np.abs(m1)
        # int_{cell 0} |z|^(1 - order) dz: centre slope moment
        centre["b0"] = 2.0 * (h / 2.0) ** (1.0 - order) / (1.0 - order)
        B[M - 1] = centre["b0"]
        if kind == "grad":
            return KernelWeights(kind, 1, order, h, M, A[None], B[None, None], centre)
        return KernelWeights(kind, 1, order, h, M, A, B[None], centre)
    if kind == "lap":
        gamma = 1.0 + order
        m0, m1 = _power_moments_1d(kk[pos], h, gamma)
        A[pos] = m0
        B[pos] = sgn[pos] * m1
        centre["T0"] = 2.0 * (h / 2.0) ** (-order) / order
        centre["C2"] = (h / 2.0) ** (2.0 - order) / (2.0 - order)
        return KernelWeights(kind, 1, order, h, M, A, B[None], centre)
    if kind == "riesz":
        gamma = 1.0 - order
        m0, m1 = _power_moments_1d(kk[pos], h, gamma)
        A[pos] = m0
        B[pos] = sgn[pos] * m1
        A[M - 1] = 2.0 * (h / 2.0) ** order / order
        return KernelWeights(kind, 1, order, h, M, A, B[None], centre)
    raise ValueError(f"unknown kernel kind {kind!r}")


def _square_power_integral(h: float, gamma: float) -> float:
    """int over the centred square of side h of |z|^-gamma, gamma < 2."""
    val, _ = quad(lambda t: (h / (2 * math.cos(t))) ** (2 - gamma), 0.0, math.pi / 4, epsabs=0, epsrel=1e-13)
    return 8.0 * val / (2.0 - gamma)


def _square_complement_integral(h: float, s: float) -> float:
    """int over the complement of the centred square of |z|^(-2-s)."""
    val, _ = quad(lambda t: (h / (2 * math.cos(t))) ** (-s), 0.0, math.pi / 4, epsabs=0, epsrel=1e-13)
    return 8.0 * val / s


def _kernel_2d(kind: str, order: float, z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
    r2 = z1 * z1 + z2 * z2
    if kind == "grad":
        w = r2 ** (-(3.0 + order) / 2.0)
        return np.stack([z1 * w, z2 * w])
    if kind == "abs":
        return (r2 ** (-(2.0 + order) / 2.0))[None]
    if kind == "lap":
        return (r2 ** (-(2.0 + order) / 2.0))[None]
    if kind == "riesz":
        return (r2 ** ((order - 2.0) / 2.0))[None]
    raise ValueError(kind)


def _cell_rule(kind, order, h, k1, k2, q):
    """Gauss-Legendre moments over the cells at integer offsets (k1, k2)."""
    x, w = np.polynomial.legendre.leggauss(q)
    x = 0.5 * h * x
    w = 0.5 * h * w
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    c1 = (k1 * h)[:, None, None]
    c2 = (k2 * h)[:, None, None]
    vals = _kernel_2d(kind, order, c1 + X1[None], c2 + X2[None])  # (comp, cells, q, q)
    A = np.sum(vals * W, axis=(-2, -1))
    B1 = np.sum(vals * (W * X1), axis=(-2, -1))
    B2 = np.sum(vals * (W * X2), axis=(-2, -1))
    return A, np.stack([B1, B2], axis=1)  # (comp, cells), (comp, 2, cells)


def _weights_2d(kind: str, order: float, h: float, M: int, near: int) -> KernelWeights:
    k = np.arange(-(M - 1), M)
    K1, K2 = np.meshgrid(k, k, indexing="ij")
    dist = np.maximum(np.abs(K1), np.abs(K2))
    ncomp = 2 if kind == "grad" else 1
    A = np.zeros((ncomp,) + K1.shape)
    B = np.zeros((ncomp, 2) + K1.shape)
    zones = [((dist >= 1) & (dist <= near), 24), ((dist > near) & (dist <= 4 * near), 6),
             (dist > 4 * near, 3)]
    for mask, q in zones:
        if not np.any(mask):
            continue
        a, b = _cell_rule(kind, order, h, K1[mask].astype(float), K2[mask].astype(float), q)
        A[:, mask] = a
        B[:, :, mask] = b
    centre = {}
    c = (M - 1, M - 1)
    if kind == "grad":
        b0 = 0.5 * _square_power_integral(h, 1.0 + order)
        centre["b0"] = b0
        B[0, 0][c] = b0
        B[1, 1][c] = b0
        return KernelWeights(kind, 2, order, h, M, A, B, centre)
    if kind == "abs":
        # |B_k| bounds the slope term; centre uses |s.z| <= |s||z|
        centre["b0"] = _square_power_integral(h, 1.0 + order)
        g = kernel_weights("grad", 2, order, h, M, near)
        Bn = np.sqrt(np.sum(np.asarray(g.B) ** 2, axis=(0, 1)))
        Bn[c] = centre["b0"]
        return KernelWeights(kind, 2, order, h, M, A[0], Bn[None], centre)
    if kind == "lap":
        centre["T0"] = _square_complement_integral(h, order)
        centre["C2"] = 0.25 * _square_power_integral(h, order)
        return KernelWeights(kind, 2, order, h, M, A[0], B[0], centre)
    if kind == "riesz":
        A[0][c] = _square_power_integral(h, 2.0 - order)
        return KernelWeights(kind, 2, order, h, M, A[0], B[0], centre)
    raise ValueError(kind)


@lru_cache(maxsize=64)
def kernel_weights(kind: str, dim: int, order: float, h: float, M: int, near: int = 3) -> KernelWeights:
    """Cached weights for offsets up to ``M - 1`` cells in each direction."""
    if kind not in KINDS:
        raise ValueError(f"unknown kernel kind {kind!r}")
    if dim == 1:
        w = _weights_1d(kind, order, h, M)
    else:
        w = _weights_2d(kind, order, h, M, max(3, near))
    for arr in (w.A, w.B):
        arr.flags.writeable = False
    return w

