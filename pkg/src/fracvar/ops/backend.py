"""Backend selection, operator results and call logging."""

from __future__ import annotations

import json
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass

from ..grid import Grid, GridField
from .exterior import Exterior

logger = logging.getLogger("fracvar.ops")


@dataclass(frozen=True)
class BackendSpec:
    """How an operator is evaluated.

    Parameters
    ----------
    kind : {"direct", "spectral"}
        Real-space product quadrature or Fourier multiplier.
    exclusion_radius : int
        Direct only. Radius (in cells) of the zone around the target cell
        integrated with high-order rules; 1 means only the centre cell is
        treated analytically.
    far_field_radius : int or None
        Direct only. Offsets beyond this many cells are dropped from the
        kernel sum (``None`` keeps the whole box).
    local_correction : bool
        Direct only. Include the linear-reconstruction (slope) terms.
    slope_limiter : bool
        Direct only. Minmod slopes instead of central differences.  Exact
        on piecewise constants with cell-aligned jumps, but nonlinear, so
        gradient and divergence are then only approximately adjoint.
    zero_padding_factor : int
        Spectral only. Transform length is this multiple of ``N``.
    periodic : bool
        Spectral only. Treat the box as a torus (no padding).
    zero_mode_policy : {"zero", "reject_nonzero_mean"}
        Spectral only. What to do with the singular zero mode of ``I_alpha``.
    image_correction : bool
        Spectral only. Subtract the periodic images that the padded torus
        adds to power-law tails (gradient, divergence, Laplacian and Riesz
        transform).  Off, the result is the pure multiplier, which is what
        exact composition identities need.
    """

    kind: str = "spectral"
    exclusion_radius: int = 1
    far_field_radius: int | None = None
    local_correction: bool = True
    slope_limiter: bool = False
    zero_padding_factor: int = 2
    periodic: bool = False
    zero_mode_policy: str = "zero"
    image_correction: bool = True

    def __post_init__(self):
        if self.kind not in ("direct", "spectral"):
            raise ValueError(f"unknown backend {self.kind!r}")
        if self.exclusion_radius < 1:
            raise ValueError("exclusion_radius must be at least one cell")
        if self.far_field_radius is not None and self.far_field_radius < 1:
            raise ValueError("far_field_radius must be positive")
        if self.zero_padding_factor < 2 and not self.periodic:
            raise ValueError("zero padding factor must be at least 2")
        if self.zero_mode_policy not in ("zero", "reject_nonzero_mean"):
            raise ValueError(f"unknown zero-mode policy {self.zero_mode_policy!r}")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


DIRECT = BackendSpec("direct")
SPECTRAL = BackendSpec("spectral")
MULTIPLIER = BackendSpec("spectral", image_correction=False)
PERIODIC = BackendSpec("spectral", periodic=True)


@dataclass(frozen=True)
class OperatorResult:
    """Operator output on the box plus a handle for exterior evaluation."""

    field: GridField
    backend: BackendSpec
    est_error: float
    exterior: Exterior | None = None

    def __post_init__(self):
        if not self.est_error >= 0:
            raise ValueError("est_error must be nonnegative")

    @property
    def values(self):
        return self.field.values

    @property
    def grid(self) -> Grid:
        return self.field.grid


@contextmanager
def logged(op: str, alpha: float, backend: BackendSpec, grid: Grid, box: dict):
    """Time an operator call and emit one JSON line; ``box['est_error']`` is read at exit."""
    t0 = time.perf_counter()
    yield box
    if logger.isEnabledFor(logging.INFO):
        logger.info(json.dumps({
            "op": op, "alpha": alpha, "backend": backend.kind,
            "grid": {"dim": grid.dim, "N": grid.N, "L": grid.L},
            "est_error": box.get("est_error", 0.0),
            "wall_ms": round(1e3 * (time.perf_counter() - t0), 3),
        }))
