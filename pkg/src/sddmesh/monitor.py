"""Mesh density sampling, the drift field it induces, and bilinear interpolation.

The mesh density function w = 1/rho marks where resolution is wanted; the
parabolic generator moves nodes along the drift b = -grad(w)/w.  Both are
frozen once per time step on the grid and interpolated along stochastic paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import ScalarField, StructuredGrid

# rho(t, X, Y) -> density array, vectorized over node coordinate arrays
MonitorFn = Callable[[float, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RotatingRingParams:
    """Amplitude and sharpness of the built-in rotating-ring density profile."""

    alpha: float = 10.0
    beta: float = -50.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")


def ring_density(t: float, x, y, params: RotatingRingParams):
    """Rotating-ring density: a ring of radius 0.1 orbiting (0.5, 0.5) with period 1.

    rho = 1 + alpha * exp(beta * |(x - cx)^2 + (y - cy)^2 - 1/100|) with the ring
    center at (1/2 + cos(2 pi t)/4, 1/2 + sin(2 pi t)/4).  rho >= 1 whenever
    alpha >= 0 and beta <= 0.
    """
    cx = 0.5 + 0.25 * np.cos(2.0 * np.pi * t)
    cy = 0.5 + 0.25 * np.sin(2.0 * np.pi * t)
    r2 = (np.asarray(x) - cx) ** 2 + (np.asarray(y) - cy) ** 2
    return 1.0 + params.alpha * np.exp(params.beta * np.abs(r2 - 0.01))


def rho(t: float, p, params: RotatingRingParams) -> float:
    """Point evaluation of the rotating-ring density."""
    return float(ring_density(t, p[0], p[1], params))


def make_rotating_ring(params: RotatingRingParams) -> MonitorFn:
    """Bind ring parameters into a MonitorFn usable by sample_monitor."""

    def fn(t: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return ring_density(t, x, y, params)

    return fn


@dataclass(frozen=True)
class MonitorField:
    """Mesh density weight w = 1/rho sampled on the grid and frozen at t_frozen."""

    t_frozen: float
    weight: ScalarField


@dataclass(frozen=True)
class DriftField:
    """Nodal drift b = -grad(w)/w; bx, by are its components."""

    bx: ScalarField
    by: ScalarField

    @property
    def grid(self) -> StructuredGrid:
        return self.bx.grid


def sample_monitor(t: float, grid: StructuredGrid, monitor: MonitorFn) -> MonitorField:
    """Evaluate w = 1/rho(t, x, y) at every node; the result is held constant
    for the rest of the time step."""
    X, Y = grid.meshgrid()
    density = np.asarray(monitor(t, X, Y), dtype=float)
    if density.shape != X.shape:
        raise ValueError(f"monitor returned shape {density.shape}, expected {X.shape}")
    if not np.all(np.isfinite(density)) or np.any(density <= 0.0):
        raise ValueError("monitor density must be finite and strictly positive")
    return MonitorField(t_frozen=t, weight=ScalarField(grid, 1.0 / density))


def drift_from_monitor(mon: MonitorField) -> DriftField:
    """Finite-difference drift b = -grad(w)/w at the nodes.

    Centered differences at interior nodes, first-order one-sided ones on the
    boundary rows/columns.  Boundary drift only matters for paths about to
    exit, whose contribution is dominated by the boundary term.
    """
    grid = mon.weight.grid
    w = mon.weight.values
    if np.any(w <= 0.0):
        raise ValueError("monitor weight must be strictly positive")
    dwdx = np.gradient(w, grid.hx, axis=0, edge_order=1)
    dwdy = np.gradient(w, grid.hy, axis=1, edge_order=1)
    return DriftField(
        bx=ScalarField(grid, -dwdx / w),
        by=ScalarField(grid, -dwdy / w),
    )


def interp_bilinear(field: ScalarField, x, y):
    """Bilinear interpolation of a nodal field at point(s) inside the domain.

    Exact at nodes and for fields of the form a + bx + cy + dxy (up to
    roundoff); never extrapolates.  Raises if any point lies outside the
    closed bounding rectangle.
    """
    grid = field.grid
    d = grid.domain
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scalar = x.ndim == 0 and y.ndim == 0
    if np.any((x < d.x_l) | (x > d.x_r) | (y < d.y_l) | (y > d.y_u)):
        raise ValueError("bilinear interpolation point outside the grid rectangle")

    u = (x - d.x_l) / grid.hx
    v = (y - d.y_l) / grid.hy
    i0 = np.clip(np.floor(u).astype(np.intp), 0, grid.nx - 2)
    j0 = np.clip(np.floor(v).astype(np.intp), 0, grid.ny - 2)
    tx = np.clip(u - i0, 0.0, 1.0)
    ty = np.clip(v - j0, 0.0, 1.0)

    f = field.values
    f00 = f[i0, j0]
    f10 = f[i0 + 1, j0]
    f01 = f[i0, j0 + 1]
    f11 = f[i0 + 1, j0 + 1]
    out = (
        f00 * (1.0 - tx) * (1.0 - ty)
        + f10 * tx * (1.0 - ty)
        + f01 * (1.0 - tx) * ty
        + f11 * tx * ty
    )
    return float(out) if scalar else out
