"""Mesh diagnostics: fold detection, mesh-to-mesh distances, MC rate fits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import MeshState, initial_mesh


class MeshDistance(NamedTuple):
    l_inf: float
    l_2: float


@dataclass(frozen=True)
class QualityReport:
    min_jacobian: float
    max_node_displacement_from_uniform: float
    fold_free: bool


def discrete_jacobian(state: MeshState) -> float:
    """Minimum of J = xi_x*eta_y - xi_y*eta_x over interior nodes.

    Centered differences; a positive minimum certifies a fold-free mesh.
    The uniform mesh on the unit square has J = 1 everywhere.
    """
    grid = state.grid
    if grid.nx < 3 or grid.ny < 3:
        raise ValueError("jacobian needs at least 3 nodes per axis")
    xi = state.xi.values
    eta = state.eta.values
    two_hx = 2.0 * grid.hx
    two_hy = 2.0 * grid.hy
    xi_x = (xi[2:, 1:-1] - xi[:-2, 1:-1]) / two_hx
    xi_y = (xi[1:-1, 2:] - xi[1:-1, :-2]) / two_hy
    eta_x = (eta[2:, 1:-1] - eta[:-2, 1:-1]) / two_hx
    eta_y = (eta[1:-1, 2:] - eta[1:-1, :-2]) / two_hy
    return float(np.min(xi_x * eta_y - xi_y * eta_x))


def mesh_distance(a: MeshState, b: MeshState) -> MeshDistance:
    """Max and RMS difference over both coordinate fields."""
    if (a.grid.nx, a.grid.ny) != (b.grid.nx, b.grid.ny) or a.grid.domain != b.grid.domain:
        raise ValueError("mesh distance requires matching grids")
    d_xi = a.xi.values - b.xi.values
    d_eta = a.eta.values - b.eta.values
    stacked = np.concatenate([d_xi.ravel(), d_eta.ravel()])
    return MeshDistance(
        l_inf=float(np.max(np.abs(stacked))),
        l_2=float(np.sqrt(np.mean(stacked**2))),
    )


def quality_report(state: MeshState) -> QualityReport:
    """Fold check plus the deviation from the uniform mesh, in computational
    coordinates (the pipeline solves for xi/eta, not node positions)."""
    uniform = initial_mesh(state.grid)
    dev = max(
        float(np.max(np.abs(state.xi.values - uniform.xi.values))),
        float(np.max(np.abs(state.eta.values - uniform.eta.values))),
    )
    min_j = discrete_jacobian(state)
    return QualityReport(
        min_jacobian=min_j,
        max_node_displacement_from_uniform=dev,
        fold_free=min_j > 0.0,
    )


def mc_rate(errors) -> float:
    """Least-squares slope of log(error) against log(N).

    Input is a sequence of (N, error) pairs with at least 3 distinct N and
    positive errors; a slope near -1/2 is the Monte Carlo signature.
    """
    pts = [(float(n), float(e)) for n, e in errors]
    if len(pts) < 3:
        raise ValueError("rate fit needs at least 3 samples")
    ns = np.array([p[0] for p in pts])
    es = np.array([p[1] for p in pts])
    if len(np.unique(ns)) < len(ns):
        raise ValueError("rate fit needs distinct N values")
    if np.any(es <= 0.0) or np.any(ns <= 0.0):
        raise ValueError("rate fit needs positive N and errors")
    slope, _ = np.polyfit(np.log(ns), np.log(es), 1)
    return float(slope)
