"""Dirichlet data on the physical boundary.

xi is pinned to 0/1 on the left/right edges and eta to 0/1 on the bottom/top;
the remaining profiles come from 1D equidistribution solves along each edge,
refreshed every time step from the frozen monitor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .geometry import StructuredGrid
from .monitor import MonitorField

# classification tolerance for "on the boundary" queries; exit points produced
# by the path simulator land exactly on the rectangle
ON_BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class BoundaryData:
    """Per-step boundary profiles for xi and eta.

    xi_bottom/xi_top run along y = y_l and y = y_u (length nx); eta_left/
    eta_right along x = x_l and x = x_r (length ny).  The other four profiles
    are the constants xi = 0 (left), xi = 1 (right), eta = 0 (bottom),
    eta = 1 (top).  Each array increases monotonically from exactly 0 to
    exactly 1.
    """

    t: float
    grid: StructuredGrid
    xi_bottom: np.ndarray
    xi_top: np.ndarray
    eta_left: np.ndarray
    eta_right: np.ndarray

    def __post_init__(self):
        for name, arr, n in (
            ("xi_bottom", self.xi_bottom, self.grid.nx),
            ("xi_top", self.xi_top, self.grid.nx),
            ("eta_left", self.eta_left, self.grid.ny),
            ("eta_right", self.eta_right, self.grid.ny),
        ):
            a = np.asarray(arr, dtype=float)
            if a.shape != (n,):
                raise ValueError(f"{name} has length {a.shape}, expected ({n},)")
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def canvases(self) -> tuple[np.ndarray, np.ndarray]:
        """Full-grid (nx, ny) arrays holding the boundary values, NaN elsewhere.

        Used as Dirichlet input for the deterministic solvers; interface
        values are written on top by the driver.
        """
        nx, ny = self.grid.nx, self.grid.ny
        xi = np.full((nx, ny), np.nan)
        eta = np.full((nx, ny), np.nan)
        xi[:, 0] = self.xi_bottom
        xi[:, ny - 1] = self.xi_top
        xi[0, :] = 0.0
        xi[nx - 1, :] = 1.0
        eta[0, :] = self.eta_left
        eta[nx - 1, :] = self.eta_right
        eta[:, 0] = 0.0
        eta[:, ny - 1] = 1.0
        return xi, eta


def solve_edge_1d(w_edge: np.ndarray) -> np.ndarray:
    """1D equidistribution solve ((1/w) u_s)_s = 0 with u(0) = 0, u(end) = 1.

    Conservative three-point discretization on the edge nodes with face
    coefficients taken as the arithmetic mean of 1/w at adjacent nodes;
    solved with a banded tridiagonal factorization.  The solution is strictly
    monotone for positive weights and invariant under scaling w -> c*w.
    """
    w = np.asarray(w_edge, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise ValueError("edge weight must be a 1D array with at least 2 nodes")
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        raise ValueError("edge weight must be finite and strictly positive")

    n = w.size
    u = np.empty(n)
    u[0] = 0.0
    u[-1] = 1.0
    if n == 2:
        return u

    inv_w = 1.0 / w
    face = 0.5 * (inv_w[:-1] + inv_w[1:])  # (1/w) at faces i+1/2, length n-1

    m = n - 2  # interior unknowns u_1 .. u_{n-2}
    lower = face[:-1]  # coefficient of u_{i-1}
    upper = face[1:]  # coefficient of u_{i+1}
    diag = -(lower + upper)
    rhs = np.zeros(m)
    rhs[-1] -= face[-1] * 1.0  # eliminate u_{n-1} = 1

    ab = np.zeros((3, m))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    u[1:-1] = solve_banded((1, 1), ab, rhs)
    return u


def build_boundary_data(t: float, mon: MonitorField) -> BoundaryData:
    """Refresh all four boundary profiles from the frozen monitor weight."""
    grid = mon.weight.grid
    w = mon.weight.values
    return BoundaryData(
        t=t,
        grid=grid,
        xi_bottom=solve_edge_1d(w[:, 0]),
        xi_top=solve_edge_1d(w[:, -1]),
        eta_left=solve_edge_1d(w[0, :]),
        eta_right=solve_edge_1d(w[-1, :]),
    )


def _edge_masks(grid: StructuredGrid, x: np.ndarray, y: np.ndarray, tol: float):
    d = grid.domain
    on_left = np.abs(x - d.x_l) <= tol
    on_right = np.abs(x - d.x_r) <= tol
    on_bottom = np.abs(y - d.y_l) <= tol
    on_top = np.abs(y - d.y_u) <= tol
    return on_left, on_right, on_bottom, on_top


def eval_boundary_many(bd: BoundaryData, which: str, x, y) -> np.ndarray:
    """Vectorized boundary evaluation; every point must lie on the rectangle.

    `which` selects the field: "xi" or "eta".  On the constant edges the
    pinned value is returned; on the solved edges the 1D profile is linearly
    interpolated.  Corners are consistent from either incident edge.
    """
    if which not in ("xi", "eta"):
        raise ValueError(f"unknown field {which!r}, expected 'xi' or 'eta'")
    grid = bd.grid
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    tol = ON_BOUNDARY_TOL * max(1.0, grid.domain.width, grid.domain.height)
    on_left, on_right, on_bottom, on_top = _edge_masks(grid, x, y, tol)
    if not np.all(on_left | on_right | on_bottom | on_top):
        raise ValueError("boundary evaluation point does not lie on the rectangle")

    out = np.empty(x.shape)
    if which == "xi":
        out[:] = np.interp(x, grid.xs, bd.xi_bottom)
        top = on_top & ~on_bottom
        out[top] = np.interp(x[top], grid.xs, bd.xi_top)
        out[on_left] = 0.0
        out[on_right] = 1.0
    else:
        out[:] = np.interp(y, grid.ys, bd.eta_left)
        right = on_right & ~on_left
        out[right] = np.interp(y[right], grid.ys, bd.eta_right)
        out[on_bottom] = 0.0
        out[on_top] = 1.0
    return out


def eval_boundary(bd: BoundaryData, which: str, p) -> float:
    """Point version of eval_boundary_many."""
    return float(eval_boundary_many(bd, which, [p[0]], [p[1]])[0])
