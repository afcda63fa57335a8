"""Physical domain, structured grids, and the mesh-state containers shared by all solvers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PhysicalDomain:
    """Axis-aligned rectangle [x_l, x_r] x [y_l, y_u] in physical coordinates."""

    x_l: float = 0.0
    x_r: float = 1.0
    y_l: float = 0.0
    y_u: float = 1.0

    def __post_init__(self):
        if not (self.x_l < self.x_r and self.y_l < self.y_u):
            raise ValueError(
                f"degenerate domain: need x_l < x_r and y_l < y_u, "
                f"got [{self.x_l}, {self.x_r}] x [{self.y_l}, {self.y_u}]"
            )

    @property
    def width(self) -> float:
        return self.x_r - self.x_l

    @property
    def height(self) -> float:
        return self.y_u - self.y_l

    def contains(self, p) -> bool:
        """True iff p lies strictly inside; points on the boundary count as exited."""
        x, y = p
        return self.x_l < x < self.x_r and self.y_l < y < self.y_u

    def contains_many(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Vectorized strict-interior test."""
        return (self.x_l < x) & (x < self.x_r) & (self.y_l < y) & (y < self.y_u)


UNIT_SQUARE = PhysicalDomain(0.0, 1.0, 0.0, 1.0)


@dataclass(frozen=True)
class StructuredGrid:
    """Uniform node-centered grid over a physical domain, boundary nodes included.

    Node (i, j) sits at (x_l + i*hx, y_l + j*hy); node counts include both
    boundary lines, so a 41x41 grid has spacing 1/40 on the unit square.
    """

    domain: PhysicalDomain
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"grid needs at least 2 nodes per axis, got {self.nx}x{self.ny}")

    @property
    def hx(self) -> float:
        return self.domain.width / (self.nx - 1)

    @property
    def hy(self) -> float:
        return self.domain.height / (self.ny - 1)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.domain.x_l, self.domain.x_r, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.domain.y_l, self.domain.y_u, self.ny)

    def node_coords(self, i: int, j: int) -> tuple[float, float]:
        """Physical coordinates of node (i, j); raises IndexError on a caller bug."""
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise IndexError(f"node ({i}, {j}) outside {self.nx}x{self.ny} grid")
        return float(self.xs[i]), float(self.ys[j])

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) arrays of shape (nx, ny) with X[i, j] = x coordinate of node (i, j)."""
        return np.meshgrid(self.xs, self.ys, indexing="ij")


def node_coords(grid: StructuredGrid, i: int, j: int) -> tuple[float, float]:
    return grid.node_coords(i, j)


@dataclass(frozen=True)
class ScalarField:
    """Nodal values of a scalar quantity on a structured grid.

    The value array is locked after construction; fields are shared read-only
    across worker threads and processes.
    """

    grid: StructuredGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(
                f"field shape {vals.shape} does not match grid {self.grid.nx}x{self.grid.ny}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class MeshState:
    """Computational coordinates (xi, eta) on the physical grid at time t."""

    t: float
    xi: ScalarField
    eta: ScalarField

    def __post_init__(self):
        if self.xi.grid is not self.eta.grid and self.xi.grid != self.eta.grid:
            raise ValueError("xi and eta live on different grids")

    @property
    def grid(self) -> StructuredGrid:
        return self.xi.grid


def initial_mesh(grid: StructuredGrid) -> MeshState:
    """Uniform initial mesh: xi, eta are the affinely normalized physical coordinates.

    On the unit square this is the identity map xi = x, eta = y; the boundary
    columns/rows carry exactly 0 and 1.
    """
    d = grid.domain
    X, Y = grid.meshgrid()
    xi = (X - d.x_l) / d.width
    eta = (Y - d.y_l) / d.height
    return MeshState(t=0.0, xi=ScalarField(grid, xi), eta=ScalarField(grid, eta))
