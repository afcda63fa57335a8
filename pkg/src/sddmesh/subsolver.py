"""Implicit finite-difference solver for the parabolic mesh equations.

Backward Euler on the 5-point Laplacian plus centered drift differences,
applied per subdomain (or to the whole grid as the single-domain reference).
Both coordinate fields share one operator, so each step factors once and
solves twice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import splu

from .boundary import BoundaryData
from .geometry import MeshState, ScalarField, StructuredGrid
from .monitor import DriftField

RESIDUAL_RTOL = 1e-10

IndexRect = tuple[int, int, int, int]  # (i0, i1, j0, j1), inclusive node ranges


@dataclass
class LinearSystem:
    """Backward-Euler system over the interior unknowns of an index rectangle.

    Unknown k = (i - i0 - 1) * n_int_y + (j - j0 - 1); the matrix keeps the
    structurally symmetric 5-point pattern and Dirichlet values are
    eliminated into the right-hand side.
    """

    matrix: object  # scipy CSC
    rhs: np.ndarray
    rect: IndexRect
    shape: tuple[int, int]  # interior unknowns per axis


def _stencil(rect: IndexRect, drift: DriftField, grid: StructuredGrid, dt: float):
    """Neighbor coupling coefficients of dt*L at the interior nodes."""
    i0, i1, j0, j1 = rect
    II, JJ = np.meshgrid(
        np.arange(i0 + 1, i1), np.arange(j0 + 1, j1), indexing="ij"
    )
    bx = drift.bx.values[II, JJ]
    by = drift.by.values[II, JJ]
    hx, hy = grid.hx, grid.hy
    cw = dt * (1.0 / hx**2 - bx / (2.0 * hx))
    ce = dt * (1.0 / hx**2 + bx / (2.0 * hx))
    cs = dt * (1.0 / hy**2 - by / (2.0 * hy))
    cn = dt * (1.0 / hy**2 + by / (2.0 * hy))
    diag = 1.0 + 2.0 * dt * (1.0 / hx**2 + 1.0 / hy**2)
    return II, JJ, cw, ce, cs, cn, diag


def _check_dirichlet(rect: IndexRect, dirichlet: np.ndarray) -> None:
    i0, i1, j0, j1 = rect
    edges = np.concatenate(
        [
            dirichlet[i0, j0 : j1 + 1],
            dirichlet[i1, j0 : j1 + 1],
            dirichlet[i0 : i1 + 1, j0],
            dirichlet[i0 : i1 + 1, j1],
        ]
    )
    if np.any(np.isnan(edges)):
        raise ValueError("missing Dirichlet value on the rectangle edge")


def assemble(
    rect: IndexRect,
    field_n: ScalarField,
    drift: DriftField,
    dt: float,
    dirichlet: np.ndarray,
) -> LinearSystem:
    """Assemble (I - dt*L) u = u^n over the rectangle's interior.

    `dirichlet` is a full-grid array that must hold values on every edge node
    of the rectangle (NaN marks a missing value and raises); its values are
    eliminated into the right-hand side.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    i0, i1, j0, j1 = rect
    grid = field_n.grid
    if not (0 <= i0 < i1 < grid.nx and 0 <= j0 < j1 < grid.ny):
        raise ValueError(f"invalid index rectangle {rect} for grid {grid.nx}x{grid.ny}")
    if i1 - i0 < 2 or j1 - j0 < 2:
        raise ValueError(f"rectangle {rect} has no interior nodes")
    _check_dirichlet(rect, dirichlet)

    II, JJ, cw, ce, cs, cn, diag = _stencil(rect, drift, grid, dt)
    ni, nj = II.shape
    k = np.arange(ni * nj).reshape(ni, nj)

    rhs = field_n.values[II, JJ].astype(float).ravel()
    rows = [k.ravel()]
    cols = [k.ravel()]
    data = [np.full(ni * nj, diag)]

    # (coefficient, interior-neighbor slice pair, boundary slice, boundary values)
    def couple(coeff, self_sl, nbr_sl, bnd_self_sl, bnd_vals):
        rows.append(k[self_sl].ravel())
        cols.append(k[nbr_sl].ravel())
        data.append(-coeff[self_sl].ravel())
        rhs[k[bnd_self_sl].ravel()] += coeff[bnd_self_sl].ravel() * bnd_vals.ravel()

    couple(cw, (slice(1, None), slice(None)), (slice(None, -1), slice(None)),
           (0, slice(None)), dirichlet[i0, j0 + 1 : j1])
    couple(ce, (slice(None, -1), slice(None)), (slice(1, None), slice(None)),
           (-1, slice(None)), dirichlet[i1, j0 + 1 : j1])
    couple(cs, (slice(None), slice(1, None)), (slice(None), slice(None, -1)),
           (slice(None), 0), dirichlet[i0 + 1 : i1, j0])
    couple(cn, (slice(None), slice(None, -1)), (slice(None), slice(1, None)),
           (slice(None), -1), dirichlet[i0 + 1 : i1, j1])

    matrix = coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(ni * nj, ni * nj),
    ).tocsc()
    return LinearSystem(matrix=matrix, rhs=rhs, rect=rect, shape=(ni, nj))


def solve(sys: LinearSystem) -> np.ndarray:
    """Direct sparse LU solve; returns interior values shaped like the rectangle."""
    try:
        lu = splu(sys.matrix)
    except RuntimeError as exc:  # singular factorization
        raise RuntimeError(f"subdomain system is singular: {exc}") from exc
    x = lu.solve(sys.rhs)
    resid = np.linalg.norm(sys.matrix @ x - sys.rhs)
    if resid > RESIDUAL_RTOL * max(1.0, np.linalg.norm(sys.rhs)):
        raise RuntimeError(f"direct solve residual {resid:.3e} above tolerance")
    return x.reshape(sys.shape)


def step_subdomain(
    rect: IndexRect,
    state: MeshState,
    drift: DriftField,
    dt: float,
    dirichlet_xi: np.ndarray,
    dirichlet_eta: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Advance both fields on one rectangle; factor once, solve twice."""
    sys_xi = assemble(rect, state.xi, drift, dt, dirichlet_xi)
    sys_eta = assemble(rect, state.eta, drift, dt, dirichlet_eta)
    try:
        lu = splu(sys_xi.matrix)
    except RuntimeError as exc:
        raise RuntimeError(f"subdomain system is singular: {exc}") from exc
    out = []
    for sys in (sys_xi, sys_eta):
        x = lu.solve(sys.rhs)
        resid = np.linalg.norm(sys.matrix @ x - sys.rhs)
        if resid > RESIDUAL_RTOL * max(1.0, np.linalg.norm(sys.rhs)):
            raise RuntimeError(f"direct solve residual {resid:.3e} above tolerance")
        out.append(x.reshape(sys.shape))
    return out[0], out[1]


def step_single_domain(
    state: MeshState,
    drift: DriftField,
    dt: float,
    bd: BoundaryData,
) -> MeshState:
    """Reference solver: one implicit step on the whole grid with the
    physical-boundary profiles as Dirichlet data."""
    grid = state.grid
    can_xi, can_eta = bd.canvases()
    rect = (0, grid.nx - 1, 0, grid.ny - 1)
    xi_int, eta_int = step_subdomain(rect, state, drift, dt, can_xi, can_eta)

    new_xi = can_xi.copy()
    new_eta = can_eta.copy()
    new_xi[1:-1, 1:-1] = xi_int
    new_eta[1:-1, 1:-1] = eta_int
    return MeshState(
        t=state.t + dt,
        xi=ScalarField(grid, new_xi),
        eta=ScalarField(grid, new_eta),
    )
