"""Subdomain partition, stochastic interface-point selection, and Hermite fill.

Interfaces are full grid lines shared by adjacent subdomains.  A few points
per interface receive Monte Carlo solves (placed near the extrema of the
density derivatives along the line); the rest are filled by shape-preserving
cubic Hermite interpolation through the solved values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from .geometry import ScalarField, StructuredGrid

HORIZONTAL = "horizontal"
VERTICAL = "vertical"

# selected nodes on one interface are kept at least this many grid nodes apart
MIN_NODE_SPACING = 2


class PointKind(Enum):
    STOCHASTIC = "stochastic"
    INTERPOLATED = "interpolated"


@dataclass
class InterfacePoint:
    """One interior node on an interface line; values are filled per step."""

    index: tuple[int, int]  # grid (i, j)
    coord: tuple[float, float]
    kind: PointKind = PointKind.INTERPOLATED
    is_cross: bool = False
    value_xi: float | None = None
    value_eta: float | None = None
    est_xi: object = None  # PointEstimate provenance for stochastic points
    est_eta: object = None


@dataclass(frozen=True)
class Interface:
    """A grid line between subdomains.

    `fixed_index` is the constant grid index (i for vertical, j for
    horizontal); `span` holds the interior running indices (physical-boundary
    endpoints excluded; they carry BoundaryData values).  Cross nodes where
    perpendicular interfaces meet appear in exactly one owning interface:
    the vertical one.
    """

    orientation: str
    fixed_index: int
    span: tuple[int, int]  # inclusive (first, last) running index
    points: tuple[InterfacePoint, ...] = field(default_factory=tuple)

    def running_positions(self) -> np.ndarray:
        """Physical coordinate along the running axis for each point."""
        axis = 1 if self.orientation == VERTICAL else 0
        return np.array([p.coord[axis] for p in self.points])


@dataclass(frozen=True)
class Partition:
    """Subdomain tiling of the grid with one-node-line overlap at interfaces."""

    m: int
    n: int
    x_splits: tuple[int, ...]  # interior split indices along x, length m-1
    y_splits: tuple[int, ...]
    subdomains: tuple[tuple[int, int, int, int], ...]  # (i0, i1, j0, j1) inclusive
    interfaces: tuple[Interface, ...]


def _split_indices(count: int, parts: int) -> list[int]:
    """Near-equal node splits: interior split indices over `count` nodes."""
    return [round(k * (count - 1) / parts) for k in range(1, parts)]


def partition_grid(grid: StructuredGrid, m: int, n: int) -> Partition:
    """Tile the grid into m x n index rectangles sharing interface node lines."""
    if m < 1 or n < 1:
        raise ValueError(f"subdomain counts must be >= 1, got {m}x{n}")
    xs = _split_indices(grid.nx, m)
    ys = _split_indices(grid.ny, n)
    x_edges = [0, *xs, grid.nx - 1]
    y_edges = [0, *ys, grid.ny - 1]
    for edges, label in ((x_edges, "x"), (y_edges, "y")):
        widths = np.diff(edges)
        if np.any(widths < 2):
            raise ValueError(
                f"grid too small along {label} for the requested split: "
                f"each subdomain needs at least 3 node lines"
            )

    subdomains = tuple(
        (x_edges[p], x_edges[p + 1], y_edges[q], y_edges[q + 1])
        for p in range(m)
        for q in range(n)
    )

    interfaces = []
    cross_j = set(ys)
    for s in xs:  # vertical interfaces own the cross nodes
        pts = tuple(
            InterfacePoint(
                index=(s, j),
                coord=grid.node_coords(s, j),
                is_cross=j in cross_j,
            )
            for j in range(1, grid.ny - 1)
        )
        interfaces.append(
            Interface(VERTICAL, fixed_index=s, span=(1, grid.ny - 2), points=pts)
        )
    cross_i = set(xs)
    for t in ys:
        pts = tuple(
            InterfacePoint(index=(i, t), coord=grid.node_coords(i, t))
            for i in range(1, grid.nx - 1)
            if i not in cross_i
        )
        interfaces.append(
            Interface(HORIZONTAL, fixed_index=t, span=(1, grid.nx - 2), points=pts)
        )
    return Partition(
        m=m,
        n=n,
        x_splits=tuple(xs),
        y_splits=tuple(ys),
        subdomains=subdomains,
        interfaces=tuple(interfaces),
    )


def _strict_extrema(v: np.ndarray) -> list[int]:
    """Indices where the first difference of v changes sign strictly."""
    dv = np.diff(v)
    return [i for i in range(1, v.size - 1) if dv[i - 1] * dv[i] < 0.0]


def _line_values(iface: Interface, rho_field: ScalarField) -> tuple[np.ndarray, float]:
    grid = rho_field.grid
    if iface.orientation == VERTICAL:
        return rho_field.values[iface.fixed_index, :], grid.hy
    return rho_field.values[:, iface.fixed_index], grid.hx


def select_stochastic_points(
    iface: Interface, rho_field: ScalarField, k: int
) -> Interface:
    """Label interface nodes for the Monte Carlo solves.

    Marks the nodes nearest each local extremum of the first and second
    density derivatives along the line, the two span endpoints next to the
    physical boundary, and every cross point.  Nodes closer than
    MIN_NODE_SPACING are deduplicated keeping the larger normalized
    derivative magnitude; the set is padded with equispaced nodes up to k
    points (mandatory points always survive a surplus).  Returns a freshly
    labeled copy of the interface.
    """
    if k < 2:
        raise ValueError(f"need at least 2 stochastic points per interface, got {k}")
    line, h = _line_values(iface, rho_field)
    d1 = np.gradient(line, h, edge_order=1)
    d2 = np.gradient(d1, h, edge_order=1)

    lo, hi = iface.span
    point_by_running = {
        (p.index[1] if iface.orientation == VERTICAL else p.index[0]): p
        for p in iface.points
    }

    def norm_mag(d: np.ndarray) -> np.ndarray:
        m = np.max(np.abs(d))
        return np.abs(d) / m if m > 0.0 else np.zeros_like(d)

    score = np.maximum(norm_mag(d1), norm_mag(d2))
    candidates = sorted(
        {i for i in (*_strict_extrema(d1), *_strict_extrema(d2)) if lo <= i <= hi},
        key=lambda i: (-score[i], i),
    )

    mandatory = {lo, hi} | {
        (p.index[1] if iface.orientation == VERTICAL else p.index[0])
        for p in iface.points
        if p.is_cross
    }
    chosen = sorted(mandatory)

    def far_enough(idx: int) -> bool:
        return all(abs(idx - c) >= MIN_NODE_SPACING for c in chosen)

    for idx in candidates:
        if len(chosen) >= k:
            break
        if idx in point_by_running and far_enough(idx):
            chosen.append(idx)
            chosen.sort()

    if len(chosen) < k:  # degenerate or flat density: pad with equispaced nodes
        pad = np.unique(np.round(np.linspace(lo, hi, k)).astype(int))
        for idx in pad:
            if len(chosen) >= k:
                break
            if int(idx) in point_by_running and far_enough(int(idx)):
                chosen.append(int(idx))
                chosen.sort()
        for idx in pad:  # relax the spacing rule if the span is too tight
            if len(chosen) >= k:
                break
            if int(idx) in point_by_running and int(idx) not in chosen:
                chosen.append(int(idx))
                chosen.sort()

    chosen_set = set(chosen)
    new_points = tuple(
        replace(
            p,
            kind=(
                PointKind.STOCHASTIC
                if (p.index[1] if iface.orientation == VERTICAL else p.index[0])
                in chosen_set
                else PointKind.INTERPOLATED
            ),
            value_xi=None,
            value_eta=None,
            est_xi=None,
            est_eta=None,
        )
        for p in iface.points
    )
    return replace(iface, points=new_points)


def fill_interface(
    iface: Interface,
    extra_anchors=(),
    method: str = "pchip",
) -> Interface:
    """Fill the interpolated interface values through the stochastic anchors.

    `extra_anchors` is a sequence of (position, xi_value, eta_value) along the
    running axis: the physical-boundary endpoints of the line (values from
    BoundaryData) and any cross points owned by a perpendicular interface.
    The default monotone scheme is range-bounded; `method="cubic"` switches
    to classical cubic Hermite with centered-difference slopes.
    """
    axis = 1 if iface.orientation == VERTICAL else 0
    anchors = [(p.coord[axis], p.value_xi, p.value_eta)
               for p in iface.points if p.kind is PointKind.STOCHASTIC]
    for pos, vxi, veta in extra_anchors:
        anchors.append((float(pos), float(vxi), float(veta)))
    if any(vxi is None or veta is None for _, vxi, veta in anchors):
        raise ValueError("stochastic interface values must be set before filling")
    if len(anchors) < 2:
        raise ValueError("interface fill needs at least 2 anchors")
    anchors.sort(key=lambda a: a[0])
    pos = np.array([a[0] for a in anchors])
    if np.any(np.diff(pos) <= 0.0):
        raise ValueError("interface anchors must have distinct positions")

    def interpolant(vals: np.ndarray):
        if method == "pchip":
            return PchipInterpolator(pos, vals)
        if method == "cubic":
            slopes = np.gradient(vals, pos)
            return CubicHermiteSpline(pos, vals, slopes)
        raise ValueError(f"unknown interface interpolation method {method!r}")

    f_xi = interpolant(np.array([a[1] for a in anchors]))
    f_eta = interpolant(np.array([a[2] for a in anchors]))

    new_points = []
    for p in iface.points:
        if p.kind is PointKind.STOCHASTIC:
            new_points.append(p)
        else:
            s = p.coord[axis]
            new_points.append(
                replace(p, value_xi=float(f_xi(s)), value_eta=float(f_eta(s)))
            )
    return replace(iface, points=tuple(new_points))
