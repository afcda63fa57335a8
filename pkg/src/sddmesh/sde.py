"""Euler-Maruyama simulation of the drifted Brownian paths over one mesh step.

Each mesh time step is split into sub-steps; after every sub-step a boundary
test fires and exited paths are stopped at the crossing point of their last
displacement segment with the rectangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import PhysicalDomain
from .monitor import DriftField, interp_bilinear

SQRT2 = math.sqrt(2.0)

# exited endpoints are snapped onto the rectangle, so they satisfy
# dist(endpoint, boundary) <= EXIT_PROJECTION_TOL exactly
EXIT_PROJECTION_TOL = 1e-12


@dataclass(frozen=True)
class PathConfig:
    """One mesh time step dt split into n_sub equal SDE sub-steps."""

    dt: float
    n_sub: int = 20

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_sub < 1:
            raise ValueError(f"n_sub must be >= 1, got {self.n_sub}")

    @property
    def dt_sub(self) -> float:
        return self.dt / self.n_sub


class PathKind(Enum):
    INTERIOR = "interior"
    EXITED = "exited"


@dataclass(frozen=True)
class PathOutcome:
    """Result of one path: final interior position, or the boundary exit point."""

    kind: PathKind
    endpoint: tuple[float, float]
    steps: int  # sub-steps taken, including the exiting one


@dataclass(frozen=True)
class RngStream:
    """Counter-based reproducible random stream addressed by (seed, ids).

    Streams with distinct id tuples are statistically independent and their
    output never depends on thread or process scheduling.  A path ensemble
    draws one normal block per stream; path p owns row p of the block, so a
    fixed (seed, ids, path index) always reproduces the same increments.
    """

    seed: int
    ids: tuple[int, ...] = ()

    def child(self, *ids: int) -> "RngStream":
        return RngStream(self.seed, self.ids + tuple(ids))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=self.ids)
        return np.random.Generator(np.random.Philox(seq))

    def normals(self, shape) -> np.ndarray:
        """Standard-normal block; deterministic function of (seed, ids, shape)."""
        return self.generator().standard_normal(shape)


def brownian_increment(gen: np.random.Generator, dt_sub: float) -> np.ndarray:
    """One 2D Brownian increment: each component is sqrt(dt_sub) * N(0, 1)."""
    if dt_sub < 0.0:
        raise ValueError(f"dt_sub must be >= 0, got {dt_sub}")
    if dt_sub == 0.0:
        gen.standard_normal(2)  # keep stream consumption independent of dt
        return np.zeros(2)
    return math.sqrt(dt_sub) * gen.standard_normal(2)


def brownian_block(stream: RngStream, n_paths: int, n_sub: int, dt_sub: float) -> np.ndarray:
    """Increments for a whole ensemble, shape (n_paths, n_sub, 2); row p is path p."""
    block = stream.normals((n_paths, n_sub, 2))
    if dt_sub == 0.0:
        return np.zeros_like(block)
    return math.sqrt(dt_sub) * block


def em_substep(x, drift: DriftField, dt_sub: float, dw) -> np.ndarray:
    """One explicit Euler-Maruyama sub-step: x + b(x)*dt_sub + sqrt(2)*dW.

    The drift is bilinearly interpolated from its nodal values.  The result
    may land outside the domain; the caller owns exit detection.
    """
    x = np.asarray(x, dtype=float)
    dw = np.asarray(dw, dtype=float)
    bx = interp_bilinear(drift.bx, x[..., 0], x[..., 1])
    by = interp_bilinear(drift.by, x[..., 0], x[..., 1])
    out = np.empty_like(x)
    out[..., 0] = x[..., 0] + bx * dt_sub + SQRT2 * dw[..., 0]
    out[..., 1] = x[..., 1] + by * dt_sub + SQRT2 * dw[..., 1]
    return out


def exit_crossing(p0: np.ndarray, p1: np.ndarray, domain: PhysicalDomain) -> np.ndarray:
    """Intersection of segments (p0 -> p1) with the rectangle boundary.

    p0 rows must be strictly inside and p1 rows outside or on the boundary.
    The crossing is snapped exactly onto the rectangle.
    """
    p0 = np.atleast_2d(p0)
    p1 = np.atleast_2d(p1)
    d = p1 - p0
    bounds = (domain.x_l, domain.x_r, domain.y_l, domain.y_u)
    axes = (0, 0, 1, 1)

    s_cands = np.full((4, len(p0)), np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        for f, (bound, ax) in enumerate(zip(bounds, axes)):
            s = (bound - p0[:, ax]) / d[:, ax]
            ok = np.isfinite(s) & (s > 0.0)
            s_cands[f, ok] = s[ok]
    face = np.argmin(s_cands, axis=0)
    s_min = np.minimum(s_cands[face, np.arange(len(p0))], 1.0)

    out = p0 + s_min[:, None] * d
    # snap the crossed coordinate onto its face, clip the other into range
    for f, (bound, ax) in enumerate(zip(bounds, axes)):
        hit = face == f
        out[hit, ax] = bound
    out[:, 0] = np.clip(out[:, 0], domain.x_l, domain.x_r)
    out[:, 1] = np.clip(out[:, 1], domain.y_l, domain.y_u)
    return out


def simulate_ensemble(
    start,
    drift: DriftField,
    domain: PhysicalDomain,
    cfg: PathConfig,
    dw_block: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run all paths of one ensemble from a common interior start point.

    dw_block has shape (n_paths, n_sub, 2) and holds the Brownian increments
    (already scaled by sqrt(dt_sub)).  Returns (exited, endpoints, steps):
    exited is a boolean mask, endpoints[p] is the interior final position or
    the boundary crossing point, steps[p] the sub-steps taken.
    """
    start = np.asarray(start, dtype=float)
    if not domain.contains(start):
        raise ValueError(f"path start {tuple(start)} must be strictly inside the domain")
    n_paths, n_sub, _ = dw_block.shape
    if n_sub != cfg.n_sub:
        raise ValueError(f"increment block has {n_sub} sub-steps, config says {cfg.n_sub}")

    endpoints = np.empty((n_paths, 2))
    steps = np.full(n_paths, cfg.n_sub, dtype=np.intp)
    exited = np.zeros(n_paths, dtype=bool)

    pos = np.tile(start, (n_paths, 1))
    alive = np.arange(n_paths)
    dt_sub = cfg.dt_sub
    for s in range(cfg.n_sub):
        new_pos = em_substep(pos, drift, dt_sub, dw_block[alive, s, :])
        inside = domain.contains_many(new_pos[:, 0], new_pos[:, 1])
        if not inside.all():
            out = ~inside
            hit = alive[out]
            endpoints[hit] = exit_crossing(pos[out], new_pos[out], domain)
            exited[hit] = True
            steps[hit] = s + 1
            pos = new_pos[inside]
            alive = alive[inside]
            if alive.size == 0:
                break
        else:
            pos = new_pos
    endpoints[alive] = pos
    return exited, endpoints, steps


def simulate_path(
    start,
    drift: DriftField,
    domain: PhysicalDomain,
    cfg: PathConfig,
    rng: np.random.Generator,
) -> PathOutcome:
    """Single-path simulation drawing increments sequentially from `rng`.

    Bit-identical to row p of simulate_ensemble when `rng` is the generator
    of the ensemble stream and p = 0.
    """
    start = np.asarray(start, dtype=float)
    if not domain.contains(start):
        raise ValueError(f"path start {tuple(start)} must be strictly inside the domain")

    pos = start.copy()
    for s in range(cfg.n_sub):
        dw = brownian_increment(rng, cfg.dt_sub)
        new_pos = em_substep(pos, drift, cfg.dt_sub, dw)
        if not domain.contains(new_pos):
            crossing = exit_crossing(pos[None, :], new_pos[None, :], domain)[0]
            return PathOutcome(PathKind.EXITED, (float(crossing[0]), float(crossing[1])), s + 1)
        pos = new_pos
    return PathOutcome(PathKind.INTERIOR, (float(pos[0]), float(pos[1])), cfg.n_sub)
