"""Monte Carlo evaluation of the single-step stopped-path representation.

The value of a computational coordinate at an interior point equals the
expectation over drifted Brownian paths of the current field at surviving
endpoints plus the boundary profile at exit points; expectations are replaced
by arithmetic means over independent paths.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryData, eval_boundary_many
from .geometry import PhysicalDomain, ScalarField
from .monitor import DriftField, interp_bilinear
from .sde import PathConfig, RngStream, brownian_block, simulate_ensemble


@dataclass(frozen=True)
class PointEstimate:
    """Sample mean, its standard error (ddof=1), and the path bookkeeping."""

    mean: float
    std_error: float
    n_paths: int
    n_exited: int


def _contributions(
    p,
    field_n: ScalarField,
    which: str,
    bd: BoundaryData,
    drift: DriftField,
    domain: PhysicalDomain,
    cfg: PathConfig,
    dw_block: np.ndarray,
) -> tuple[np.ndarray, int]:
    """Per-path contributions in path order: field at survivors, boundary at exits."""
    exited, endpoints, _ = simulate_ensemble(p, drift, domain, cfg, dw_block)
    contrib = np.empty(len(endpoints))
    interior = ~exited
    if interior.any():
        contrib[interior] = interp_bilinear(
            field_n, endpoints[interior, 0], endpoints[interior, 1]
        )
    if exited.any():
        contrib[exited] = eval_boundary_many(
            bd, which, endpoints[exited, 0], endpoints[exited, 1]
        )
    return contrib, int(exited.sum())


def _estimate_from_contributions(contrib: np.ndarray, n_exited: int) -> PointEstimate:
    n = contrib.size
    mean = float(contrib.mean())
    se = float(contrib.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return PointEstimate(mean=mean, std_error=se, n_paths=n, n_exited=n_exited)


def estimate_point(
    p,
    field_n: ScalarField,
    which: str,
    bd: BoundaryData,
    drift: DriftField,
    domain: PhysicalDomain,
    cfg: PathConfig,
    n_paths: int,
    rng: RngStream,
) -> PointEstimate:
    """Monte Carlo estimate of one field at one interior point.

    `rng` is the ensemble stream for this point; path p consumes row p of its
    normal block, so the result is a pure function of (seed, stream ids).
    """
    if n_paths < 1:
        raise ValueError(f"n_paths must be >= 1, got {n_paths}")
    dw = brownian_block(rng, n_paths, cfg.n_sub, cfg.dt_sub)
    contrib, n_exited = _contributions(p, field_n, which, bd, drift, domain, cfg, dw)
    return _estimate_from_contributions(contrib, n_exited)


def estimate_pair(
    p,
    xi_field: ScalarField,
    eta_field: ScalarField,
    bd: BoundaryData,
    drift: DriftField,
    domain: PhysicalDomain,
    cfg: PathConfig,
    n_paths: int,
    rng: RngStream,
    reuse_paths: bool = False,
) -> tuple[PointEstimate, PointEstimate]:
    """Estimate xi and eta at one point.

    Independent ensembles by default (streams rng.child(0) and rng.child(1));
    with reuse_paths=True a single ensemble from rng.child(0) feeds both
    fields, halving the cost at the price of correlated errors.
    """
    if reuse_paths:
        dw = brownian_block(rng.child(0), n_paths, cfg.n_sub, cfg.dt_sub)
        exited, endpoints, _ = simulate_ensemble(p, drift, domain, cfg, dw)
        n_exited = int(exited.sum())
        c_xi = np.empty(n_paths)
        c_eta = np.empty(n_paths)
        interior = ~exited
        if interior.any():
            xs, ys = endpoints[interior, 0], endpoints[interior, 1]
            c_xi[interior] = interp_bilinear(xi_field, xs, ys)
            c_eta[interior] = interp_bilinear(eta_field, xs, ys)
        if exited.any():
            xs, ys = endpoints[exited, 0], endpoints[exited, 1]
            c_xi[exited] = eval_boundary_many(bd, "xi", xs, ys)
            c_eta[exited] = eval_boundary_many(bd, "eta", xs, ys)
        return (
            _estimate_from_contributions(c_xi, n_exited),
            _estimate_from_contributions(c_eta, n_exited),
        )
    est_xi = estimate_point(p, xi_field, "xi", bd, drift, domain, cfg, n_paths, rng.child(0))
    est_eta = estimate_point(p, eta_field, "eta", bd, drift, domain, cfg, n_paths, rng.child(1))
    return est_xi, est_eta


def _point_worker(args):
    """Top-level chunk worker for process pools; returns (index, estimate) pairs."""
    indices, points, field_n, which, bd, drift, domain, cfg, n_paths, rng_base = args
    out = []
    for idx, p in zip(indices, points):
        est = estimate_point(
            p, field_n, which, bd, drift, domain, cfg, n_paths, rng_base.child(idx)
        )
        out.append((idx, est))
    return out


def _pair_worker(args):
    (indices, points, xi_field, eta_field, bd, drift, domain, cfg,
     n_paths, rng_base, reuse_paths) = args
    out = []
    for idx, p in zip(indices, points):
        pair = estimate_pair(
            p, xi_field, eta_field, bd, drift, domain, cfg,
            n_paths, rng_base.child(idx), reuse_paths,
        )
        out.append((idx, pair))
    return out


def _run_chunked(worker, make_args, n_items: int, workers: int, executor=None):
    """Dispatch index chunks to a pool (or run serially) and reassemble in order."""
    if n_items == 0:
        return []
    results: list = [None] * n_items
    if workers <= 1 and executor is None:
        for idx, value in worker(make_args(list(range(n_items)))):
            results[idx] = value
        return results

    n_chunks = min(max(workers, 1), n_items)
    chunks = [list(c) for c in np.array_split(np.arange(n_items), n_chunks)]
    own_pool = executor is None
    pool = executor if executor is not None else ProcessPoolExecutor(max_workers=workers)
    try:
        for part in pool.map(worker, [make_args(c) for c in chunks]):
            for idx, value in part:
                results[idx] = value
    finally:
        if own_pool:
            pool.shutdown()
    return results


def estimate_many(
    points,
    field_n: ScalarField,
    which: str,
    bd: BoundaryData,
    drift: DriftField,
    domain: PhysicalDomain,
    cfg: PathConfig,
    n_paths: int,
    rng_base: RngStream,
    workers: int = 1,
    executor=None,
) -> list[PointEstimate]:
    """Independent estimate_point calls over a list of points.

    Point i uses the stream rng_base.child(i); results are bit-identical for
    any worker count and element-wise equal to direct estimate_point calls.
    """
    points = list(points)

    def make_args(indices):
        return (
            indices, [points[i] for i in indices], field_n, which,
            bd, drift, domain, cfg, n_paths, rng_base,
        )

    return _run_chunked(_point_worker, make_args, len(points), workers, executor)


def estimate_pairs_many(
    points,
    xi_field: ScalarField,
    eta_field: ScalarField,
    bd: BoundaryData,
    drift: DriftField,
    domain: PhysicalDomain,
    cfg: PathConfig,
    n_paths: int,
    rng_base: RngStream,
    reuse_paths: bool = False,
    workers: int = 1,
    executor=None,
) -> list[tuple[PointEstimate, PointEstimate]]:
    """Vector version of estimate_pair; point i uses stream rng_base.child(i)."""
    points = list(points)

    def make_args(indices):
        return (
            indices, [points[i] for i in indices], xi_field, eta_field,
            bd, drift, domain, cfg, n_paths, rng_base, reuse_paths,
        )

    return _run_chunked(_pair_worker, make_args, len(points), workers, executor)


def driftless_error_experiment(
    n_paths_list,
    n_seeds: int,
    cfg: PathConfig,
    nx: int = 21,
    point=(0.3, 0.4),
    base_seed: int = 1234,
) -> list[tuple[int, float]]:
    """RMS error of the driftless estimator vs path count.

    With a uniform monitor the drift vanishes, the boundary profiles are
    linear striping, and the exact expectation of the xi estimator at p is
    p.x (stopped martingale).  Returns [(N, rms over seeds)] for the
    convergence-rate fit.
    """
    from .boundary import build_boundary_data
    from .geometry import UNIT_SQUARE, StructuredGrid, initial_mesh
    from .monitor import drift_from_monitor, sample_monitor

    grid = StructuredGrid(UNIT_SQUARE, nx, nx)
    mon = sample_monitor(0.0, grid, lambda t, x, y: np.ones_like(x))
    drift = drift_from_monitor(mon)
    bd = build_boundary_data(0.0, mon)
    state = initial_mesh(grid)

    out = []
    for n_paths in n_paths_list:
        errs = np.empty(n_seeds)
        for s in range(n_seeds):
            stream = RngStream(base_seed).child(int(n_paths), s)
            est = estimate_point(
                point, state.xi, "xi", bd, drift, grid.domain, cfg, int(n_paths), stream
            )
            errs[s] = est.mean - point[0]
        out.append((int(n_paths), float(np.sqrt(np.mean(errs**2)))))
    return out
