"""Physical trajectories of particles reconstructed from a dual run.

A particle never changes atom: its dual position is Z_p(t) = y_{i(p)}(t)
and its physical position is read off the atom's cell at time t.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.domain_model.types import DomainSpec
from src.dynamics.convergence import z_residual
from src.dynamics.snapshot import Snapshot
from src.envelope_geometry.envelope import potential_values
from src.envelope_geometry.quadrature import QuadratureGrid
from src.lagrangian_flow.particles import ParticleSet, sample_fluid
from src.logging_config import get_logger

logger = get_logger(__name__)

TRACE_MODES = ("centroid", "spread")
UNIFORM_SPACING_RTOL = 1e-9
MAX_SPREAD_ROUNDS = 200


@dataclass(frozen=True, eq=False)
class TrajectoryLog:
    """Traced particles at every snapshot time.

    Arrays are indexed (time, atom, 3) for dual positions and centroids and
    (time, particle, 3) for physical positions.
    """

    times: np.ndarray
    steps: np.ndarray
    dual_positions: np.ndarray
    centroids: np.ndarray
    positions: np.ndarray
    particles: ParticleSet
    mode: str = "centroid"

    @property
    def cells(self) -> np.ndarray:
        return self.particles.cells

    @property
    def z(self) -> np.ndarray:
        """Z_p(t) = y_{i(p)}(t), shape (time, particle, 3)."""
        return self.dual_positions[:, self.cells]

    def uniform_span(self) -> int:
        """Length of the longest prefix of uniformly spaced times."""
        if len(self.times) < 3:
            return len(self.times)
        spacing = np.diff(self.times)
        same = np.isclose(spacing, spacing[0], rtol=UNIFORM_SPACING_RTOL, atol=0.0)
        breaks = np.flatnonzero(~same)
        return len(self.times) if breaks.size == 0 else int(breaks[0]) + 1


def _spread_positions(
    snapshot: Snapshot,
    cells: np.ndarray,
    domain: DomainSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """A uniform point of its cell for every particle, centroid as fallback."""
    cloud, w = snapshot.cloud, snapshot.weight_vector
    needed = np.bincount(cells, minlength=cloud.count)
    pools: List[List[np.ndarray]] = [[] for _ in range(cloud.count)]
    have = np.zeros(cloud.count, dtype=np.int64)
    batch = max(4 * len(cells), 1024)

    for _ in range(MAX_SPREAD_ROUNDS):
        if np.all(have >= needed):
            break
        draw = sample_fluid(cloud, w, domain, batch, rng)
        _, owner = potential_values(cloud, w, draw)
        for i in np.flatnonzero(have < needed):
            picked = draw[owner == i][: needed[i] - have[i]]
            pools[i].append(picked)
            have[i] += len(picked)

    positions = np.empty((len(cells), 3))
    for i in np.flatnonzero(needed):
        members = np.flatnonzero(cells == i)
        points = np.vstack(pools[i]) if pools[i] else np.empty((0, 3))
        if len(points) < len(members):
            logger.warning(
                f"Cell {i} too small to spread {len(members)} particles; using its centroid",
                cell=int(i),
            )
            points = np.vstack([points, np.repeat(snapshot.centroids[i][None, :], len(members) - len(points), axis=0)])
        positions[members] = points[: len(members)]
    return positions


def trace(
    particles: ParticleSet,
    snapshots: Sequence[Snapshot],
    mode: str = "centroid",
    domain: Optional[DomainSpec] = None,
    seed: int = 0,
) -> TrajectoryLog:
    """Follow each particle through the snapshots of a run.

    centroid: x_p(t) is the centroid of cell i(p) at t.
    spread: x_p(t) is drawn uniformly in cell i(p) at t (needs ``domain``).
    """
    if mode not in TRACE_MODES:
        raise ValueError(f"Unknown trace mode {mode!r}; expected one of {TRACE_MODES}")
    if not snapshots:
        raise ValueError("trace needs at least one snapshot")
    if mode == "spread" and domain is None:
        raise ValueError("spread tracing needs the domain")

    dual_positions = np.stack([s.positions for s in snapshots])
    centroids = np.stack([s.centroids for s in snapshots])
    if mode == "centroid":
        positions = centroids[:, particles.cells]
    else:
        rng = np.random.default_rng(seed)
        positions = np.stack([_spread_positions(s, particles.cells, domain, rng) for s in snapshots])

    return TrajectoryLog(
        times=np.array([s.time for s in snapshots]),
        steps=np.array([s.step for s in snapshots]),
        dual_positions=dual_positions,
        centroids=centroids,
        positions=positions,
        particles=particles,
        mode=mode,
    )


def marginal_check(log: TrajectoryLog, time_index: int, height_field: np.ndarray, grid: QuadratureGrid) -> float:
    """L1 gap between the traced particle histogram and the column masses h*A at one time."""
    x0, y0, _, _ = grid.domain.bounding_box
    dx, dy = grid.spacing
    n = grid.spec.columns_per_axis
    xy = log.positions[time_index, :, :2]
    ix = np.clip(np.floor((xy[:, 0] - x0) / dx).astype(np.int64), 0, n - 1)
    iy = np.clip(np.floor((xy[:, 1] - y0) / dy).astype(np.int64), 0, n - 1)

    histogram = np.zeros(grid.shape)
    np.add.at(histogram, (ix, iy), log.particles.masses)
    fluid = grid.to_image(np.asarray(height_field) * grid.column_area, fill=0.0)
    return float(np.sum(np.abs(histogram - fluid)))


def z_equation_residual(log: TrajectoryLog) -> float:
    """max_p,t |dZ_p/dt - J(Z_p - x_p)| over the uniformly spaced snapshots."""
    span = log.uniform_span()
    if span < 3:
        raise ValueError("z_equation_residual needs at least three uniformly spaced snapshots")
    return z_residual(log.times[:span], log.z[:span], log.positions[:span])
