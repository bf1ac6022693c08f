"""Fluid particles in the initial free-surface region and their cells."""

from dataclasses import dataclass

import numpy as np

from src.domain_model.types import DiracCloud, DomainSpec, WeightVector
from src.envelope_geometry.envelope import free_surface, potential_values
from src.errors import ParticleAboveSurfaceError
from src.logging_config import get_logger
from src.oracle.voxel import z_top

logger = get_logger(__name__)

MAX_REJECTION_ROUNDS = 1000


@dataclass(frozen=True, eq=False)
class ParticleSet:
    """Initial particle positions, the atom each one belongs to, and 1/M masses."""

    positions: np.ndarray
    cells: np.ndarray
    masses: np.ndarray

    @property
    def count(self) -> int:
        return len(self.cells)

    def counts_per_cell(self, atoms: int) -> np.ndarray:
        return np.bincount(self.cells, minlength=atoms)


def assign_particles(positions: np.ndarray, cloud: DiracCloud, w: WeightVector, domain: DomainSpec) -> ParticleSet:
    """Attach each particle to the cell whose affine piece dominates at it.

    Ties go to the lowest index.

    Raises:
        ParticleAboveSurfaceError: if a particle is outside the polygon, below
            the floor, or not strictly below the free surface.
    """
    x = np.atleast_2d(np.asarray(positions, dtype=np.float64))
    if x.shape[1] != 3:
        raise ValueError(f"Particle positions must be 3-D, got shape {x.shape}")

    outside = np.flatnonzero(~domain.contains(x) | (x[:, 2] < 0.0))
    if outside.size:
        raise ParticleAboveSurfaceError(f"Particle {int(outside[0])} at {x[outside[0]].tolist()} is outside the fluid domain")
    heights = free_surface(cloud, w, x[:, :2])
    above = np.flatnonzero(x[:, 2] >= heights)
    if above.size:
        p = int(above[0])
        raise ParticleAboveSurfaceError(
            f"Particle {p} at height {x[p, 2]!r} is not below the free surface h={heights[p]!r}"
        )

    _, cells = potential_values(cloud, w, x)
    cells.setflags(write=False)
    x.setflags(write=False)
    masses = np.full(len(x), 1.0 / len(x))
    masses.setflags(write=False)
    return ParticleSet(positions=x, cells=cells, masses=masses)


def sample_fluid(
    cloud: DiracCloud,
    w: WeightVector,
    domain: DomainSpec,
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Uniform points strictly inside the fluid region by rejection."""
    top = z_top(cloud, w, domain.cap_height)
    if top <= 0.0:
        raise ParticleAboveSurfaceError("The fluid region is empty; nothing to sample")
    x0, y0, x1, y1 = domain.bounding_box
    batch = max(4 * count, 1024)
    accepted, found = [], 0
    for _ in range(MAX_REJECTION_ROUNDS):
        draw = rng.uniform((x0, y0, 0.0), (x1, y1, top), size=(batch, 3))
        keep = domain.contains(draw)
        keep[keep] = draw[keep, 2] < free_surface(cloud, w, draw[keep, :2])
        accepted.append(draw[keep])
        found += int(keep.sum())
        if found >= count:
            return np.vstack(accepted)[:count]
    raise ParticleAboveSurfaceError(f"Rejection sampling found only {found} of {count} fluid points")


def sample_particles(
    cloud: DiracCloud,
    w: WeightVector,
    domain: DomainSpec,
    count: int,
    seed: int = 0,
) -> ParticleSet:
    """M uniform particles in the fluid region of (cloud, w), assigned to cells."""
    if count < 1:
        raise ValueError(f"Particle count must be positive, got {count}")
    rng = np.random.default_rng(seed)
    particles = assign_particles(sample_fluid(cloud, w, domain, count, rng), cloud, w, domain)
    logger.debug(f"Sampled {count} particles", seed=seed, atoms=cloud.count)
    return particles
