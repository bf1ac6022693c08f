"""Brute-force cell decomposition on a dense voxel grid.

Shares no code with the column engine: membership in the polygon uses ray
crossing, and a voxel is wet when the potential P = max_i(x.y_i - R_i)
is at least q(x1, x2) at its center.
"""

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from src.domain_model.types import DiracCloud, DomainSpec, WeightVector
from src.errors import OracleLimitError
from src.logging_config import get_logger

logger = get_logger(__name__)

MIN_RESOLUTION = 16
MAX_RESOLUTION = 512
SLABS_PER_TASK = 8


@dataclass(frozen=True, eq=False)
class VoxelStats:
    """Voxel estimates of the per-cell volumes and centroids."""

    volumes: np.ndarray
    centroids: np.ndarray
    resolution: int
    z_top: float
    voxel_volume: float

    @property
    def total_volume(self) -> float:
        return float(np.sum(self.volumes))


def _inside_polygon(vertices: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Even-odd ray crossing test."""
    inside = np.zeros(x.shape, dtype=bool)
    count = len(vertices)
    for k in range(count):
        x0, y0 = vertices[k]
        x1, y1 = vertices[(k - 1) % count]
        straddles = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            cross_x = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside ^= straddles & (x < cross_x)
    return inside


def z_top(cloud: DiracCloud, w: WeightVector, cap_height: float) -> float:
    """Upper bound on the wet region: h <= max_i (|y_ih|^2/2 - R_i)/|y_i3|."""
    reach = (0.5 * (cloud.points[:, 0] ** 2 + cloud.points[:, 1] ** 2) - w.weights) / np.abs(cloud.points[:, 2])
    return float(min(cap_height, max(0.0, reach.max())))


def _slab_sums(levels, base, q, xy, slopes, n):
    volume = np.zeros(n)
    moments = np.zeros((n, 3))
    for z in levels:
        values = base + z * slopes
        owner = np.argmax(values, axis=1)
        wet = values[np.arange(len(values)), owner] >= q
        idx = owner[wet]
        volume += np.bincount(idx, minlength=n)
        moments[:, 0] += np.bincount(idx, weights=xy[wet, 0], minlength=n)
        moments[:, 1] += np.bincount(idx, weights=xy[wet, 1], minlength=n)
        moments[:, 2] += z * np.bincount(idx, minlength=n)
    return volume, moments


def voxel_decompose(
    cloud: DiracCloud,
    w: WeightVector,
    domain: DomainSpec,
    resolution: int,
    n_jobs: int = 1,
) -> VoxelStats:
    """Voxel volumes and centroids of the cells of (cloud, w).

    The grid covers the bounding box of the polygon times [0, z_top] with
    ``resolution`` voxels per axis. Slabs of constant x3 are summed in
    parallel and reduced in slab order.

    Raises:
        OracleLimitError: if resolution is outside [16, 512].
    """
    if resolution < MIN_RESOLUTION:
        raise OracleLimitError(f"Voxel resolution must be at least {MIN_RESOLUTION}, got {resolution}")
    if resolution > MAX_RESOLUTION:
        raise OracleLimitError(
            f"Voxel resolution {resolution} exceeds the memory guard of {MAX_RESOLUTION}^3 voxels"
        )
    w.check_aligned(cloud)
    n = cloud.count
    top = z_top(cloud, w, domain.cap_height)

    vertices = np.asarray(domain.omega2_polygon)
    x0, y0 = vertices.min(axis=0)
    x1, y1 = vertices.max(axis=0)
    dx, dy, dz = (x1 - x0) / resolution, (y1 - y0) / resolution, top / resolution
    voxel_volume = dx * dy * dz

    if top <= 0.0:
        return VoxelStats(
            volumes=np.zeros(n), centroids=np.full((n, 3), np.nan),
            resolution=resolution, z_top=top, voxel_volume=voxel_volume,
        )

    gx = x0 + (np.arange(resolution) + 0.5) * dx
    gy = y0 + (np.arange(resolution) + 0.5) * dy
    mx, my = np.meshgrid(gx, gy, indexing="ij")
    keep = _inside_polygon(vertices, mx.ravel(), my.ravel())
    xy = np.column_stack([mx.ravel()[keep], my.ravel()[keep]])
    q = 0.5 * (xy[:, 0] ** 2 + xy[:, 1] ** 2)
    base = xy @ cloud.points[:, :2].T - w.weights
    slopes = cloud.points[:, 2]

    levels = (np.arange(resolution) + 0.5) * dz
    groups = [levels[s:s + SLABS_PER_TASK] for s in range(0, resolution, SLABS_PER_TASK)]

    tasks = [delayed(_slab_sums)(group, base, q, xy, slopes, n) for group in groups]
    if n_jobs == 1:
        partials = [fn(*args, **kwargs) for fn, args, kwargs in tasks]
    else:
        partials = Parallel(n_jobs=n_jobs, backend="threading")(tasks)

    count = np.zeros(n)
    moments = np.zeros((n, 3))
    for volume, moment in partials:
        count += volume
        moments += moment

    with np.errstate(divide="ignore", invalid="ignore"):
        centroids = np.where(count[:, None] > 0, moments / count[:, None], np.nan)
    return VoxelStats(
        volumes=count * voxel_volume,
        centroids=centroids,
        resolution=resolution,
        z_top=top,
        voxel_volume=voxel_volume,
    )


def compare_volumes(engine_volumes: np.ndarray, voxel: VoxelStats) -> float:
    """max_i |vol_i(engine) - vol_i(voxel)|."""
    return float(np.max(np.abs(np.asarray(engine_volumes) - voxel.volumes)))
