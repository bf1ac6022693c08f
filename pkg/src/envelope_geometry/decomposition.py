"""Cell decomposition of the fluid region and the primal/dual energies.

Columns are processed in fixed-size chunks whose partial sums are reduced in
chunk order, so results do not depend on the number of worker threads.
"""

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from src.domain_model.types import DiracCloud, WeightVector
from src.envelope_geometry.envelope import envelope_pieces, surface_from_intercepts
from src.envelope_geometry.quadrature import QuadratureGrid
from src.errors import CapSaturationError, InfeasibleMarginalsError
from src.logging_config import get_logger

logger = get_logger(__name__)

MAX_CHUNK_COLUMNS = 4096
MIN_CHUNK_COLUMNS = 256
CHUNK_ENTRY_BUDGET = 2 ** 21


@dataclass(frozen=True, eq=False)
class CellStats:
    """Per-cell volumes, centroids and energies at one (cloud, weights) pair.

    Centroids of empty cells are NaN. ``height_field`` is the free surface
    h_P evaluated at ``grid.centers``; volumes, centroids and energies use
    the column mean of q instead.
    """

    cloud: DiracCloud
    weights: WeightVector
    grid: QuadratureGrid
    volumes: np.ndarray
    centroids: np.ndarray
    height_field: np.ndarray
    footprints: np.ndarray
    cell_energy: np.ndarray
    surface_integral: float
    total_volume: float
    primal_energy: float
    dual_value: float

    @property
    def empty_cells(self) -> np.ndarray:
        return np.flatnonzero(self.volumes <= 0.0)

    @property
    def max_height(self) -> float:
        return float(self.height_field.max()) if self.height_field.size else 0.0


def chunk_size(n_points: int) -> int:
    """Columns per chunk; depends on the problem only, never on thread count."""
    return int(max(MIN_CHUNK_COLUMNS, min(MAX_CHUNK_COLUMNS, CHUNK_ENTRY_BUDGET // max(n_points, 1))))


def _sweep_chunk(centers, q_point, q_mean, points, weights, cap_height):
    n = len(weights)
    a = centers @ points[:, :2].T - weights
    slopes = points[:, 2]
    # h_point is the surface at the column center; h bounds the column-mean integrals
    h_point = surface_from_intercepts(a, slopes, q_point)
    h = surface_from_intercepts(a, slopes, q_mean)

    saturated = h_point >= cap_height
    if np.any(saturated):
        raise CapSaturationError(float(h_point.max()), cap_height, int(saturated.sum()))

    row, idx, lo, hi = envelope_pieces(a, slopes, h)
    length = hi - lo
    half_sq = 0.5 * length * (hi + lo)
    x1 = centers[row, 0]
    x2 = centers[row, 1]
    q = q_mean[row]
    a_act = a[row, idx]
    b_act = slopes[idx]
    y_h_sq = 0.5 * (points[idx, 0] ** 2 + points[idx, 1] ** 2)

    # integrand of the cost: q - x_h.y_h + |y_h|^2/2 - x3 y3, with x_h.y_h = a + R
    energy = length * (q - a_act - weights[idx] + y_h_sq) - b_act * half_sq
    surface = length * q - (a_act * length + b_act * half_sq)

    return (
        np.bincount(idx, weights=length, minlength=n),
        np.column_stack([
            np.bincount(idx, weights=x1 * length, minlength=n),
            np.bincount(idx, weights=x2 * length, minlength=n),
            np.bincount(idx, weights=half_sq, minlength=n),
        ]),
        np.bincount(idx, weights=energy, minlength=n),
        float(np.sum(surface)),
        np.bincount(idx, minlength=n).astype(np.float64),
        h_point,
    )


def decompose(cloud: DiracCloud, w: WeightVector, grid: QuadratureGrid, n_jobs: int = 1) -> CellStats:
    """Cell volumes, centroids, height field and energies on the column grid.

    Args:
        cloud: dual points and masses
        w: weights aligned with the cloud
        grid: column quadrature built for the run's domain
        n_jobs: joblib worker count (threading backend); -1 for all cores

    Raises:
        CapSaturationError: if any column surface reaches the cap height.
    """
    w.check_aligned(cloud)
    points = np.asarray(cloud.points)
    weights = np.asarray(w.weights)
    cap = grid.domain.cap_height

    size = chunk_size(cloud.count)
    bounds = [(s, min(s + size, grid.size)) for s in range(0, grid.size, size)]
    tasks = (
        delayed(_sweep_chunk)(grid.centers[s:e], grid.q_point[s:e], grid.q_mean[s:e], points, weights, cap)
        for s, e in bounds
    )
    if n_jobs == 1 or len(bounds) == 1:
        partials = [task[0](*task[1], **task[2]) for task in tasks]
    else:
        partials = Parallel(n_jobs=n_jobs, backend="threading")(tasks)

    n = cloud.count
    length = np.zeros(n)
    moments = np.zeros((n, 3))
    energy = np.zeros(n)
    surface = 0.0
    footprint = np.zeros(n)
    for part in partials:
        length += part[0]
        moments += part[1]
        energy += part[2]
        surface += part[3]
        footprint += part[4]
    height = np.concatenate([part[5] for part in partials]) if partials else np.zeros(0)

    area = grid.column_area
    volumes = length * area
    with np.errstate(divide="ignore", invalid="ignore"):
        centroids = np.where(volumes[:, None] > 0.0, moments * area / volumes[:, None], np.nan)

    cell_energy = energy * area
    footprints = footprint * area
    for array in (volumes, centroids, height, footprints, cell_energy):
        array.setflags(write=False)
    surface_integral = surface * area

    logger.debug(
        "Decomposed columns",
        columns=grid.size, chunks=len(bounds), wet_columns=int(np.count_nonzero(height)),
    )

    return CellStats(
        cloud=cloud,
        weights=w,
        grid=grid,
        volumes=volumes,
        centroids=centroids,
        height_field=height,
        footprints=footprints,
        cell_energy=cell_energy,
        surface_integral=surface_integral,
        total_volume=float(np.sum(volumes)),
        primal_energy=float(np.sum(cell_energy)),
        dual_value=_dual_from_parts(cloud, w, surface_integral),
    )


def _dual_from_parts(cloud: DiracCloud, w: WeightVector, surface_integral: float) -> float:
    y_h_sq = 0.5 * (cloud.points[:, 0] ** 2 + cloud.points[:, 1] ** 2)
    return float(np.sum(cloud.masses * (y_h_sq - w.weights))) + surface_integral


def primal_energy(cloud: DiracCloud, stats: CellStats) -> float:
    """E = sum over cells of the transport cost, as accumulated by decompose."""
    if stats.cloud is not cloud and stats.cloud != cloud:
        raise ValueError("Cell stats were computed for a different cloud")
    return float(np.sum(stats.cell_energy))


def dual_value(cloud: DiracCloud, w: WeightVector, stats: CellStats) -> float:
    """J(R) = sum nu_i (|y_ih|^2/2 - R_i) + integral over the fluid of (q - P)."""
    if stats.weights is not w and stats.weights != w:
        raise ValueError("Cell stats were computed at different weights")
    return _dual_from_parts(cloud, w, stats.surface_integral)


def duality_gap(cloud: DiracCloud, w: WeightVector, stats: CellStats, marginal_residual: float) -> float:
    """E - J, which vanishes exactly when every vol_i equals nu_i.

    Raises:
        InfeasibleMarginalsError: if max |vol_i - nu_i| exceeds marginal_residual.
    """
    worst = float(np.max(np.abs(stats.volumes - cloud.masses)))
    if worst > marginal_residual:
        raise InfeasibleMarginalsError(
            f"max |vol_i - nu_i| = {worst!r} exceeds {marginal_residual!r}; the duality gap is not meaningful"
        )
    return primal_energy(cloud, stats) - dual_value(cloud, w, stats)
