"""Small transport distances and a brute-force optimality scan of J."""

from itertools import permutations

import numpy as np

from src.domain_model.types import DiracCloud, WeightVector
from src.envelope_geometry.decomposition import decompose
from src.envelope_geometry.quadrature import QuadratureGrid
from src.errors import CapSaturationError, OracleLimitError
from src.logging_config import get_logger

logger = get_logger(__name__)

MAX_EXACT_ATOMS = 8


def w1_upper(cloud_a: DiracCloud, cloud_b: DiracCloud) -> float:
    """Cost of the index coupling sum nu_i |y_i^A - y_i^B|, an upper bound on W1.

    Raises:
        ValueError: if the clouds do not carry the same atoms.
    """
    if cloud_a.count != cloud_b.count or not np.array_equal(cloud_a.masses, cloud_b.masses):
        raise ValueError("w1_upper needs two placements of the same atoms (equal counts and masses)")
    return float(np.sum(cloud_a.masses * np.linalg.norm(cloud_a.points - cloud_b.points, axis=1)))


def exact_w1_tiny(cloud_a: DiracCloud, cloud_b: DiracCloud) -> float:
    """Exact W1 between two equal-mass clouds by enumerating every assignment.

    Raises:
        OracleLimitError: above MAX_EXACT_ATOMS atoms.
        ValueError: if counts differ or the masses are not uniform.
    """
    n = cloud_a.count
    if n > MAX_EXACT_ATOMS:
        raise OracleLimitError(f"exact_w1_tiny enumerates permutations; N={n} exceeds {MAX_EXACT_ATOMS}")
    if cloud_b.count != n:
        raise ValueError(f"Cloud sizes differ ({n} vs {cloud_b.count})")
    uniform = np.full(n, 1.0 / n)
    if not (np.allclose(cloud_a.masses, uniform, rtol=0.0, atol=1e-12)
            and np.allclose(cloud_b.masses, uniform, rtol=0.0, atol=1e-12)):
        raise ValueError("exact_w1_tiny needs equal-mass atoms")

    cost = np.linalg.norm(cloud_a.points[:, None, :] - cloud_b.points[None, :, :], axis=2)
    rows = np.arange(n)
    best = min(float(cost[rows, list(perm)].sum()) for perm in permutations(range(n)))
    return best / n


def direct_j_scan(
    cloud: DiracCloud,
    optimum: WeightVector,
    grid: QuadratureGrid,
    trials: int = 100,
    magnitude: float = 0.1,
    seed: int = 0,
    n_jobs: int = 1,
) -> float:
    """Largest increase of J over random perturbations of the weights.

    A converged optimum gives a value no larger than the quadrature error.
    Perturbations that saturate the cap are skipped; their J is not defined
    on the capped fluid region.
    """
    base = decompose(cloud, optimum, grid, n_jobs=n_jobs).dual_value
    if magnitude == 0.0:
        return 0.0

    rng = np.random.default_rng(seed)
    worst = -np.inf
    skipped = 0
    for _ in range(trials):
        eta = rng.uniform(-magnitude, magnitude, size=cloud.count)
        trial = WeightVector(optimum.weights + eta)
        try:
            value = decompose(cloud, trial, grid, n_jobs=n_jobs).dual_value
        except CapSaturationError:
            skipped += 1
            continue
        worst = max(worst, value - base)

    if skipped:
        logger.debug(f"Skipped {skipped} saturating perturbations", skipped=skipped)
    return float(worst) if np.isfinite(worst) else 0.0
