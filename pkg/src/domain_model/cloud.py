"""Hygiene for degenerate dual clouds."""

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from src.domain_model.types import DiracCloud
from src.logging_config import get_logger

logger = get_logger(__name__)

DEFAULT_MERGE_FACTOR = 1e-9


def default_merge_tolerance(diam_omega2: float) -> float:
    return DEFAULT_MERGE_FACTOR * diam_omega2


def _merge_once(points: np.ndarray, masses: np.ndarray, eps: float):
    n = len(points)
    pairs = cKDTree(points).query_pairs(r=eps, output_type="ndarray")
    if len(pairs) == 0:
        return points, masses, False

    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    n_groups, labels = connected_components(graph, directed=False)

    # order clusters by their lowest member index
    first_member = np.full(n_groups, n, dtype=np.int64)
    np.minimum.at(first_member, labels, np.arange(n))
    order = np.argsort(first_member, kind="stable")
    relabel = np.empty(n_groups, dtype=np.int64)
    relabel[order] = np.arange(n_groups)
    labels = relabel[labels]

    merged_mass = np.bincount(labels, weights=masses, minlength=n_groups)
    merged_points = np.column_stack([
        np.bincount(labels, weights=masses * points[:, k], minlength=n_groups) / merged_mass
        for k in range(3)
    ])
    return merged_points, merged_mass, True


def merge_coincident(cloud: DiracCloud, eps: float) -> DiracCloud:
    """Merge points closer than ``eps`` into their mass-weighted mean.

    Clusters are single-linkage components; merging repeats until no pair is
    within ``eps`` so a second call is the identity.
    """
    if eps < 0:
        raise ValueError(f"Merge tolerance must be non-negative, got {eps}")

    points = np.array(cloud.points)
    masses = np.array(cloud.masses)
    changed_any = False
    while len(points) > 1:
        points, masses, changed = _merge_once(points, masses, eps)
        if not changed:
            break
        changed_any = True

    if not changed_any:
        return cloud

    logger.info(
        f"Merged coincident points: {cloud.count} -> {len(points)}",
        eps=eps, before=cloud.count, after=len(points),
    )
    # Summation order may move the total by an ulp; renormalize
    return DiracCloud(points=points, masses=masses / masses.sum())
