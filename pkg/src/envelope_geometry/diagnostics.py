"""Pointwise diagnostics on a decomposition: canonical potential and slope of h."""

from typing import Tuple

import numpy as np

from src.domain_model.types import DiracCloud, DomainSpec, WeightVector
from src.envelope_geometry.decomposition import CellStats
from src.envelope_geometry.envelope import evaluate_potential

LIPSCHITZ_ROUNDING = 1e-9

_NEIGHBOUR_OFFSETS = ((1, 0), (0, 1), (1, 1), (1, -1))


def canonical_potential(cloud: DiracCloud, w: WeightVector, x) -> float:
    """max(P(x), q(x1, x2)): P capped from below by the quadratic."""
    value, _ = evaluate_potential(cloud, w, x)
    return max(value, 0.5 * (float(x[0]) ** 2 + float(x[1]) ** 2))


def lipschitz_bound(domain: DomainSpec, cloud: DiracCloud) -> float:
    """(max|x| + max_i(|y_i1| + |y_i2|)) / delta."""
    horizontal = float(np.max(np.abs(cloud.points[:, 0]) + np.abs(cloud.points[:, 1])))
    return (domain.max_abs_x + horizontal) / domain.delta


def lipschitz_h_check(stats: CellStats, domain: DomainSpec) -> Tuple[float, float]:
    """Largest difference quotient of h over wet 8-neighbour column pairs.

    The height is a maximum of functions that are each Lipschitz with the
    returned bound, so every pair quotient obeys it; the bound carries a
    relative rounding allowance.
    """
    grid = stats.grid
    image = grid.to_image(stats.height_field, fill=0.0)
    dx, dy = grid.spacing
    worst = 0.0
    for ox, oy in _NEIGHBOUR_OFFSETS:
        a = image[max(ox, 0):image.shape[0] + min(ox, 0), max(oy, 0):image.shape[1] + min(oy, 0)]
        b = image[max(-ox, 0):image.shape[0] + min(-ox, 0), max(-oy, 0):image.shape[1] + min(-oy, 0)]
        wet = (a > 0.0) & (b > 0.0)
        if not np.any(wet):
            continue
        distance = float(np.hypot(ox * dx, oy * dy))
        worst = max(worst, float(np.max(np.abs(a[wet] - b[wet]))) / distance)

    bound = lipschitz_bound(domain, stats.cloud)
    return worst, bound * (1.0 + LIPSCHITZ_ROUNDING) + LIPSCHITZ_ROUNDING
