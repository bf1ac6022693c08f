"""A-priori bounds on the free surface, the potential and the velocities.

Every check returns a BoundCheck record so reports can list value, limit and
verdict side by side.
"""

from dataclasses import asdict, dataclass
from typing import Dict, List, Optional

import numpy as np

from src.domain_model.types import DiracCloud, DomainSpec
from src.envelope_geometry.decomposition import CellStats
from src.envelope_geometry.diagnostics import lipschitz_h_check

ROUNDING_ALLOWANCE = 1e-9


@dataclass(frozen=True)
class BoundCheck:
    name: str
    value: float
    limit: float

    @property
    def ok(self) -> bool:
        return bool(self.value <= self.limit)

    def to_dict(self) -> Dict[str, object]:
        return {**asdict(self), "ok": self.ok}


def second_moment(cloud: DiracCloud) -> float:
    """M2(nu) = sum nu_i |y_i|^2."""
    return float(np.sum(cloud.masses * np.sum(cloud.points ** 2, axis=1)))


def sup_height_bound(domain: DomainSpec, cloud: DiracCloud) -> float:
    """2/area + (2 max|x| + max_i(|y_i1| + |y_i2|))/delta * diam."""
    horizontal = float(np.max(np.abs(cloud.points[:, 0]) + np.abs(cloud.points[:, 1])))
    return 2.0 / domain.area_omega2 + (2.0 * domain.max_abs_x + horizontal) / domain.delta * domain.diam_omega2


def floor_integral_constant(domain: DomainSpec, cloud: DiracCloud) -> float:
    """C0 bounding the integral of max(P, q) over the floor x3 = 0."""
    area = domain.area_omega2
    m2 = second_moment(cloud)
    x_sq = domain.max_abs_x ** 2
    return 0.5 * area * (m2 + 2.0 * x_sq + 4.0 / (domain.delta * area)) + 0.5 * area * (m2 + x_sq)


def height_l2_limit(domain: DomainSpec, cloud: DiracCloud) -> float:
    """Limit for ||h||^2: (2/delta)(M2 + max|x|^2 + 2 C0/area)."""
    c1 = second_moment(cloud) + domain.max_abs_x ** 2 + 2.0 * floor_integral_constant(domain, cloud) / domain.area_omega2
    return 2.0 / domain.delta * c1


def weight_bounds(domain: DomainSpec, cloud: DiracCloud):
    """Elementwise (lower, upper) limits on optimal weights."""
    c0 = floor_integral_constant(domain, cloud)
    norms = np.linalg.norm(cloud.points, axis=1)
    lower = -domain.max_abs_x * norms - 2.0 * c0 / domain.area_omega2
    upper = 0.5 * (cloud.points[:, 0] ** 2 + cloud.points[:, 1] ** 2)
    return lower, upper


def velocity_l2_limit(domain: DomainSpec, cloud: DiracCloud) -> float:
    """Limit for sum nu_i |w_i|^2: 4 (max|x| + W2(nu, delta_0))^2."""
    return 4.0 * (domain.max_abs_x + np.sqrt(second_moment(cloud))) ** 2


def _allow(limit: float) -> float:
    return limit * (1.0 + ROUNDING_ALLOWANCE) + ROUNDING_ALLOWANCE


def bounds_suite(stats: CellStats, domain: DomainSpec, velocities: Optional[np.ndarray] = None) -> List[BoundCheck]:
    """Evaluate every bound that holds at optimal weights."""
    cloud = stats.cloud
    grid = stats.grid
    checks = [
        BoundCheck("sup_height", stats.max_height, _allow(sup_height_bound(domain, cloud))),
    ]

    slope, slope_limit = lipschitz_h_check(stats, domain)
    checks.append(BoundCheck("height_lipschitz", slope, slope_limit))

    checks.append(BoundCheck(
        "height_l2_squared",
        grid.integrate(stats.height_field ** 2),
        _allow(height_l2_limit(domain, cloud)),
    ))

    floor = np.max(grid.centers @ cloud.points[:, :2].T - stats.weights.weights, axis=1)
    checks.append(BoundCheck(
        "floor_potential_integral",
        grid.integrate(np.maximum(floor, grid.q_mean)),
        _allow(floor_integral_constant(domain, cloud)),
    ))

    lower, upper = weight_bounds(domain, cloud)
    weights = stats.weights.weights
    checks.append(BoundCheck("weight_upper", float(np.max(weights - upper)), ROUNDING_ALLOWANCE))
    checks.append(BoundCheck("weight_lower", float(np.max(lower - weights)), ROUNDING_ALLOWANCE))

    if velocities is not None:
        energy = float(np.sum(cloud.masses * np.sum(velocities ** 2, axis=1)))
        checks.append(BoundCheck("velocity_l2_squared", energy, _allow(velocity_l2_limit(domain, cloud))))

    return checks
