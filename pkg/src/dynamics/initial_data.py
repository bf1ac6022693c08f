"""Admissible initial data from a convex quadratic potential P0."""

from dataclasses import replace

import numpy as np
from scipy.optimize import brentq

from src.domain_model.types import AnalyticInitialData, DiracCloud, DomainSpec
from src.envelope_geometry.quadrature import QuadratureGrid
from src.errors import ConfigValidationError
from src.logging_config import get_logger

logger = get_logger(__name__)

MAX_REJECTION_ROUNDS = 1000


def _floor_excess(data: AnalyticInitialData, xy: np.ndarray) -> np.ndarray:
    """P0(x1, x2, 0) - q(x1, x2) without the constant."""
    x1, x2 = xy[:, 0], xy[:, 1]
    return (
        0.5 * (data.alpha - 1.0) * x1 ** 2
        + 0.5 * (data.beta - 1.0) * x2 ** 2
        + data.gamma1 * x1
        + data.gamma2 * x2
    )


def initial_height(data: AnalyticInitialData, xy: np.ndarray) -> np.ndarray:
    """h0 = max(0, (P0(x1, x2, 0) - q)/|b3|)."""
    if data.const is None:
        raise ValueError("Initial data constant is not calibrated")
    xy = np.atleast_2d(xy)
    return np.maximum((_floor_excess(data, xy) + data.const) / -data.b3, 0.0)


def calibrate_initial_data(data: AnalyticInitialData, grid: QuadratureGrid) -> AnalyticInitialData:
    """Fix the constant of P0 so that h0 integrates to one on the grid."""
    excess = _floor_excess(data, grid.centers)
    slope = -data.b3
    total_area = grid.column_area * grid.size

    def volume_defect(const: float) -> float:
        return grid.integrate(np.maximum((excess + const) / slope, 0.0)) - 1.0

    low = -float(excess.max())
    high = -float(excess.min()) + 2.0 * slope / total_area
    const = brentq(volume_defect, low, high, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    logger.debug(f"Calibrated initial potential constant {const!r}", const=const)
    return replace(data, const=float(const))


def max_initial_height(data: AnalyticInitialData, domain: DomainSpec) -> float:
    """Exact maximum of h0 over the polygon.

    The floor excess is a separable quadratic, so its maximum sits at a
    vertex, at a critical point on an edge, or at the interior critical point.
    """
    pts = np.asarray(domain.omega2_polygon)
    a, b = data.alpha - 1.0, data.beta - 1.0
    candidates = [pts]

    for k in range(len(pts)):
        p, d = pts[k], pts[(k + 1) % len(pts)] - pts[k]
        curvature = 0.5 * (a * d[0] ** 2 + b * d[1] ** 2)
        linear = a * p[0] * d[0] + b * p[1] * d[1] + data.gamma1 * d[0] + data.gamma2 * d[1]
        if curvature < 0.0:
            s = -linear / (2.0 * curvature)
            if 0.0 < s < 1.0:
                candidates.append((p + s * d)[None, :])

    if a < 0.0 and b < 0.0:
        center = np.array([[-data.gamma1 / a, -data.gamma2 / b]])
        if domain.contains(center)[0]:
            candidates.append(center)

    return float(np.max(initial_height(data, np.vstack(candidates))))


def sample_fluid_points(data: AnalyticInitialData, domain: DomainSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points in the initial fluid region by rejection."""
    top = max_initial_height(data, domain)
    if top <= 0.0:
        raise ConfigValidationError("Initial surface is identically zero; no fluid to sample")

    x0, y0, x1, y1 = domain.bounding_box
    batch = max(4 * count, 1024)
    accepted = []
    found = 0
    for _ in range(MAX_REJECTION_ROUNDS):
        draw = rng.uniform((x0, y0, 0.0), (x1, y1, top), size=(batch, 3))
        keep = domain.contains(draw)
        keep[keep] = draw[keep, 2] < initial_height(data, draw[keep, :2])
        accepted.append(draw[keep])
        found += int(keep.sum())
        if found >= count:
            return np.vstack(accepted)[:count]
    raise ConfigValidationError(f"Rejection sampling found only {found} of {count} fluid points")


def sample_initial_cloud(data: AnalyticInitialData, domain: DomainSpec, grid: QuadratureGrid) -> DiracCloud:
    """Push uniform fluid samples through grad P0; every atom gets mass 1/N."""
    if data.const is None:
        data = calibrate_initial_data(data, grid)
    rng = np.random.default_rng(data.seed)
    x = sample_fluid_points(data, domain, data.samples, rng)
    points = data.gradient(x[:, :2])
    masses = np.full(data.samples, 1.0 / data.samples)
    cloud = DiracCloud(points=points, masses=masses)
    cloud.check_support(domain)
    logger.info(f"Sampled {data.samples} dual points from analytic initial data", seed=data.seed)
    return cloud


def initial_second_moment(data: AnalyticInitialData, grid: QuadratureGrid) -> float:
    """Integral of |grad P0|^2 over the initial fluid region (quadrature)."""
    if data.const is None:
        data = calibrate_initial_data(data, grid)
    y = data.gradient(grid.centers)
    h0 = initial_height(data, grid.centers)
    return grid.integrate(h0 * np.sum(y ** 2, axis=1))
