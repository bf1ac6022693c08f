"""Dual point dynamics: barycentric velocities and time steps."""

from dataclasses import dataclass

import numpy as np

from src.domain_model.types import DiracCloud, Scheme, WeightVector
from src.dual_solver.solver import SolveReport, solve_weights
from src.envelope_geometry.decomposition import CellStats
from src.envelope_geometry.quadrature import QuadratureGrid
from src.errors import EmptyCellError, SolverConvergenceError, SupportGrowthError
from src.logging_config import get_logger

logger = get_logger(__name__)

SUPPORT_ROUNDING = 1e-12
SUPPORT_WARNING_FRACTION = 0.9


@dataclass(frozen=True)
class SolverSettings:
    grid: QuadratureGrid
    tol: float
    max_iter: int
    n_jobs: int = 1


@dataclass(frozen=True, eq=False)
class SimState:
    """Solved state at one time level.

    ``support_limit`` is the admissible horizontal radius at this time,
    grown from ``support_origin`` (D0) step by step. ``peak_speed`` is the
    largest atom speed seen so far, stage speeds included.
    """

    time: float
    step_index: int
    cloud: DiracCloud
    weights: WeightVector
    stats: CellStats
    report: SolveReport
    support_origin: float
    support_limit: float
    peak_speed: float = 0.0

    @property
    def energy(self) -> float:
        return self.stats.primal_energy


def rotate(v: np.ndarray) -> np.ndarray:
    """J(v) = (-v2, v1, 0) applied row-wise."""
    return np.column_stack([-v[:, 1], v[:, 0], np.zeros(len(v))])


def velocity_field(cloud: DiracCloud, stats: CellStats) -> np.ndarray:
    """w_i = J(y_i - c_i) with c_i the centroid of cell i.

    Raises:
        EmptyCellError: if any cell is empty.
    """
    empty = stats.empty_cells
    if empty.size:
        raise EmptyCellError(empty)
    return rotate(cloud.points - stats.centroids)


def solve_state(cloud: DiracCloud, warm: WeightVector, settings: SolverSettings):
    weights, stats, report = solve_weights(cloud, warm, settings.tol, settings.max_iter, settings.grid, n_jobs=settings.n_jobs)
    if not report.converged:
        raise SolverConvergenceError(
            f"Weight solve failed with status {report.status.value} "
            f"(residual {report.residual_norm!r}, {report.iterations} iterations)",
            report=report,
        )
    return weights, stats, report


def initial_state(cloud: DiracCloud, init: WeightVector, settings: SolverSettings) -> SimState:
    weights, stats, report = solve_state(cloud, init, settings)
    radius = cloud.horizontal_radius
    speed = float(np.max(np.linalg.norm(velocity_field(cloud, stats), axis=1)))
    return SimState(
        time=0.0, step_index=0, cloud=cloud, weights=weights, stats=stats, report=report,
        support_origin=radius, support_limit=radius, peak_speed=speed,
    )


def _grown_limit(limit: float, dt: float, max_abs_x: float, speed: float, stage_coupling: float) -> float:
    """Admissible radius after one step.

    |y + dt w|^2 <= (|y| + dt max|x| + c dt^2 speed)^2 + (dt speed)^2, where
    c = 0 for frozen velocities and 1 when stages are evaluated off the base point.
    """
    return float(np.hypot(limit + dt * max_abs_x + stage_coupling * dt * dt * speed, dt * speed))


def _check_support(cloud: DiracCloud, limit: float, horizontal_radius: float) -> float:
    radius = cloud.horizontal_radius
    if radius > limit * (1.0 + SUPPORT_ROUNDING) + SUPPORT_ROUNDING:
        raise SupportGrowthError(f"Support radius {radius!r} exceeds the admissible growth {limit!r}")
    if radius > horizontal_radius:
        raise SupportGrowthError(f"Support radius {radius!r} left the ball of radius D={horizontal_radius!r}")
    if radius > SUPPORT_WARNING_FRACTION * horizontal_radius:
        logger.warning(
            f"Support radius {radius:.6g} is approaching D={horizontal_radius:.6g}",
            support_radius=radius,
        )
    return radius


def step(state: SimState, dt: float, scheme: Scheme, settings: SolverSettings) -> SimState:
    """Advance the dual points by dt and re-solve the weights.

    euler freezes the velocity of the current state over the step; rk4
    re-solves the weights at each stage position (warm-started).
    """
    domain = settings.grid.domain
    y = state.cloud.points
    k1 = velocity_field(state.cloud, state.stats)
    speeds = [float(np.max(np.linalg.norm(k1, axis=1)))]
    warm = state.weights

    if Scheme(scheme) is Scheme.EULER:
        new_points = y + dt * k1
        coupling = 0.0
    else:
        stage_k = [k1]
        for fraction in (0.5, 0.5, 1.0):
            stage_cloud = state.cloud.with_points(y + fraction * dt * stage_k[-1])
            warm, stage_stats, _ = solve_state(stage_cloud, warm, settings)
            k = velocity_field(stage_cloud, stage_stats)
            stage_k.append(k)
            speeds.append(float(np.max(np.linalg.norm(k, axis=1))))
        k1, k2, k3, k4 = stage_k
        new_points = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        coupling = 1.0

    speed = max(speeds)
    limit = _grown_limit(state.support_limit, dt, domain.max_abs_x, speed, coupling)
    cloud = state.cloud.with_points(new_points)
    _check_support(cloud, limit, domain.horizontal_radius)

    weights, stats, report = solve_state(cloud, warm, settings)
    index = state.step_index + 1
    return SimState(
        time=index * dt,
        step_index=index,
        cloud=cloud,
        weights=weights,
        stats=stats,
        report=report,
        support_origin=state.support_origin,
        support_limit=limit,
        peak_speed=max(state.peak_speed, speed),
    )
