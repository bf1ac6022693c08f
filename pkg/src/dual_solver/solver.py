"""Gradient ascent on the dual functional J over the weights R.

The gradient of J is the marginal residual vol_i - nu_i. Steps follow the
Barzilai-Borwein rule and are accepted by a backtracking sufficient-increase
test on J.
"""

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np

from src.domain_model.types import DiracCloud, WeightVector
from src.envelope_geometry.decomposition import CellStats, decompose
from src.envelope_geometry.quadrature import QuadratureGrid
from src.errors import CapSaturationError, SolverConvergenceError, SolverToleranceError
from src.logging_config import get_logger

logger = get_logger(__name__)

ARMIJO_FRACTION = 1e-4
MAX_BACKTRACKS = 60
STEP_MIN = 1e-10
STEP_MAX = 1e10
STALL_WINDOW = 3
STALL_RELATIVE = 1e-12
EMPTY_PATIENCE = 50
DEFAULT_RETRY_BUDGET = 3


class SolveStatus(str, Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    STALLED = "stalled"
    EMPTY_CELLS = "empty_cells"


@dataclass
class SolveReport:
    """Outcome of one weight solve."""

    status: SolveStatus
    iterations: int
    residual_norm: float
    dual_value: float
    step_history: List[float] = field(default_factory=list)
    dual_history: List[float] = field(default_factory=list)
    restarts: int = 0
    wall_time: float = 0.0

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "converged": self.converged,
            "iterations": self.iterations,
            "residual_norm": self.residual_norm,
            "dual_value": self.dual_value,
            "restarts": self.restarts,
            "wall_time": self.wall_time,
            "step_history": list(self.step_history),
        }


def residual(cloud: DiracCloud, w: WeightVector, stats: CellStats) -> np.ndarray:
    """Marginal residual r_i = vol_i - nu_i, the ascent direction of J."""
    if stats.weights is not w and stats.weights != w:
        raise ValueError("Cell stats were computed at different weights")
    return stats.volumes - cloud.masses


def _stalled(history: List[float]) -> bool:
    if len(history) <= STALL_WINDOW:
        return False
    latest = history[-1]
    change = abs(latest - history[-1 - STALL_WINDOW])
    return change <= STALL_RELATIVE * max(1.0, abs(latest))


def _restart_empty(cloud, w, stuck, grid, n_jobs):
    """Drop the weights of long-empty cells below every other weight.

    Raises:
        SolverConvergenceError: if every shift tried saturates the cap.
    """
    domain = grid.domain
    shift = domain.delta * domain.cap_height
    base = np.array(w.weights)
    for _ in range(MAX_BACKTRACKS):
        trial = base.copy()
        trial[stuck] = base.min() - shift
        candidate = WeightVector(trial)
        try:
            return candidate, decompose(cloud, candidate, grid, n_jobs=n_jobs)
        except CapSaturationError:
            shift *= 0.5
    raise SolverConvergenceError(
        f"Could not restart empty cells {np.asarray(stuck).tolist()} without saturating the cap"
    )


def solve_weights(
    cloud: DiracCloud,
    init: WeightVector,
    tol: float,
    max_iter: int,
    grid: QuadratureGrid,
    n_jobs: int = 1,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
):
    """Maximize J over the weights until every |vol_i - nu_i| <= tol.

    Convergence also requires J to change by at most 1e-12 (relative) over
    the last three iterations.

    Args:
        cloud: dual points with strictly positive masses
        init: starting weights (cold start or the previous step's optimum)
        tol: residual tolerance in the infinity norm
        max_iter: iteration cap
        grid: column quadrature
        n_jobs: joblib workers for each decomposition
        retry_budget: restarts allowed per persistently empty cell

    Returns:
        (weights, stats, report); stats are those of the returned weights.

    Raises:
        SolverToleranceError: if tol is below the quadrature noise floor.
        CapSaturationError: if the initial weights saturate the cap.
        SolverConvergenceError: if empty cells cannot be restarted below the cap.
    """
    floor = grid.spec.min_solver_tol
    if tol < floor:
        raise SolverToleranceError(
            f"Tolerance {tol!r} is below the quadrature noise floor {floor!r} "
            f"(0.1 / columns_per_axis^2 with {grid.spec.columns_per_axis} columns per axis)"
        )
    init.check_aligned(cloud)
    if np.any(cloud.masses <= 0.0):
        raise ValueError("All masses must be strictly positive")

    started = time.perf_counter()
    n = cloud.count
    w = init
    stats = decompose(cloud, w, grid, n_jobs=n_jobs)
    r = stats.volumes - cloud.masses
    J = stats.dual_value

    alpha = 1.0 / n
    history = [J]
    report = SolveReport(status=SolveStatus.MAX_ITER, iterations=0, residual_norm=float(np.max(np.abs(r))), dual_value=J)
    report.dual_history.append(J)
    empty_streak = np.zeros(n, dtype=np.int64)
    restarts = np.zeros(n, dtype=np.int64)

    for iteration in range(1, max_iter + 1):
        r_norm = float(np.max(np.abs(r)))
        if r_norm <= tol and _stalled(history):
            report.status = SolveStatus.CONVERGED
            break

        g2 = float(r @ r)
        step = alpha
        accepted = None
        for _ in range(MAX_BACKTRACKS):
            trial = WeightVector(w.weights + step * r)
            try:
                trial_stats = decompose(cloud, trial, grid, n_jobs=n_jobs)
            except CapSaturationError:
                step *= 0.5
                continue
            if trial_stats.dual_value >= J + ARMIJO_FRACTION * step * g2:
                accepted = (trial, trial_stats)
                break
            step *= 0.5

        if accepted is None:
            report.status = SolveStatus.CONVERGED if r_norm <= tol else SolveStatus.STALLED
            break

        trial, trial_stats = accepted
        r_new = trial_stats.volumes - cloud.masses
        s = trial.weights - w.weights
        curvature = float(s @ (r_new - r))
        # J is concave, so s.(r_new - r) <= 0; a flat stretch doubles the step
        alpha = -float(s @ s) / curvature if curvature < 0.0 else 2.0 * step
        alpha = float(np.clip(alpha, STEP_MIN, STEP_MAX))

        w, stats, r, J = trial, trial_stats, r_new, trial_stats.dual_value
        history.append(J)
        report.iterations = iteration
        report.step_history.append(step)
        report.dual_history.append(J)
        logger.debug(
            f"iter {iteration}: J={J!r} |r|inf={float(np.max(np.abs(r))):.3e} step={step:.3e}",
            iteration=iteration, dual_value=J, step=step,
        )

        empty_streak = np.where(stats.volumes <= 0.0, empty_streak + 1, 0)
        stuck = np.flatnonzero(empty_streak >= EMPTY_PATIENCE)
        if stuck.size:
            if np.any(restarts[stuck] >= retry_budget):
                report.status = SolveStatus.EMPTY_CELLS
                logger.warning(
                    f"Cells {stuck.tolist()} stayed empty after {retry_budget} restarts",
                    empty_cells=stuck.tolist(),
                )
                break
            restarts[stuck] += 1
            empty_streak[stuck] = 0
            w, stats = _restart_empty(cloud, w, stuck, grid, n_jobs)
            r = stats.volumes - cloud.masses
            J = stats.dual_value
            history = [J]
            alpha = 1.0 / n
            logger.info(f"Restarted empty cells {stuck.tolist()}", empty_cells=stuck.tolist())
    else:
        if float(np.max(np.abs(r))) <= tol and _stalled(history):
            report.status = SolveStatus.CONVERGED

    report.residual_norm = float(np.max(np.abs(r)))
    report.dual_value = J
    report.restarts = int(restarts.sum())
    report.wall_time = time.perf_counter() - started

    if not report.converged:
        logger.warning(
            f"Weight solve ended with status {report.status.value} after {report.iterations} iterations",
            residual_norm=report.residual_norm,
        )
    return w, stats, report


def initial_weights(cloud: DiracCloud, mode: str = "quadratic", previous: Optional[WeightVector] = None) -> WeightVector:
    """Cold-start weights, or the previous optimum when warm starting."""
    if previous is not None:
        return previous
    if mode == "zeros":
        return WeightVector.zeros(cloud)
    if mode == "quadratic":
        return WeightVector.quadratic_start(cloud)
    raise ValueError(f"Unknown init mode {mode!r}")
