"""Persistable record of a solved state."""

from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from src.domain_model.types import DiracCloud, WeightVector
from src.dual_solver.solver import SolveReport, SolveStatus
from src.dynamics.integrator import SimState, SolverSettings
from src.envelope_geometry.decomposition import decompose

_ARRAY_FIELDS = ("positions", "masses", "weights", "volumes", "centroids", "height_field")


@dataclass(frozen=True, eq=False)
class Snapshot:
    """Everything needed to report on, or restart from, one time level."""

    time: float
    step: int
    positions: np.ndarray
    masses: np.ndarray
    weights: np.ndarray
    volumes: np.ndarray
    centroids: np.ndarray
    height_field: np.ndarray
    energy: float
    dual_value: float
    duality_gap: float
    residual_norm: float
    support_radius: float
    solver_iterations: int
    support_origin: float
    support_limit: float
    peak_speed: float
    height_file: Optional[str] = None

    @property
    def cloud(self) -> DiracCloud:
        return DiracCloud(points=self.positions, masses=self.masses)

    @property
    def weight_vector(self) -> WeightVector:
        return WeightVector(self.weights)

    @property
    def mass_error(self) -> float:
        return abs(float(np.sum(self.volumes)) - 1.0)

    def __eq__(self, other):
        if not isinstance(other, Snapshot):
            return NotImplemented
        for f in fields(self):
            if f.name == "height_file":
                continue
            mine, theirs = getattr(self, f.name), getattr(other, f.name)
            if f.name in _ARRAY_FIELDS:
                if not np.array_equal(mine, theirs, equal_nan=True):
                    return False
            elif mine != theirs:
                return False
        return True

    __hash__ = object.__hash__


def snapshot_from_state(state: SimState) -> Snapshot:
    stats = state.stats
    return Snapshot(
        time=state.time,
        step=state.step_index,
        positions=np.array(state.cloud.points),
        masses=np.array(state.cloud.masses),
        weights=np.array(state.weights.weights),
        volumes=np.array(stats.volumes),
        centroids=np.array(stats.centroids),
        height_field=np.array(stats.height_field),
        energy=stats.primal_energy,
        dual_value=stats.dual_value,
        duality_gap=stats.primal_energy - stats.dual_value,
        residual_norm=float(np.max(np.abs(stats.volumes - state.cloud.masses))),
        support_radius=state.cloud.horizontal_radius,
        solver_iterations=state.report.iterations,
        support_origin=state.support_origin,
        support_limit=state.support_limit,
        peak_speed=state.peak_speed,
    )


def state_from_snapshot(snapshot: Snapshot, settings: SolverSettings) -> SimState:
    """Rebuild a SimState from a stored snapshot without re-solving.

    Cells are recomputed at the stored weights, which reproduces the
    original stats exactly; continuing from here matches an uninterrupted run.
    """
    cloud = snapshot.cloud
    weights = snapshot.weight_vector
    stats = decompose(cloud, weights, settings.grid, n_jobs=settings.n_jobs)
    report = SolveReport(
        status=SolveStatus.CONVERGED,
        iterations=snapshot.solver_iterations,
        residual_norm=snapshot.residual_norm,
        dual_value=snapshot.dual_value,
    )
    return SimState(
        time=snapshot.time,
        step_index=snapshot.step,
        cloud=cloud,
        weights=weights,
        stats=stats,
        report=report,
        support_origin=snapshot.support_origin,
        support_limit=snapshot.support_limit,
        peak_speed=snapshot.peak_speed,
    )
