"""Self-convergence under time step refinement."""

from dataclasses import dataclass, replace
from typing import Dict, List, Sequence

import numpy as np

from src.domain_model.types import OutputSpec, SimConfig
from src.dynamics.integrator import rotate
from src.dynamics.simulation import simulate
from src.logging_config import get_logger

logger = get_logger(__name__)

STEP_COUNT_TOLERANCE = 1e-9


def z_residual(times: np.ndarray, positions: np.ndarray, centroids: np.ndarray) -> float:
    """max |dZ/dt - J(Z - x)| with central differences at interior times.

    positions and centroids have shape (T, N, 3) and are sampled at the
    uniformly spaced ``times``.
    """
    times = np.asarray(times, dtype=np.float64)
    if len(times) < 3:
        raise ValueError("Central differences need at least three samples")
    spacing = np.diff(times)
    if not np.allclose(spacing, spacing[0], rtol=1e-9, atol=0.0):
        raise ValueError("Samples must be uniformly spaced in time")

    derivative = (positions[2:] - positions[:-2]) / (times[2:] - times[:-2])[:, None, None]
    offsets = positions[1:-1] - centroids[1:-1]
    flow = np.stack([rotate(frame) for frame in offsets])
    return float(np.max(np.linalg.norm(derivative - flow, axis=2)))


def fitted_order(dts: Sequence[float], errors: Sequence[float]) -> float:
    """Slope of log(error) against log(dt); nan when fewer than two errors are positive."""
    dts = np.asarray(dts, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    usable = errors > 0.0
    if usable.sum() < 2:
        return float("nan")
    slope, _ = np.polyfit(np.log(dts[usable]), np.log(errors[usable]), 1)
    return float(slope)


@dataclass
class ConvergenceStudy:
    dts: List[float]
    reference_dt: float
    horizon: float
    position_errors: List[float]
    energy_drifts: List[float]
    z_residuals: List[float]

    @property
    def orders(self) -> Dict[str, float]:
        return {
            "position": fitted_order(self.dts, self.position_errors),
            "energy_drift": fitted_order(self.dts, self.energy_drifts),
            "z_residual": fitted_order(self.dts, self.z_residuals),
        }

    def to_dict(self) -> Dict[str, object]:
        return {
            "dts": list(self.dts),
            "reference_dt": self.reference_dt,
            "horizon": self.horizon,
            "position_errors": list(self.position_errors),
            "energy_drifts": list(self.energy_drifts),
            "z_residuals": list(self.z_residuals),
            "orders": self.orders,
        }


def _step_count(horizon: float, dt: float) -> int:
    steps = int(round(horizon / dt))
    if steps < 2 or abs(steps * dt - horizon) > STEP_COUNT_TOLERANCE * max(1.0, horizon):
        raise ValueError(f"Horizon {horizon!r} is not at least two whole steps of dt={dt!r}")
    return steps


def _run(cfg: SimConfig, dt: float, horizon: float, n_jobs: int):
    run_cfg = replace(cfg, dt=dt, steps=_step_count(horizon, dt), output=OutputSpec(stride=1), stop_at_equilibrium=False)
    return simulate(run_cfg, n_jobs=n_jobs).snapshots


def convergence_study(
    cfg: SimConfig,
    dts: Sequence[float],
    reference_dt: float,
    horizon: float,
    n_jobs: int = 1,
) -> ConvergenceStudy:
    """Errors at ``horizon`` for each dt against a run at ``reference_dt``.

    Position error is max_i |y_i(T) - y_i^ref(T)|; energy drift is
    |E(T) - E(0)|; the Z residual is the central-difference mismatch of the
    dual trajectory against J(y - c).
    """
    reference = _run(cfg, reference_dt, horizon, n_jobs)[-1]
    study = ConvergenceStudy(
        dts=[float(dt) for dt in dts], reference_dt=reference_dt, horizon=horizon,
        position_errors=[], energy_drifts=[], z_residuals=[],
    )
    for dt in study.dts:
        snapshots = _run(cfg, dt, horizon, n_jobs)
        final = snapshots[-1]
        study.position_errors.append(float(np.max(np.linalg.norm(final.positions - reference.positions, axis=1))))
        study.energy_drifts.append(abs(final.energy - snapshots[0].energy))
        study.z_residuals.append(z_residual(
            np.array([s.time for s in snapshots]),
            np.stack([s.positions for s in snapshots]),
            np.stack([s.centroids for s in snapshots]),
        ))
        logger.info(
            f"dt={dt!r}: position error {study.position_errors[-1]:.3e}, "
            f"energy drift {study.energy_drifts[-1]:.3e}, z residual {study.z_residuals[-1]:.3e}",
            dt=dt,
        )
    return study
