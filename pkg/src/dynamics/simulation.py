"""Time loop over solved states, and conservation summaries of a run."""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from src.domain_model.types import DiracCloud, DomainSpec, SimConfig
from src.domain_model.validation import max_speed_bound
from src.dual_solver.solver import initial_weights
from src.dynamics.initial_data import sample_initial_cloud
from src.dynamics.integrator import SimState, SolverSettings, initial_state, step, velocity_field
from src.dynamics.snapshot import Snapshot, snapshot_from_state, state_from_snapshot
from src.envelope_geometry.bounds import ROUNDING_ALLOWANCE, BoundCheck, velocity_l2_limit
from src.envelope_geometry.quadrature import QuadratureGrid, build_grid
from src.errors import SemigeostrophicError
from src.logging_config import get_logger, step_context
from src.oracle.transport import w1_upper

logger = get_logger(__name__)

EQUILIBRIUM_SPEED = 1e-10
DT_GUIDANCE_FRACTION = 0.1

SnapshotHook = Callable[[Snapshot], None]


@dataclass
class SimulationResult:
    snapshots: List[Snapshot]
    final_state: SimState
    equilibrium: bool = False
    stopped_early: bool = False
    failure: Optional[str] = None


@dataclass
class ConservationSummary:
    """Drift figures and bound checks over the snapshots of one run."""

    energy_drift: float
    max_mass_error: float
    slab_exact: bool
    max_support_radius: float
    max_speed: float
    checks: List[BoundCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.slab_exact and all(check.ok for check in self.checks)

    def failed(self) -> List[BoundCheck]:
        return [check for check in self.checks if not check.ok]

    def to_dict(self) -> Dict[str, object]:
        return {
            "energy_drift": self.energy_drift,
            "max_mass_error": self.max_mass_error,
            "slab_exact": self.slab_exact,
            "max_support_radius": self.max_support_radius,
            "max_speed": self.max_speed,
            "ok": self.ok,
            "checks": [check.to_dict() for check in self.checks],
        }


def solver_settings(cfg: SimConfig, n_jobs: int = 1) -> SolverSettings:
    return SolverSettings(
        grid=build_grid(cfg.domain, cfg.quadrature),
        tol=cfg.solver_tol,
        max_iter=cfg.solver_max_iter,
        n_jobs=n_jobs,
    )


def initial_cloud(cfg: SimConfig, grid: QuadratureGrid) -> DiracCloud:
    if isinstance(cfg.initial, DiracCloud):
        return cfg.initial
    return sample_initial_cloud(cfg.initial, cfg.domain, grid)


def _max_speed(state: SimState) -> float:
    return float(np.max(np.linalg.norm(velocity_field(state.cloud, state.stats), axis=1)))


def _warn_dt(state: SimState, dt: float) -> None:
    speed = _max_speed(state)
    if speed <= 0.0:
        return
    extent = float(np.sqrt(np.min(state.stats.footprints)))
    guidance = DT_GUIDANCE_FRACTION * extent / speed
    if dt > guidance:
        logger.warning(
            f"dt={dt!r} exceeds the accuracy guidance {guidance:.3e} "
            f"(0.1 * smallest cell extent / max speed)",
            guidance=guidance,
        )


def _log_step(snapshot: Snapshot) -> None:
    logger.info(
        f"step {snapshot.step} t={snapshot.time:.6g} E={snapshot.energy:.12g} "
        f"gap={snapshot.duality_gap:.3e} residual={snapshot.residual_norm:.3e} "
        f"radius={snapshot.support_radius:.6g}",
        step=snapshot.step,
        time=snapshot.time,
        energy=snapshot.energy,
        duality_gap=snapshot.duality_gap,
        residual_norm=snapshot.residual_norm,
        support_radius=snapshot.support_radius,
    )


def simulate(
    cfg: SimConfig,
    n_jobs: int = 1,
    on_snapshot: Optional[SnapshotHook] = None,
    resume: Optional[Snapshot] = None,
) -> SimulationResult:
    """Run the dual point dynamics for cfg.steps steps.

    Snapshots are emitted at step 0, every ``cfg.output.stride`` steps and at
    the last step. When resuming, the loop continues after ``resume.step``
    and the resumed snapshot itself is not emitted again.

    On a solver or support failure the last good state is emitted (if it
    was not already) before the error propagates.
    """
    settings = solver_settings(cfg, n_jobs)
    stride = cfg.output.stride
    snapshots: List[Snapshot] = []

    def emit(snapshot: Snapshot) -> None:
        snapshots.append(snapshot)
        if on_snapshot is not None:
            on_snapshot(snapshot)

    if resume is None:
        cloud = initial_cloud(cfg, settings.grid)
        state = initial_state(cloud, initial_weights(cloud, cfg.solver_init), settings)
        last = snapshot_from_state(state)
        _log_step(last)
        emit(last)
        _warn_dt(state, cfg.dt)
    else:
        state = state_from_snapshot(resume, settings)
        last = resume
        logger.info(f"Resuming from step {resume.step} at t={resume.time!r}", step=resume.step)

    equilibrium = _max_speed(state) <= EQUILIBRIUM_SPEED
    result = SimulationResult(snapshots=snapshots, final_state=state, equilibrium=equilibrium)
    if equilibrium:
        logger.info("State is at equilibrium (max |w| <= 1e-10)")
        if cfg.stop_at_equilibrium:
            result.stopped_early = cfg.steps > state.step_index
            return result

    emitted_step = last.step
    for index in range(state.step_index + 1, cfg.steps + 1):
        try:
            with step_context(index):
                state = step(state, cfg.dt, cfg.scheme, settings)
        except SemigeostrophicError as e:
            logger.error(f"Step {index} failed: {e}", step=index)
            if emitted_step != last.step:
                emit(last)
            result.failure = str(e)
            raise

        last = snapshot_from_state(state)
        _log_step(last)
        result.final_state = state

        equilibrium = _max_speed(state) <= EQUILIBRIUM_SPEED
        stop = equilibrium and cfg.stop_at_equilibrium
        if index % stride == 0 or index == cfg.steps or stop:
            emit(last)
            emitted_step = index
        if equilibrium:
            result.equilibrium = True
            if stop:
                logger.info(f"Equilibrium reached at step {index}; stopping early", step=index)
                result.stopped_early = index < cfg.steps
                break

    return result


def conservation_summary(snapshots: List[Snapshot], domain: DomainSpec, solver_tol: float) -> ConservationSummary:
    """Conservation figures and Lipschitz-in-time checks over emitted snapshots."""
    if not snapshots:
        raise ValueError("conservation_summary needs at least one snapshot")
    first = snapshots[0]
    count = len(first.masses)
    energies = np.array([s.energy for s in snapshots])

    mass_errors = np.array([s.mass_error for s in snapshots])
    slab_exact = all(np.array_equal(s.positions[:, 2], first.positions[:, 2]) for s in snapshots)
    radius_excess = max(s.support_radius - s.support_limit for s in snapshots)
    speed_bound = max_speed_bound(domain)
    max_speed = max(s.peak_speed for s in snapshots)

    w1_measured = 0.0
    w1_constant = 0.0
    clouds = [s.cloud for s in snapshots]
    for j in range(1, len(snapshots)):
        for i in range(j):
            elapsed = abs(snapshots[j].time - snapshots[i].time)
            if elapsed <= 0.0:
                continue
            distance = w1_upper(clouds[i], clouds[j])
            w1_measured = max(w1_measured, distance - snapshots[j].peak_speed * elapsed)
            w1_constant = max(w1_constant, distance / elapsed)

    velocity_excess = -np.inf
    for s, cloud in zip(snapshots, clouds):
        w = cloud.points - s.centroids
        energy = float(np.sum(s.masses * (w[:, 0] ** 2 + w[:, 1] ** 2)))
        velocity_excess = max(velocity_excess, energy - velocity_l2_limit(domain, cloud))

    allowance = ROUNDING_ALLOWANCE
    checks = [
        BoundCheck("mass_error", float(mass_errors.max()), count * solver_tol + allowance),
        BoundCheck("support_growth", float(radius_excess), allowance),
        BoundCheck("support_radius", max(s.support_radius for s in snapshots), domain.horizontal_radius),
        BoundCheck("w1_measured_speed", w1_measured, allowance),
        BoundCheck("w1_speed_constant", w1_constant, speed_bound * (1.0 + allowance)),
        BoundCheck("max_speed", max_speed, speed_bound * (1.0 + allowance)),
        BoundCheck("velocity_l2_squared_excess", float(velocity_excess), allowance),
    ]
    return ConservationSummary(
        energy_drift=float(np.max(np.abs(energies - energies[0]))),
        max_mass_error=float(mass_errors.max()),
        slab_exact=slab_exact,
        max_support_radius=max(s.support_radius for s in snapshots),
        max_speed=max_speed,
        checks=checks,
    )
