"""Time evolution of the dual points and run-level summaries."""

from src.dynamics.convergence import ConvergenceStudy, convergence_study, fitted_order, z_residual
from src.dynamics.initial_data import (
    calibrate_initial_data,
    initial_height,
    initial_second_moment,
    sample_initial_cloud,
)
from src.dynamics.integrator import SimState, SolverSettings, initial_state, rotate, step, velocity_field
from src.dynamics.simulation import (
    ConservationSummary,
    SimulationResult,
    conservation_summary,
    initial_cloud,
    simulate,
    solver_settings,
)
from src.dynamics.snapshot import Snapshot, snapshot_from_state, state_from_snapshot

__all__ = [
    'ConservationSummary',
    'ConvergenceStudy',
    'SimState',
    'SimulationResult',
    'Snapshot',
    'SolverSettings',
    'calibrate_initial_data',
    'conservation_summary',
    'convergence_study',
    'fitted_order',
    'initial_cloud',
    'initial_height',
    'initial_second_moment',
    'initial_state',
    'rotate',
    'sample_initial_cloud',
    'simulate',
    'snapshot_from_state',
    'solver_settings',
    'state_from_snapshot',
    'step',
    'velocity_field',
    'z_residual',
]
