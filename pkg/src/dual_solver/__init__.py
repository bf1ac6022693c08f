"""Concave maximization of the dual functional over the weights."""

from src.dual_solver.probes import (
    StabilityResult,
    UniquenessResult,
    concavity_probe,
    gradient_check,
    shift_probe,
    stability_probe,
    uniqueness_probe,
)
from src.dual_solver.solver import (
    SolveReport,
    SolveStatus,
    initial_weights,
    residual,
    solve_weights,
)

__all__ = [
    'SolveReport',
    'SolveStatus',
    'StabilityResult',
    'UniquenessResult',
    'concavity_probe',
    'gradient_check',
    'initial_weights',
    'residual',
    'shift_probe',
    'solve_weights',
    'stability_probe',
    'uniqueness_probe',
]
