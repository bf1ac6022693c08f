"""Particle trajectories and weak-form residuals recovered from dual runs."""

from src.lagrangian_flow.particles import ParticleSet, assign_particles, sample_particles
from src.lagrangian_flow.tracing import TrajectoryLog, marginal_check, trace, z_equation_residual
from src.lagrangian_flow.weak_form import (
    SmoothFunction,
    SpaceTimeCutoff,
    WeakFormTerms,
    constant,
    coordinate,
    gaussian_bump,
    standard_test_suite,
    weak_form_residual,
    weak_form_terms,
)

__all__ = [
    'ParticleSet',
    'SmoothFunction',
    'SpaceTimeCutoff',
    'TrajectoryLog',
    'WeakFormTerms',
    'assign_particles',
    'constant',
    'coordinate',
    'gaussian_bump',
    'marginal_check',
    'sample_particles',
    'standard_test_suite',
    'trace',
    'weak_form_residual',
    'weak_form_terms',
    'z_equation_residual',
]
