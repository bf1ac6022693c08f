"""Potential evaluation, free surface, cell decomposition and energies."""

from src.envelope_geometry.bounds import BoundCheck, bounds_suite
from src.envelope_geometry.decomposition import (
    CellStats,
    decompose,
    dual_value,
    duality_gap,
    primal_energy,
)
from src.envelope_geometry.diagnostics import canonical_potential, lipschitz_h_check
from src.envelope_geometry.envelope import (
    ColumnProfile,
    column_profile,
    evaluate_potential,
    free_surface,
)
from src.envelope_geometry.quadrature import QuadratureGrid, build_grid

__all__ = [
    'BoundCheck',
    'CellStats',
    'ColumnProfile',
    'QuadratureGrid',
    'bounds_suite',
    'build_grid',
    'canonical_potential',
    'column_profile',
    'decompose',
    'dual_value',
    'duality_gap',
    'evaluate_potential',
    'free_surface',
    'lipschitz_h_check',
    'primal_energy',
]
