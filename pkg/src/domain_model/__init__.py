"""Core value types, run configuration and validation."""

from src.domain_model.cloud import default_merge_tolerance, merge_coincident
from src.domain_model.types import (
    AnalyticInitialData,
    DiracCloud,
    DomainSpec,
    OutputSpec,
    QuadratureSpec,
    Scheme,
    SimConfig,
    WeightVector,
)
from src.domain_model.validation import (
    cap_threshold,
    initial_support_radius,
    max_speed_bound,
    support_horizon_check,
    validate_config,
)

__all__ = [
    'AnalyticInitialData',
    'DiracCloud',
    'DomainSpec',
    'OutputSpec',
    'QuadratureSpec',
    'Scheme',
    'SimConfig',
    'WeightVector',
    'cap_threshold',
    'default_merge_tolerance',
    'initial_support_radius',
    'max_speed_bound',
    'merge_coincident',
    'support_horizon_check',
    'validate_config',
]
