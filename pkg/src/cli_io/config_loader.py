"""Read run configuration files and echo validated configs back to JSON."""

import json
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
from pydantic import ValidationError

from src.domain_model.settings import RunConfigFile
from src.domain_model.types import DiracCloud, SimConfig
from src.domain_model.validation import format_validation_error, validate_config
from src.errors import ConfigValidationError
from src.logging_config import get_logger

logger = get_logger(__name__)


def parse_config_text(text: str, source: str = "<config>") -> RunConfigFile:
    """Parse JSON text into the schema; errors carry line/column or the key path."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigValidationError(f"{source}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(raw, dict):
        raise ConfigValidationError(f"{source}: top level must be an object, got {type(raw).__name__}")
    try:
        return RunConfigFile.model_validate(raw)
    except ValidationError as e:
        raise ConfigValidationError(f"{source}: {format_validation_error(e)}") from e


def load_config(path: Union[str, Path]) -> SimConfig:
    """Load and validate a run configuration file.

    Raises:
        FileNotFoundError: if the file does not exist.
        ConfigValidationError: on parse errors, unknown keys or invariant
            violations.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    parsed = parse_config_text(path.read_text(encoding="utf-8"), source=str(path))
    cfg = validate_config(parsed)
    logger.debug(f"Loaded config from {path}", path=str(path))
    return cfg


def config_to_mapping(cfg: SimConfig) -> Dict[str, Any]:
    """The JSON tree of a validated config; validate_config of it gives back an equal config."""
    domain = cfg.domain
    if isinstance(cfg.initial, DiracCloud):
        initial = {
            "kind": "explicit",
            "points": np.asarray(cfg.initial.points).tolist(),
            "masses": np.asarray(cfg.initial.masses).tolist(),
        }
    else:
        data = cfg.initial
        initial = {
            "kind": "analytic",
            "alpha": data.alpha,
            "beta": data.beta,
            "gamma1": data.gamma1,
            "gamma2": data.gamma2,
            "b3": data.b3,
            "samples": data.samples,
            "seed": data.seed,
        }
    return {
        "domain": {
            "omega2_polygon": [list(v) for v in domain.omega2_polygon],
            "delta": domain.delta,
            "cap_height": domain.cap_height,
            "horizontal_radius": domain.horizontal_radius,
        },
        "initial": initial,
        "dt": cfg.dt,
        "steps": cfg.steps,
        "scheme": cfg.scheme.value,
        "solver_tol": cfg.solver_tol,
        "solver_max_iter": cfg.solver_max_iter,
        "quadrature": {"columns_per_axis": cfg.quadrature.columns_per_axis},
        "output": {"out_dir": cfg.output.out_dir, "stride": cfg.output.stride},
        "merge_tolerance": cfg.merge_tolerance,
        "stop_at_equilibrium": cfg.stop_at_equilibrium,
        "solver_init": cfg.solver_init,
    }
