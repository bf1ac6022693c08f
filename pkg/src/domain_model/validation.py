"""Turn a parsed configuration tree into a checked SimConfig."""

from typing import Any, Mapping, Tuple, Union

import numpy as np
from pydantic import ValidationError

from src.domain_model.cloud import default_merge_tolerance, merge_coincident
from src.domain_model.settings import AnalyticDataSettings, RunConfigFile
from src.domain_model.types import (
    AnalyticInitialData,
    DiracCloud,
    DomainSpec,
    OutputSpec,
    QuadratureSpec,
    Scheme,
    SimConfig,
)
from src.errors import ConfigValidationError
from src.logging_config import get_logger

logger = get_logger(__name__)

CFL_FRACTION = 0.5
DEFAULT_SOLVER_TOL = 1e-7


def cap_threshold(domain: DomainSpec) -> float:
    """Smallest admissible cap height for the domain (strict inequality)."""
    return domain.cap_threshold


def max_speed_bound(domain: DomainSpec) -> float:
    """Bound on |w_i| = |y_ih - c_ih| while points stay in B_D."""
    return domain.horizontal_radius + domain.max_abs_x


def initial_support_radius(domain: DomainSpec, initial) -> float:
    """Largest horizontal |y| of the initial cloud (D0)."""
    if isinstance(initial, DiracCloud):
        return initial.horizontal_radius
    vertices = np.asarray(domain.omega2_polygon)
    image = initial.gradient(vertices)
    # the map is affine, so its norm peaks at a polygon vertex
    return float(np.max(np.hypot(image[:, 0], image[:, 1])))


def support_horizon_check(cfg: SimConfig) -> Tuple[float, bool]:
    """Radius the run may need, D0 + max|x|*(T+1), and whether D exceeds it."""
    domain = cfg.domain
    required = initial_support_radius(domain, cfg.initial) + domain.max_abs_x * (cfg.horizon + 1.0)
    return required, domain.horizontal_radius > required


def _check_analytic(data: AnalyticInitialData, domain: DomainSpec) -> None:
    low, high = domain.slab
    if not (low <= data.b3 <= high):
        raise ConfigValidationError(f"Analytic b3={data.b3!r} outside the slab [{low!r}, {high!r}]")
    if data.alpha <= 0 or data.beta <= 0:
        raise ConfigValidationError("Analytic potential needs alpha > 0 and beta > 0")
    radius = initial_support_radius(domain, data)
    if radius > domain.horizontal_radius:
        raise ConfigValidationError(
            f"Analytic data maps the domain to horizontal radius {radius!r} > D={domain.horizontal_radius!r}"
        )


def _from_file(raw: RunConfigFile) -> SimConfig:
    d = raw.domain
    domain = DomainSpec(
        omega2_polygon=tuple(tuple(v) for v in d.omega2_polygon),
        delta=d.delta,
        cap_height=d.cap_height,
        horizontal_radius=d.horizontal_radius,
    )

    if isinstance(raw.initial, AnalyticDataSettings):
        a = raw.initial
        initial = AnalyticInitialData(
            alpha=a.alpha, beta=a.beta, gamma1=a.gamma1, gamma2=a.gamma2,
            b3=a.b3, samples=a.samples, seed=a.seed,
        )
    else:
        points = np.asarray(raw.initial.points, dtype=np.float64)
        if raw.initial.masses is None:
            masses = np.full(len(points), 1.0 / len(points))
        else:
            masses = np.asarray(raw.initial.masses, dtype=np.float64)
        initial = DiracCloud(points=points, masses=masses)

    quadrature = QuadratureSpec(raw.quadrature.columns_per_axis)
    solver_tol = raw.solver_tol
    if solver_tol is None:
        solver_tol = max(DEFAULT_SOLVER_TOL, quadrature.min_solver_tol)

    return SimConfig(
        domain=domain,
        initial=initial,
        dt=raw.dt,
        steps=raw.steps,
        scheme=Scheme(raw.scheme),
        solver_tol=solver_tol,
        solver_max_iter=raw.solver_max_iter,
        quadrature=quadrature,
        output=OutputSpec(out_dir=raw.output.out_dir, stride=raw.output.stride),
        merge_tolerance=raw.merge_tolerance,
        stop_at_equilibrium=raw.stop_at_equilibrium,
        solver_init=raw.solver_init,
    )


def format_validation_error(exc: ValidationError) -> str:
    """One line per pydantic error, prefixed with the dotted key path."""
    lines = []
    for err in exc.errors():
        loc = ".".join(str(part) for part in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


def validate_config(cfg: Union[SimConfig, RunConfigFile, Mapping[str, Any]]) -> SimConfig:
    """Check every invariant of a run configuration.

    Accepts a raw mapping, a parsed RunConfigFile or an existing SimConfig.
    Validating an already validated SimConfig returns an equal config.

    Raises:
        ConfigValidationError: on any invariant violation; the message names
            the offending key or the computed threshold.
    """
    if isinstance(cfg, Mapping):
        try:
            cfg = RunConfigFile.model_validate(dict(cfg))
        except ValidationError as e:
            raise ConfigValidationError(format_validation_error(e)) from e
    if isinstance(cfg, RunConfigFile):
        cfg = _from_file(cfg)
    if not isinstance(cfg, SimConfig):
        raise ConfigValidationError(f"Cannot validate object of type {type(cfg).__name__}")

    domain = cfg.domain
    if cfg.dt <= 0 or cfg.solver_tol <= 0:
        raise ConfigValidationError("dt and solver_tol must be positive")
    if cfg.steps < 0 or cfg.solver_max_iter < 1:
        raise ConfigValidationError("steps must be >= 0 and solver_max_iter >= 1")
    if cfg.output.stride < 1:
        raise ConfigValidationError("output.stride must be >= 1")
    if cfg.solver_tol < cfg.quadrature.min_solver_tol:
        raise ConfigValidationError(
            f"solver_tol={cfg.solver_tol!r} is below the quadrature noise floor "
            f"{cfg.quadrature.min_solver_tol!r} for {cfg.quadrature.columns_per_axis} columns per axis"
        )

    speed = max_speed_bound(domain)
    if cfg.dt * speed > CFL_FRACTION * domain.diam_omega2:
        raise ConfigValidationError(
            f"dt={cfg.dt!r} too large: dt * (D + max|x|) = {cfg.dt * speed!r} exceeds "
            f"{CFL_FRACTION} * diam = {CFL_FRACTION * domain.diam_omega2!r}"
        )

    initial = cfg.initial
    if isinstance(initial, DiracCloud):
        initial.check_support(domain)
        eps = cfg.merge_tolerance if cfg.merge_tolerance is not None else default_merge_tolerance(domain.diam_omega2)
        merged = merge_coincident(initial, eps)
        if merged is not initial:
            cfg = SimConfig(**{**{name: getattr(cfg, name) for name in cfg.__dataclass_fields__}, "initial": merged})
    else:
        _check_analytic(initial, domain)

    required, ok = support_horizon_check(cfg)
    if not ok:
        logger.warning(
            f"Horizontal radius D={domain.horizontal_radius} does not exceed D0 + max|x|(T+1) = {required}; "
            "points may approach the bound late in the run",
            required_radius=required,
        )

    return cfg
