"""Run configuration file schema.

The JSON tree mirrors SimConfig key for key. Unknown keys are rejected.
"""

from typing import List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DomainSettings(_Strict):
    omega2_polygon: List[Tuple[float, float]] = Field(min_length=3)
    delta: float = Field(gt=0.0, le=1.0)
    cap_height: float = Field(gt=0.0)
    horizontal_radius: float = Field(gt=0.0)


class ExplicitCloudSettings(_Strict):
    kind: Literal["explicit"]
    points: List[Tuple[float, float, float]] = Field(min_length=1)
    masses: Optional[List[float]] = None


class AnalyticDataSettings(_Strict):
    kind: Literal["analytic"]
    alpha: float = Field(gt=0.0)
    beta: float = Field(gt=0.0)
    gamma1: float = 0.0
    gamma2: float = 0.0
    b3: float
    samples: int = Field(ge=1)
    seed: int = 0


class QuadratureSettings(_Strict):
    columns_per_axis: int = Field(default=64, ge=8)


class OutputSettings(_Strict):
    out_dir: Optional[str] = None
    stride: int = Field(default=1, ge=1)


class RunConfigFile(_Strict):
    """Top-level schema of a run configuration file."""

    domain: DomainSettings
    initial: Union[ExplicitCloudSettings, AnalyticDataSettings] = Field(discriminator="kind")
    dt: float = Field(gt=0.0)
    steps: int = Field(ge=0)
    scheme: Literal["euler", "rk4"] = "euler"
    solver_tol: Optional[float] = Field(default=None, gt=0.0)
    solver_max_iter: int = Field(default=2000, ge=1)
    quadrature: QuadratureSettings = QuadratureSettings()
    output: OutputSettings = OutputSettings()
    merge_tolerance: Optional[float] = Field(default=None, ge=0.0)
    stop_at_equilibrium: bool = False
    solver_init: Literal["quadratic", "zeros"] = "quadratic"
