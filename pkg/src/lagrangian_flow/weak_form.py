"""Relaxed Lagrangian weak form evaluated on traced particles.

For test functions xi on dual space and psi(t, x) vanishing at the final
time, the residual is

    int_0^T sum_p m_p xi(Z_p) d_t psi(t, x_p) dt
  + int_0^T sum_p m_p grad xi(Z_p) . J(Z_p - xhat_p) psi(t, x_p) dt
  + sum_p m_p xi(Z_p(0)) psi(0, x_p)

with x_p the initial particle position and xhat_p(t) its traced position.
"""

from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from src.dynamics.integrator import rotate
from src.lagrangian_flow.tracing import TrajectoryLog

TERMINAL_TOLERANCE = 1e-12

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SmoothFunction:
    """A C1 function on R^3 with its gradient, both vectorized over rows."""

    name: str
    value: ArrayFn
    gradient: ArrayFn


@dataclass(frozen=True)
class SpaceTimeCutoff:
    """psi(t, x) = (T - t)^power * phi(x), which vanishes at t = T."""

    spatial: SmoothFunction
    horizon: float
    power: int = 1

    def __post_init__(self):
        if self.power < 1:
            raise ValueError(f"Cutoff power must be at least 1, got {self.power}")

    @property
    def name(self) -> str:
        return f"(T-t)^{self.power}*{self.spatial.name}"

    def value(self, t: float, x: np.ndarray) -> np.ndarray:
        return (self.horizon - t) ** self.power * self.spatial.value(x)

    def time_derivative(self, t: float, x: np.ndarray) -> np.ndarray:
        return -self.power * (self.horizon - t) ** (self.power - 1) * self.spatial.value(x)


def constant(c: float = 1.0) -> SmoothFunction:
    return SmoothFunction(
        name=f"const({c:g})",
        value=lambda y: np.full(len(y), float(c)),
        gradient=lambda y: np.zeros((len(y), 3)),
    )


def coordinate(k: int) -> SmoothFunction:
    if k not in (0, 1, 2):
        raise ValueError(f"Coordinate index must be 0, 1 or 2, got {k}")
    unit = np.eye(3)[k]
    return SmoothFunction(
        name=f"coord{k + 1}",
        value=lambda y: np.asarray(y)[:, k].copy(),
        gradient=lambda y: np.tile(unit, (len(y), 1)),
    )


def gaussian_bump(center: Sequence[float], width: float, radius: float) -> SmoothFunction:
    """exp(-|y-c|^2 / 2s^2) * (1 - |y-c|^2/rho^2)^2, zero beyond rho."""
    c = np.asarray(center, dtype=np.float64)

    def parts(y):
        d = np.asarray(y) - c
        r2 = np.sum(d * d, axis=1)
        inside = r2 < radius * radius
        gauss = np.exp(-r2 / (2.0 * width * width))
        taper = np.where(inside, 1.0 - r2 / (radius * radius), 0.0)
        return d, gauss, taper

    def value(y):
        _, gauss, taper = parts(y)
        return gauss * taper * taper

    def gradient(y):
        d, gauss, taper = parts(y)
        factor = gauss * (-taper * taper / (width * width) - 4.0 * taper / (radius * radius))
        return factor[:, None] * d

    return SmoothFunction(name=f"bump({c.tolist()},{width:g},{radius:g})", value=value, gradient=gradient)


WeakFormPair = Tuple[SmoothFunction, SpaceTimeCutoff]


def standard_test_suite(horizon: float, center: Sequence[float] = (0.5, 0.5, -1.0), width: float = 0.5) -> List[WeakFormPair]:
    """The fixed five (xi, psi) pairs used for weak-form checks."""
    spatial_bump = gaussian_bump((center[0], center[1], 0.5), width, 4.0 * width)
    return [
        (constant(1.0), SpaceTimeCutoff(constant(1.0), horizon, 1)),
        (coordinate(0), SpaceTimeCutoff(constant(1.0), horizon, 1)),
        (coordinate(1), SpaceTimeCutoff(coordinate(0), horizon, 2)),
        (gaussian_bump(center, width, 4.0 * width), SpaceTimeCutoff(spatial_bump, horizon, 2)),
        (gaussian_bump(center, 2.0 * width, 8.0 * width), SpaceTimeCutoff(coordinate(1), horizon, 3)),
    ]


@dataclass(frozen=True)
class WeakFormTerms:
    transport: float
    rotation: float
    initial: float

    @property
    def total(self) -> float:
        return self.transport + self.rotation + self.initial


def weak_form_terms(log: TrajectoryLog, xi: SmoothFunction, psi: SpaceTimeCutoff) -> WeakFormTerms:
    """The three terms of the weak form, time integrals by the trapezoid rule.

    Raises:
        ValueError: if psi does not vanish at the final time, or the
            snapshots are not uniformly spaced from t = 0.
    """
    times = log.times
    if len(times) < 2 or times[0] != 0.0:
        raise ValueError("The weak form needs at least two snapshots starting at t = 0")
    if log.uniform_span() != len(times):
        raise ValueError("The weak form needs a uniform snapshot stride")

    x0 = log.particles.positions
    masses = log.particles.masses
    terminal = float(np.max(np.abs(psi.value(times[-1], x0))))
    if terminal > TERMINAL_TOLERANCE:
        raise ValueError(f"psi must vanish at the final time t={times[-1]!r} (max |psi(T)| = {terminal!r})")

    z = log.z
    transport = np.empty(len(times))
    rotation = np.empty(len(times))
    for k, t in enumerate(times):
        transport[k] = np.sum(masses * xi.value(z[k]) * psi.time_derivative(t, x0))
        flow = rotate(z[k] - log.positions[k])
        rotation[k] = np.sum(masses * np.sum(xi.gradient(z[k]) * flow, axis=1) * psi.value(t, x0))

    return WeakFormTerms(
        transport=float(np.trapezoid(transport, times)),
        rotation=float(np.trapezoid(rotation, times)),
        initial=float(np.sum(masses * xi.value(z[0]) * psi.value(0.0, x0))),
    )


def weak_form_residual(log: TrajectoryLog, xi: SmoothFunction, psi: SpaceTimeCutoff) -> float:
    return weak_form_terms(log, xi, psi).total
