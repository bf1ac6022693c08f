"""Immutable value types shared by every stage of the solver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np

from src.errors import ConfigValidationError

MASS_SUM_TOLERANCE = 1e-12
MIN_COLUMNS_PER_AXIS = 8


def _frozen_array(values, dtype=np.float64, ndim: Optional[int] = None) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    if ndim is not None and array.ndim != ndim:
        raise ConfigValidationError(f"Expected a {ndim}-D array, got shape {array.shape}")
    array.setflags(write=False)
    return array


class Scheme(str, Enum):
    """Time integration schemes for the dual point dynamics."""

    EULER = "euler"
    RK4 = "rk4"


@dataclass(frozen=True)
class DomainSpec:
    """Convex horizontal domain, slab parameter and cap height.

    The polygon is given counter-clockwise. Derived quantities are filled in
    at construction and the cap height is checked against the threshold
    2/area + (2 max|x| + 2D)/delta * diam.
    """

    omega2_polygon: Tuple[Tuple[float, float], ...]
    delta: float
    cap_height: float
    horizontal_radius: float
    area_omega2: float = field(init=False)
    max_abs_x: float = field(init=False)
    diam_omega2: float = field(init=False)

    def __post_init__(self):
        vertices = tuple((float(x), float(y)) for x, y in self.omega2_polygon)
        object.__setattr__(self, "omega2_polygon", vertices)

        if len(vertices) < 3:
            raise ConfigValidationError(f"Polygon needs at least 3 vertices, got {len(vertices)}")
        if not all(math.isfinite(c) for v in vertices for c in v):
            raise ConfigValidationError("Polygon vertices must be finite")

        pts = np.asarray(vertices)
        edges = np.roll(pts, -1, axis=0) - pts
        turns = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(edges, -1, axis=0)[:, 0]
        if np.any(turns < 0.0) or not np.any(turns > 0.0):
            raise ConfigValidationError(
                "Polygon must be convex and listed counter-clockwise "
                f"(edge turns {turns.tolist()})"
            )

        area = 0.5 * float(np.sum(pts[:, 0] * np.roll(pts[:, 1], -1) - np.roll(pts[:, 0], -1) * pts[:, 1]))
        if area <= 0.0:
            raise ConfigValidationError(f"Polygon area must be positive, got {area}")

        diffs = pts[:, None, :] - pts[None, :, :]
        object.__setattr__(self, "area_omega2", area)
        object.__setattr__(self, "max_abs_x", float(np.max(np.hypot(pts[:, 0], pts[:, 1]))))
        object.__setattr__(self, "diam_omega2", float(np.max(np.hypot(diffs[..., 0], diffs[..., 1]))))

        if not (0.0 < self.delta <= 1.0):
            raise ConfigValidationError(f"delta must satisfy 0 < delta <= 1, got {self.delta}")
        if self.horizontal_radius < self.max_abs_x:
            raise ConfigValidationError(
                f"horizontal_radius D={self.horizontal_radius} must be >= max|x| over the "
                f"polygon ({self.max_abs_x})"
            )
        threshold = self.cap_threshold
        if not self.cap_height > threshold:
            raise ConfigValidationError(
                f"cap_height H={self.cap_height} must exceed the threshold {threshold!r}"
            )

    @property
    def cap_threshold(self) -> float:
        return (
            2.0 / self.area_omega2
            + (2.0 * self.max_abs_x + 2.0 * self.horizontal_radius) / self.delta * self.diam_omega2
        )

    @property
    def slab(self) -> Tuple[float, float]:
        """Admissible range of the third dual coordinate."""
        return (-1.0 / self.delta, -self.delta)

    @property
    def bounding_box(self) -> Tuple[float, float, float, float]:
        pts = np.asarray(self.omega2_polygon)
        return (float(pts[:, 0].min()), float(pts[:, 1].min()), float(pts[:, 0].max()), float(pts[:, 1].max()))

    def contains(self, points: np.ndarray, tolerance: float = 1e-14) -> np.ndarray:
        """Vectorized membership of 2-D points in the closed polygon."""
        pts = np.asarray(self.omega2_polygon)
        xy = np.atleast_2d(np.asarray(points, dtype=np.float64))[:, :2]
        inside = np.ones(len(xy), dtype=bool)
        for k in range(len(pts)):
            p, q = pts[k], pts[(k + 1) % len(pts)]
            cross = (q[0] - p[0]) * (xy[:, 1] - p[1]) - (q[1] - p[1]) * (xy[:, 0] - p[0])
            inside &= cross >= -tolerance
        return inside


@dataclass(frozen=True, eq=False)
class DiracCloud:
    """Weighted dual points y_i with masses nu_i summing to one."""

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        points = _frozen_array(self.points, ndim=2)
        masses = _frozen_array(self.masses, ndim=1)
        if points.shape[1] != 3:
            raise ConfigValidationError(f"Dual points must be 3-D, got shape {points.shape}")
        if len(points) == 0 or len(points) != len(masses):
            raise ConfigValidationError(
                f"Cloud needs N >= 1 points with one mass each (points {len(points)}, masses {len(masses)})"
            )
        if not (np.all(np.isfinite(points)) and np.all(np.isfinite(masses))):
            raise ConfigValidationError("Cloud points and masses must be finite")
        if np.any(masses <= 0.0):
            raise ConfigValidationError("All masses must be strictly positive")
        total = float(np.sum(masses))
        if abs(total - 1.0) > MASS_SUM_TOLERANCE:
            raise ConfigValidationError(f"Masses must sum to 1 within {MASS_SUM_TOLERANCE}, got {total!r}")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "masses", masses)

    @property
    def count(self) -> int:
        return len(self.masses)

    @property
    def horizontal_radius(self) -> float:
        """Largest horizontal norm |(y_1, y_2)| over the cloud."""
        return float(np.max(np.hypot(self.points[:, 0], self.points[:, 1])))

    def with_points(self, points: np.ndarray) -> "DiracCloud":
        """Same atoms moved to new positions; masses are carried over."""
        return DiracCloud(points=points, masses=self.masses)

    def check_support(self, domain: DomainSpec) -> None:
        """Raise ConfigValidationError unless every point lies in the slab and B_D."""
        low, high = domain.slab
        y3 = self.points[:, 2]
        bad = np.flatnonzero((y3 < low) | (y3 > high))
        if bad.size:
            i = int(bad[0])
            raise ConfigValidationError(
                f"Point {i} has y3={y3[i]!r} outside the slab [{low!r}, {high!r}]"
            )
        radii = np.hypot(self.points[:, 0], self.points[:, 1])
        bad = np.flatnonzero(radii > domain.horizontal_radius)
        if bad.size:
            i = int(bad[0])
            raise ConfigValidationError(
                f"Point {i} has horizontal radius {radii[i]!r} > D={domain.horizontal_radius!r}"
            )

    def __eq__(self, other):
        if not isinstance(other, DiracCloud):
            return NotImplemented
        return np.array_equal(self.points, other.points) and np.array_equal(self.masses, other.masses)

    __hash__ = object.__hash__


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Dual weights R_i aligned index-for-index with a DiracCloud."""

    weights: np.ndarray

    def __post_init__(self):
        weights = _frozen_array(self.weights, ndim=1)
        if not np.all(np.isfinite(weights)):
            raise ValueError("Weights must be finite")
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return len(self.weights)

    def check_aligned(self, cloud: DiracCloud) -> None:
        if len(self.weights) != cloud.count:
            raise ValueError(f"Weight vector has {len(self.weights)} entries for {cloud.count} points")

    @classmethod
    def quadratic_start(cls, cloud: DiracCloud) -> "WeightVector":
        """Default start R_i = (y_i1^2 + y_i2^2)/2, an upper bound at the optimum."""
        return cls(0.5 * (cloud.points[:, 0] ** 2 + cloud.points[:, 1] ** 2))

    @classmethod
    def zeros(cls, cloud: DiracCloud) -> "WeightVector":
        return cls(np.zeros(cloud.count))

    def __eq__(self, other):
        if not isinstance(other, WeightVector):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    __hash__ = object.__hash__


@dataclass(frozen=True)
class QuadratureSpec:
    """Midpoint column grid over the bounding box of the horizontal domain."""

    columns_per_axis: int = 64

    def __post_init__(self):
        if int(self.columns_per_axis) != self.columns_per_axis or self.columns_per_axis < MIN_COLUMNS_PER_AXIS:
            raise ConfigValidationError(
                f"columns_per_axis must be an integer >= {MIN_COLUMNS_PER_AXIS}, got {self.columns_per_axis}"
            )

    @property
    def min_solver_tol(self) -> float:
        """Smallest residual tolerance the solver accepts on this grid."""
        return 0.1 / self.columns_per_axis ** 2

    def column_area(self, domain: DomainSpec) -> float:
        x0, y0, x1, y1 = domain.bounding_box
        n = self.columns_per_axis
        return ((x1 - x0) / n) * ((y1 - y0) / n)


@dataclass(frozen=True)
class AnalyticInitialData:
    """Convex quadratic potential P0 = a x1^2/2 + b x2^2/2 + g1 x1 + g2 x2 + b3 x3 + const.

    ``const`` is None until it is calibrated so that the initial surface
    carries unit volume.
    """

    alpha: float
    beta: float
    gamma1: float
    gamma2: float
    b3: float
    samples: int
    seed: int
    const: Optional[float] = None

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Dual image y = grad P0(x) of physical points, shape (M, 3)."""
        x = np.atleast_2d(x)
        return np.column_stack([
            self.alpha * x[:, 0] + self.gamma1,
            self.beta * x[:, 1] + self.gamma2,
            np.full(len(x), self.b3),
        ])


@dataclass(frozen=True)
class OutputSpec:
    out_dir: Optional[str] = None
    stride: int = 1


InitialCondition = Union[DiracCloud, AnalyticInitialData]


@dataclass(frozen=True, eq=False)
class SimConfig:
    """A validated run configuration. Build it through validate_config."""

    domain: DomainSpec
    initial: InitialCondition
    dt: float
    steps: int
    scheme: Scheme
    solver_tol: float
    solver_max_iter: int
    quadrature: QuadratureSpec
    output: OutputSpec = OutputSpec()
    merge_tolerance: Optional[float] = None
    stop_at_equilibrium: bool = False
    solver_init: str = "quadratic"

    @property
    def horizon(self) -> float:
        return self.dt * self.steps

    def __eq__(self, other):
        if not isinstance(other, SimConfig):
            return NotImplemented
        return all(
            getattr(self, name) == getattr(other, name)
            for name in self.__dataclass_fields__
        )

    __hash__ = object.__hash__
