"""Numerical probes of the dual problem: gradient, uniqueness, shifts, stability."""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from src.domain_model.types import DiracCloud, WeightVector
from src.dual_solver.solver import SolveReport, solve_weights
from src.envelope_geometry.decomposition import decompose
from src.envelope_geometry.quadrature import QuadratureGrid
from src.errors import SemigeostrophicError


def _dual(cloud: DiracCloud, weights: np.ndarray, grid: QuadratureGrid, n_jobs: int = 1) -> float:
    return decompose(cloud, WeightVector(weights), grid, n_jobs=n_jobs).dual_value


def gradient_check(cloud: DiracCloud, w: WeightVector, grid: QuadratureGrid, eps: float = 1e-5) -> float:
    """Relative gap between central differences of J and the residual.

    Returns max_i |dJ/dR_i - r_i| / max(|r|_inf, 1e-12).
    """
    stats = decompose(cloud, w, grid)
    r = stats.volumes - cloud.masses
    fd = np.empty(cloud.count)
    for i in range(cloud.count):
        e = np.zeros(cloud.count)
        e[i] = eps
        fd[i] = (_dual(cloud, w.weights + e, grid) - _dual(cloud, w.weights - e, grid)) / (2.0 * eps)
    return float(np.max(np.abs(fd - r)) / max(float(np.max(np.abs(r))), 1e-12))


def shift_probe(cloud: DiracCloud, w: WeightVector, grid: QuadratureGrid, shift: float) -> float:
    """J(w + shift * 1) - J(w); negative at an optimum for any nonzero shift."""
    return _dual(cloud, w.weights + shift, grid) - _dual(cloud, np.asarray(w.weights), grid)


@dataclass(frozen=True)
class UniquenessResult:
    max_height_difference: float
    max_weight_difference: float
    reports: Tuple[SolveReport, SolveReport]


def uniqueness_probe(
    cloud: DiracCloud,
    tol: float,
    max_iter: int,
    grid: QuadratureGrid,
    inits: Tuple[WeightVector, WeightVector],
) -> UniquenessResult:
    """Solve from two starts and compare the optimal surfaces and weights.

    Raises:
        SemigeostrophicError: if either solve fails to converge.
    """
    solved = []
    for init in inits:
        weights, stats, report = solve_weights(cloud, init, tol, max_iter, grid)
        if not report.converged:
            raise SemigeostrophicError(f"Uniqueness probe solve did not converge ({report.status.value})")
        solved.append((weights, stats, report))

    (wa, sa, ra), (wb, sb, rb) = solved
    return UniquenessResult(
        max_height_difference=float(np.max(np.abs(sa.height_field - sb.height_field))),
        max_weight_difference=float(np.max(np.abs(wa.weights - wb.weights))),
        reports=(ra, rb),
    )


@dataclass(frozen=True)
class StabilityResult:
    eta: float
    l1_change: float

    @property
    def ratio(self) -> float:
        return self.l1_change / self.eta


def stability_probe(
    cloud: DiracCloud,
    grid: QuadratureGrid,
    etas: Sequence[float],
    tol: float,
    max_iter: int = 2000,
    seed: int = 0,
) -> List[StabilityResult]:
    """L1 change of the optimal surface when every atom moves horizontally by eta.

    Directions are drawn once from ``seed`` and reused for every eta.
    """
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=cloud.count)
    directions = np.column_stack([np.cos(angles), np.sin(angles), np.zeros(cloud.count)])

    base_w, base_stats, base_report = solve_weights(cloud, WeightVector.quadratic_start(cloud), tol, max_iter, grid)
    if not base_report.converged:
        raise SemigeostrophicError("Stability probe base solve did not converge")

    results = []
    for eta in etas:
        moved = cloud.with_points(cloud.points + eta * directions)
        _, stats, report = solve_weights(moved, base_w, tol, max_iter, grid)
        if not report.converged:
            raise SemigeostrophicError(f"Stability probe solve at eta={eta} did not converge")
        change = grid.integrate(np.abs(stats.height_field - base_stats.height_field))
        results.append(StabilityResult(eta=float(eta), l1_change=change))
    return results


def concavity_probe(
    cloud: DiracCloud,
    center: WeightVector,
    grid: QuadratureGrid,
    pairs: int = 10,
    magnitude: float = 0.1,
    seed: int = 0,
) -> float:
    """Worst midpoint concavity violation (J(a) + J(b))/2 - J((a + b)/2)."""
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(pairs):
        a = center.weights + rng.uniform(-magnitude, magnitude, size=cloud.count)
        b = center.weights + rng.uniform(-magnitude, magnitude, size=cloud.count)
        gap = 0.5 * (_dual(cloud, a, grid) + _dual(cloud, b, grid)) - _dual(cloud, 0.5 * (a + b), grid)
        worst = max(worst, gap)
    return float(worst)
