"""JSON-ready reports assembled from solves, runs, traces and oracle comparisons."""

from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.domain_model.types import DiracCloud, DomainSpec, SimConfig, WeightVector
from src.dual_solver.solver import SolveReport
from src.dynamics.integrator import SolverSettings, velocity_field
from src.dynamics.simulation import conservation_summary
from src.dynamics.snapshot import Snapshot, state_from_snapshot
from src.envelope_geometry.bounds import bounds_suite
from src.envelope_geometry.decomposition import CellStats, decompose
from src.envelope_geometry.quadrature import QuadratureGrid
from src.errors import EmptyCellError
from src.lagrangian_flow.tracing import TrajectoryLog, marginal_check, z_equation_residual
from src.lagrangian_flow.weak_form import standard_test_suite, weak_form_terms
from src.oracle.voxel import compare_volumes, voxel_decompose


def dual_solve_report(
    cloud: DiracCloud,
    weights: WeightVector,
    stats: CellStats,
    report: SolveReport,
    domain: DomainSpec,
) -> Dict[str, Any]:
    try:
        velocities: Optional[np.ndarray] = velocity_field(cloud, stats)
    except EmptyCellError:
        velocities = None
    checks = bounds_suite(stats, domain, velocities)
    return {
        "solver": report.to_dict(),
        "weights": np.asarray(weights.weights).tolist(),
        "volumes": np.asarray(stats.volumes).tolist(),
        "centroids": np.asarray(stats.centroids).tolist(),
        "velocities": None if velocities is None else velocities.tolist(),
        "primal_energy": stats.primal_energy,
        "dual_value": stats.dual_value,
        "duality_gap": stats.primal_energy - stats.dual_value,
        "marginal_residual": float(np.max(np.abs(stats.volumes - cloud.masses))),
        "total_volume": stats.total_volume,
        "max_height": stats.max_height,
        "bounds": [check.to_dict() for check in checks],
        "bounds_ok": all(check.ok for check in checks),
    }


def energy_report(snapshots: Sequence[Snapshot], cfg: SimConfig, settings: SolverSettings) -> Dict[str, Any]:
    """Per-snapshot energies, the bounds suite at every snapshot and the conservation summary."""
    rows = []
    failed_bounds: List[Dict[str, Any]] = []
    for snapshot in snapshots:
        state = state_from_snapshot(snapshot, settings)
        checks = bounds_suite(state.stats, cfg.domain, velocity_field(state.cloud, state.stats))
        failed_bounds.extend({"step": snapshot.step, **c.to_dict()} for c in checks if not c.ok)
        rows.append({
            "step": snapshot.step,
            "time": snapshot.time,
            "energy": snapshot.energy,
            "dual_value": snapshot.dual_value,
            "duality_gap": snapshot.duality_gap,
            "residual_norm": snapshot.residual_norm,
            "mass_error": snapshot.mass_error,
            "support_radius": snapshot.support_radius,
            "solver_iterations": snapshot.solver_iterations,
        })
    summary = conservation_summary(list(snapshots), cfg.domain, cfg.solver_tol)
    return {
        "snapshots": rows,
        "conservation": summary.to_dict(),
        "failed_bounds": failed_bounds,
        "ok": summary.ok and not failed_bounds,
    }


def trace_report(log: TrajectoryLog, snapshots: Sequence[Snapshot], grid: QuadratureGrid) -> Dict[str, Any]:
    marginal = [
        {"step": int(s.step), "time": float(s.time), "l1_gap": marginal_check(log, k, s.height_field, grid)}
        for k, s in enumerate(snapshots)
    ]
    try:
        z_residual: Optional[float] = z_equation_residual(log)
    except ValueError:
        z_residual = None

    weak_form = []
    if len(log.times) >= 2 and log.uniform_span() == len(log.times):
        for xi, psi in standard_test_suite(float(log.times[-1])):
            terms = weak_form_terms(log, xi, psi)
            weak_form.append({
                "xi": xi.name,
                "psi": psi.name,
                "transport": terms.transport,
                "rotation": terms.rotation,
                "initial": terms.initial,
                "residual": terms.total,
            })

    counts = log.particles.counts_per_cell(log.dual_positions.shape[1])
    return {
        "mode": log.mode,
        "particles": log.particles.count,
        "particles_per_cell": counts.tolist(),
        "marginal_l1": marginal,
        "z_equation_residual": z_residual,
        "weak_form": weak_form,
    }


def oracle_report(
    snapshot: Snapshot,
    domain: DomainSpec,
    grid: QuadratureGrid,
    resolution: int,
    constant: float,
    n_jobs: int = 1,
) -> Dict[str, Any]:
    """Stored volumes vs a fresh column sweep vs the voxel oracle."""
    cloud, weights = snapshot.cloud, snapshot.weight_vector
    engine = decompose(cloud, weights, grid, n_jobs=n_jobs)
    voxel = voxel_decompose(cloud, weights, domain, resolution, n_jobs=n_jobs)
    stored_gap = float(np.max(np.abs(snapshot.volumes - engine.volumes)))
    oracle_gap = compare_volumes(engine.volumes, voxel)
    return {
        "step": snapshot.step,
        "time": snapshot.time,
        "resolution": resolution,
        "z_top": voxel.z_top,
        "stored_vs_engine": stored_gap,
        "engine_vs_voxel": oracle_gap,
        "limit": constant / resolution,
        "engine_volumes": engine.volumes.tolist(),
        "voxel_volumes": voxel.volumes.tolist(),
        "voxel_centroids": voxel.centroids.tolist(),
    }
