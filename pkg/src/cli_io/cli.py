"""Command line entry points: dual-solve, simulate, trace, oracle, energy-report, validate-env."""

import json
import uuid
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Tuple

import click

from src.catalog import (
    RunStatus,
    create_catalog_engine,
    create_run,
    get_run,
    init_db,
    list_snapshots,
    record_snapshot,
    session_factory,
    update_run_status,
)
from src.cli_io.config_loader import load_config
from src.cli_io.reports import dual_solve_report, energy_report, oracle_report, trace_report
from src.cli_io.snapshots import (
    load_run_snapshots,
    read_manifest,
    read_snapshot,
    require_run_directory,
    write_checkpoint,
    write_json,
    write_manifest,
    write_snapshot,
    write_trajectory_csv,
)
from src.cli_utils import (
    CommonGroup,
    common_options,
    error_handler,
    handle_common_options,
    info_message,
    success_message,
    warning_message,
)
from src.config import EnvironmentConfig, SNAPSHOTS_SUBDIR, get_runs_dir
from src.domain_model.types import OutputSpec
from src.dual_solver.solver import initial_weights, solve_weights
from src.dynamics.simulation import conservation_summary, initial_cloud, simulate, solver_settings
from src.dynamics.snapshot import Snapshot
from src.errors import SemigeostrophicError, ToleranceBreach
from src.lagrangian_flow.particles import sample_particles
from src.lagrangian_flow.tracing import TRACE_MODES, trace
from src.logging_config import OperationContext, get_logger

logger = get_logger(__name__)

DUAL_SOLVE_REPORT = "dual_solve.json"
ENERGY_REPORT = "energy_report.json"
TRACE_REPORT = "trace_report.json"
TRAJECTORY_FILE = "trajectory.csv"
ORACLE_REPORT = "oracle_report.json"
STORED_VOLUME_TOLERANCE = 1e-12


def create_catalog_engine_for(run_dir: Path):
    run_dir.mkdir(parents=True, exist_ok=True)
    engine = create_catalog_engine(run_dir)
    init_db(engine)
    return engine


def _run_dir_of_state(state_path: Path) -> Path:
    return state_path.parent.parent if state_path.parent.name == SNAPSHOTS_SUBDIR else state_path.parent


@click.group(cls=CommonGroup)
def cli():
    """Semigeostrophic free-surface solver on Dirac dual measures."""
    pass


@cli.command("dual-solve")
@click.option('--config', 'config_path', required=True, type=click.Path(dir_okay=False), help='Run configuration (JSON)')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None, help='Directory for dual_solve.json')
@common_options
@error_handler
def dual_solve(config_path, out_dir, verbose, threads):
    """Solve the static dual problem once and report weights, cells and bounds."""
    n_jobs = handle_common_options(verbose, threads)
    with OperationContext("dual-solve"):
        cfg = load_config(config_path)
        settings = solver_settings(cfg, n_jobs)
        cloud = initial_cloud(cfg, settings.grid)
        weights, stats, report = solve_weights(
            cloud, initial_weights(cloud, cfg.solver_init), settings.tol, settings.max_iter, settings.grid, n_jobs=n_jobs,
        )
        result = dual_solve_report(cloud, weights, stats, report, cfg.domain)

        if out_dir:
            path = Path(out_dir) / DUAL_SOLVE_REPORT
            write_json(path, result)
            info_message(f"Report written to {path}")
        else:
            click.echo(json.dumps(result, indent=2))

        if not report.converged:
            raise ToleranceBreach(
                f"solver ended with status {report.status.value}, residual {report.residual_norm!r} > {settings.tol!r}",
                value=report.residual_norm, limit=settings.tol,
            )
        success_message(
            f"Converged in {report.iterations} iterations: J={stats.dual_value!r}, "
            f"E-J={result['duality_gap']:.3e}, max|vol-nu|={result['marginal_residual']:.3e}"
        )
        if not result["bounds_ok"]:
            failed = [b["name"] for b in result["bounds"] if not b["ok"]]
            raise ToleranceBreach(f"bounds violated at the optimum: {', '.join(failed)}")


@cli.command("simulate")
@click.option('--config', 'config_path', required=True, type=click.Path(dir_okay=False), help='Run configuration (JSON)')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None, help='Run directory (default: output.out_dir or SGFB_RUNS_DIR/<run id>)')
@click.option('--stride', type=int, default=None, help='Emit a snapshot every K steps')
@click.option('--resume', 'resume_path', type=click.Path(dir_okay=False), default=None, help='State or checkpoint file to continue from')
@common_options
@error_handler
def simulate_cmd(config_path, out_dir, stride, resume_path, verbose, threads):
    """Run the time loop and persist snapshots, checkpoint and catalog rows."""
    n_jobs = handle_common_options(verbose, threads)
    cfg = load_config(config_path)
    if stride is not None:
        if stride < 1:
            raise click.BadParameter("--stride must be >= 1")
        cfg = replace(cfg, output=OutputSpec(out_dir=cfg.output.out_dir, stride=stride))

    resume: Optional[Snapshot] = None
    if resume_path:
        resume = read_snapshot(Path(resume_path))
        if out_dir is None:
            out_dir = _run_dir_of_state(Path(resume_path))

    run_dir = Path(out_dir or cfg.output.out_dir or get_runs_dir() / uuid.uuid4().hex[:12])
    engine = create_catalog_engine_for(run_dir)
    Session = session_factory(engine)

    with Session() as session:
        run = get_run(session) if resume is not None else None
        settings = solver_settings(cfg, n_jobs)
        if run is None:
            atoms = resume.cloud.count if resume is not None else initial_cloud(cfg, settings.grid).count
            run = create_run(session, cfg, run_dir, atoms)
        else:
            update_run_status(session, run.id, RunStatus.RUNNING, last_step=resume.step)
        write_manifest(cfg, run_dir, {"run_id": run.id})

        def persist(snapshot: Snapshot) -> None:
            state_path, height_path = write_snapshot(snapshot, run_dir, settings.grid)
            write_checkpoint(snapshot, run_dir)
            record_snapshot(
                session, run.id, snapshot,
                str(state_path.relative_to(run_dir)), str(height_path.relative_to(run_dir)),
            )

        with OperationContext("simulate", run_id=run.id):
            try:
                result = simulate(cfg, n_jobs=n_jobs, on_snapshot=persist, resume=resume)
            except SemigeostrophicError as e:
                update_run_status(session, run.id, RunStatus.FAILED, message=str(e))
                raise

            final_step = result.final_state.step_index
            status = RunStatus.EQUILIBRIUM if result.equilibrium else RunStatus.COMPLETED
            update_run_status(session, run.id, status, last_step=final_step)

    if result.snapshots:
        summary = conservation_summary(result.snapshots, cfg.domain, cfg.solver_tol)
        for check in summary.failed():
            warning_message(f"{check.name}: {check.value!r} > {check.limit!r}")
    success_message(f"Run {run.id} finished at step {final_step}; {len(result.snapshots)} snapshot(s) in {run_dir}")


def _catalog_entries(run_dir: Path) -> Tuple[Optional[str], List[int]]:
    """Run id and catalogued snapshot steps of a run directory."""
    engine = create_catalog_engine_for(run_dir)
    with session_factory(engine)() as session:
        run = get_run(session)
        if run is None:
            return None, []
        return run.id, [entry.step for entry in list_snapshots(session, run.id)]


@cli.command("trace")
@click.option('--run', 'run_dir', required=True, type=click.Path(file_okay=False, exists=True), help='Simulation output directory')
@click.option('--particles', 'count', type=int, default=1000, show_default=True, help='Number of particles M')
@click.option('--seed', type=int, default=0, show_default=True, help='Particle sampling seed')
@click.option('--mode', type=click.Choice(TRACE_MODES), default='centroid', show_default=True)
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None, help='Output directory (default: the run directory)')
@common_options
@error_handler
def trace_cmd(run_dir, count, seed, mode, out_dir, verbose, threads):
    """Reconstruct particle trajectories and weak-form residuals from a run."""
    n_jobs = handle_common_options(verbose, threads)
    run_dir = Path(run_dir)
    out_dir = Path(out_dir) if out_dir else run_dir
    require_run_directory(run_dir)
    run_id, _ = _catalog_entries(run_dir)
    with OperationContext("trace", run_id=run_id):
        cfg, _ = read_manifest(run_dir)
        snapshots = load_run_snapshots(run_dir)
        if not snapshots:
            raise ValueError(f"No snapshots indexed in {run_dir}")
        first = snapshots[0]
        particles = sample_particles(first.cloud, first.weight_vector, cfg.domain, count, seed=seed)
        log = trace(particles, snapshots, mode=mode, domain=cfg.domain, seed=seed)
        settings = solver_settings(cfg, n_jobs)

        write_trajectory_csv(out_dir / TRAJECTORY_FILE, log.times, log.positions, log.cells)
        report = trace_report(log, snapshots, settings.grid)
        write_json(out_dir / TRACE_REPORT, report)

    info_message(f"z-equation residual: {report['z_equation_residual']}")
    success_message(f"Traced {count} particles over {len(snapshots)} snapshots into {out_dir}")


@cli.command("oracle")
@click.option('--state', 'state_path', required=True, type=click.Path(dir_okay=False, exists=True), help='State file of a run')
@click.option('--run', 'run_dir', type=click.Path(file_okay=False, exists=True), default=None, help='Run directory (default: inferred from the state path)')
@click.option('--resolution', type=int, default=128, show_default=True, help='Voxels per axis')
@click.option('--constant', type=float, default=8.0, show_default=True, help='C in the agreement limit C/resolution')
@common_options
@error_handler
def oracle_cmd(state_path, run_dir, resolution, constant, verbose, threads):
    """Compare stored volumes, a fresh column sweep and the voxel oracle."""
    n_jobs = handle_common_options(verbose, threads)
    state_path = Path(state_path)
    run_dir = Path(run_dir) if run_dir else _run_dir_of_state(state_path)
    with OperationContext("oracle"):
        cfg, _ = read_manifest(run_dir)
        snapshot = read_snapshot(state_path)
        settings = solver_settings(cfg, n_jobs)
        report = oracle_report(snapshot, cfg.domain, settings.grid, resolution, constant, n_jobs=n_jobs)
        write_json(run_dir / ORACLE_REPORT, report)

    info_message(
        f"stored vs engine {report['stored_vs_engine']:.3e}; "
        f"engine vs voxel {report['engine_vs_voxel']:.3e} (limit {report['limit']:.3e})"
    )
    if report["stored_vs_engine"] > STORED_VOLUME_TOLERANCE:
        raise ToleranceBreach(
            f"stored volumes differ from the column engine by {report['stored_vs_engine']!r}",
            value=report["stored_vs_engine"], limit=STORED_VOLUME_TOLERANCE,
        )
    if report["engine_vs_voxel"] > report["limit"]:
        raise ToleranceBreach(
            f"engine and voxel volumes differ by {report['engine_vs_voxel']!r} > {report['limit']!r}",
            value=report["engine_vs_voxel"], limit=report["limit"],
        )
    success_message("Engine agrees with the voxel oracle")


@cli.command("energy-report")
@click.option('--run', 'run_dir', required=True, type=click.Path(file_okay=False, exists=True), help='Simulation output directory')
@common_options
@error_handler
def energy_report_cmd(run_dir, verbose, threads):
    """Conservation summaries and bound checks over every snapshot of a run."""
    n_jobs = handle_common_options(verbose, threads)
    run_dir = Path(run_dir)
    require_run_directory(run_dir)
    run_id, catalog_steps = _catalog_entries(run_dir)
    with OperationContext("energy-report", run_id=run_id):
        cfg, _ = read_manifest(run_dir)
        snapshots = load_run_snapshots(run_dir)
        if not snapshots:
            raise ValueError(f"No snapshots indexed in {run_dir}")
        report = {
            "run_id": run_id,
            "catalog_steps": catalog_steps,
            **energy_report(snapshots, cfg, solver_settings(cfg, n_jobs)),
        }
        write_json(run_dir / ENERGY_REPORT, report)

    indexed_steps = [s.step for s in snapshots]
    if catalog_steps != indexed_steps:
        warning_message(f"Catalog lists steps {catalog_steps}, index lists {indexed_steps}")

    conservation = report["conservation"]
    info_message(
        f"energy drift {conservation['energy_drift']:.3e}, max mass error {conservation['max_mass_error']:.3e}, "
        f"slab exact: {conservation['slab_exact']}"
    )
    if not report["ok"]:
        failed = [c["name"] for c in conservation["checks"] if not c["ok"]]
        failed += [f"{b['name']}@{b['step']}" for b in report["failed_bounds"]]
        if not conservation["slab_exact"]:
            failed.append("slab_exact")
        raise ToleranceBreach(f"energy report found violations: {', '.join(failed)}")
    success_message(f"Energy report written to {run_dir / ENERGY_REPORT}")


@cli.command("validate-env")
@click.option('--show-guide', is_flag=True, help='Show configuration guide')
def validate_env(show_guide):
    """Validate environment configuration."""
    if show_guide:
        click.echo(EnvironmentConfig.get_configuration_guide())
        return

    click.echo("Validating environment configuration...")
    is_valid, result = EnvironmentConfig.validate_environment()
    summary = result['summary']
    click.echo(f"  Configured variables: {summary['configured']}/{summary['total_vars']}")
    for default in result['defaults_used']:
        click.echo(f"  • {default['name']} (default: {default['default']})")
    for warning in result['warnings']:
        warning_message(warning)

    if result['errors']:
        for error in result['errors']:
            click.echo(f"  • {error}")
        click.echo("\n❌ Environment configuration has errors!")
        raise SystemExit(1)
    click.echo("\n✅ Environment configuration is valid!")


if __name__ == '__main__':
    cli()
