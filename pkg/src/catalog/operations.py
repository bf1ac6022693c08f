import uuid
from pathlib import Path
from typing import List, Optional

from sqlalchemy import create_engine, select
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, sessionmaker

from src.catalog.models import Base, Run, RunStatus, SnapshotEntry
from src.config import get_catalog_url
from src.domain_model.types import SimConfig
from src.dynamics.snapshot import Snapshot


def create_catalog_engine(run_dir: Path, echo: bool = False) -> Engine:
    """SQLite engine for the catalog inside a run directory."""
    return create_engine(get_catalog_url(run_dir), echo=echo)


def session_factory(engine: Engine) -> sessionmaker:
    return sessionmaker(autocommit=False, autoflush=False, bind=engine, expire_on_commit=False)


def init_db(engine: Engine) -> None:
    """Create all catalog tables that do not exist yet."""
    Base.metadata.create_all(engine)


def get_run(session: Session, run_id: Optional[str] = None) -> Optional[Run]:
    """A run by ID, or the most recently created run when no ID is given."""
    if run_id is not None:
        return session.get(Run, run_id)
    result = session.execute(select(Run).order_by(Run.created_at.desc()).limit(1))
    return result.scalars().first()


def create_run(session: Session, cfg: SimConfig, out_dir: Path, atoms: int, run_id: Optional[str] = None) -> Run:
    """Register a new run."""
    run = Run(
        id=run_id or str(uuid.uuid4()),
        out_dir=str(out_dir),
        scheme=cfg.scheme.value,
        dt=cfg.dt,
        steps=cfg.steps,
        atoms=atoms,
        columns_per_axis=cfg.quadrature.columns_per_axis,
        status=RunStatus.RUNNING,
    )
    session.add(run)
    session.commit()
    session.refresh(run)
    return run


def update_run_status(
    session: Session,
    run_id: str,
    status: RunStatus,
    last_step: Optional[int] = None,
    message: Optional[str] = None,
) -> Optional[Run]:
    """Update a run's status."""
    run = get_run(session, run_id)
    if run:
        run.status = status
        if last_step is not None:
            run.last_step = last_step
        run.message = message
        session.commit()
        session.refresh(run)
    return run


def record_snapshot(session: Session, run_id: str, snapshot: Snapshot, state_file: str, height_file: str) -> SnapshotEntry:
    """Insert the row of an emitted snapshot, replacing any earlier row for the same step."""
    result = session.execute(
        select(SnapshotEntry).filter(SnapshotEntry.run_id == run_id, SnapshotEntry.step == snapshot.step)
    )
    entry = result.scalars().first()
    if entry is None:
        entry = SnapshotEntry(run_id=run_id, step=snapshot.step)
        session.add(entry)
    entry.time = snapshot.time
    entry.energy = snapshot.energy
    entry.dual_value = snapshot.dual_value
    entry.duality_gap = snapshot.duality_gap
    entry.residual_norm = snapshot.residual_norm
    entry.support_radius = snapshot.support_radius
    entry.solver_iterations = snapshot.solver_iterations
    entry.state_file = state_file
    entry.height_file = height_file
    session.commit()
    return entry


def list_snapshots(session: Session, run_id: str) -> List[SnapshotEntry]:
    """Snapshot rows of a run in step order."""
    result = session.execute(
        select(SnapshotEntry).filter(SnapshotEntry.run_id == run_id).order_by(SnapshotEntry.step)
    )
    return list(result.scalars().all())
