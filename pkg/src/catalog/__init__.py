"""SQLite catalog of runs and their emitted snapshots."""

from src.catalog.models import Base, Run, RunStatus, SnapshotEntry
from src.catalog.operations import (
    create_catalog_engine,
    create_run,
    get_run,
    init_db,
    list_snapshots,
    record_snapshot,
    session_factory,
    update_run_status,
)

__all__ = [
    'Base',
    'Run',
    'RunStatus',
    'SnapshotEntry',
    'create_catalog_engine',
    'create_run',
    'get_run',
    'init_db',
    'list_snapshots',
    'record_snapshot',
    'session_factory',
    'update_run_status',
]
