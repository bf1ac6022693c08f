"""Unit tests for the run catalog."""
from dataclasses import replace

import pytest

from src.catalog import (
    Run,
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
from src.domain_model.validation import validate_config
from src.dynamics.simulation import simulate


@pytest.fixture
def db_session(tmp_path):
    """A session on a fresh SQLite catalog inside a temporary run directory."""
    engine = create_catalog_engine(tmp_path)
    init_db(engine)
    SessionLocal = session_factory(engine)
    with SessionLocal() as session:
        yield session
    engine.dispose()


@pytest.fixture
def run_config(single_dirac_config):
    single_dirac_config.update(steps=2)
    return validate_config(single_dirac_config)


class TestRunModel:
    def test_repr(self):
        run = Run(id="abc", status=RunStatus.RUNNING, steps=3)
        assert repr(run) == "<Run(id='abc', status='running', steps=3)>"

    def test_status_values(self):
        assert {s.value for s in RunStatus} == {"running", "completed", "failed", "equilibrium"}


class TestRunOperations:
    """Test creating, finding and updating runs."""

    def test_create_run(self, db_session, run_config, tmp_path):
        run = create_run(db_session, run_config, tmp_path, atoms=1, run_id="run-1")
        assert run.id == "run-1"
        assert run.status is RunStatus.RUNNING
        assert run.scheme == "euler"
        assert run.columns_per_axis == 64
        assert run.created_at is not None

    def test_generated_id(self, db_session, run_config, tmp_path):
        run = create_run(db_session, run_config, tmp_path, atoms=1)
        assert len(run.id) == 36

    def test_get_run_by_id_and_latest(self, db_session, run_config, tmp_path):
        create_run(db_session, run_config, tmp_path, atoms=1, run_id="first")
        create_run(db_session, run_config, tmp_path, atoms=1, run_id="second")
        assert get_run(db_session, "first").id == "first"
        assert get_run(db_session).id == "second"
        assert get_run(db_session, "missing") is None

    def test_update_status(self, db_session, run_config, tmp_path):
        create_run(db_session, run_config, tmp_path, atoms=1, run_id="r")
        run = update_run_status(db_session, "r", RunStatus.FAILED, last_step=7, message="cap saturated")
        assert run.status is RunStatus.FAILED
        assert run.last_step == 7
        assert run.message == "cap saturated"

    def test_update_missing_run(self, db_session):
        assert update_run_status(db_session, "nope", RunStatus.COMPLETED) is None


class TestSnapshotRows:
    """Test recording emitted snapshots."""

    def test_record_and_list(self, db_session, run_config, tmp_path):
        create_run(db_session, run_config, tmp_path, atoms=1, run_id="r")
        for snapshot in reversed(simulate(run_config).snapshots):
            record_snapshot(db_session, "r", snapshot, f"s{snapshot.step}.json", f"h{snapshot.step}.csv")
        rows = list_snapshots(db_session, "r")
        assert [row.step for row in rows] == [0, 1, 2]
        assert rows[0].time == 0.0
        assert rows[2].state_file == "s2.json"

    def test_record_replaces_same_step(self, db_session, run_config, tmp_path):
        create_run(db_session, run_config, tmp_path, atoms=1, run_id="r")
        snapshot = simulate(run_config).snapshots[0]
        record_snapshot(db_session, "r", snapshot, "a.json", "a.csv")
        record_snapshot(db_session, "r", replace(snapshot, energy=5.0), "b.json", "b.csv")
        rows = list_snapshots(db_session, "r")
        assert len(rows) == 1
        assert rows[0].energy == 5.0
        assert rows[0].state_file == "b.json"

    def test_rows_belong_to_run(self, db_session, run_config, tmp_path):
        create_run(db_session, run_config, tmp_path, atoms=1, run_id="r")
        create_run(db_session, run_config, tmp_path, atoms=1, run_id="other")
        record_snapshot(db_session, "r", simulate(run_config).snapshots[0], "a.json", "a.csv")
        assert list_snapshots(db_session, "other") == []
