"""Unit tests for config loading and run directory storage."""
import csv
import json

import numpy as np
import pytest

from src.cli_io.config_loader import config_to_mapping, load_config, parse_config_text
from src.cli_io.snapshots import (
    load_run_snapshots,
    read_checkpoint,
    read_height_csv,
    read_index,
    read_json,
    read_manifest,
    read_snapshot,
    require_run_directory,
    run_layout,
    snapshot_from_dict,
    snapshot_to_dict,
    write_checkpoint,
    write_json,
    write_manifest,
    write_snapshot,
    write_trajectory_csv,
)
from src.config import CONFIGS_DIR
from src.domain_model.validation import validate_config
from src.dynamics.simulation import simulate
from src.envelope_geometry.quadrature import build_grid
from src.errors import ConfigValidationError, RunStorageError


@pytest.fixture
def three_atom_run(three_atom_config):
    three_atom_config.update(steps=3)
    cfg = validate_config(three_atom_config)
    return cfg, simulate(cfg).snapshots


class TestLoadConfig:
    """Test reading config files."""

    def test_load_valid(self, single_dirac_config, write_config):
        cfg = load_config(write_config(single_dirac_config))
        assert cfg.dt == 0.01
        assert cfg.initial.count == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "absent.json")

    def test_bad_json_reports_position(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "dt": 0.1,\n  oops\n}', encoding="utf-8")
        with pytest.raises(ConfigValidationError, match="line 3"):
            load_config(path)

    def test_unknown_key(self, single_dirac_config, write_config):
        single_dirac_config["dtt"] = 0.1
        with pytest.raises(ConfigValidationError, match="dtt"):
            load_config(write_config(single_dirac_config))

    def test_top_level_must_be_object(self):
        with pytest.raises(ConfigValidationError, match="object"):
            parse_config_text("[1, 2]")

    @pytest.mark.parametrize("name", ["single_dirac.json", "three_atoms.json", "quadratic.json"])
    def test_shipped_configs_load(self, name):
        cfg = load_config(CONFIGS_DIR / name)
        assert cfg.steps > 0

    @pytest.mark.parametrize("fixture", ["single_dirac_config", "three_atom_config", "quadratic_config"])
    def test_mapping_round_trip(self, fixture, request):
        cfg = validate_config(request.getfixturevalue(fixture))
        mapping = config_to_mapping(cfg)
        assert validate_config(json.loads(json.dumps(mapping))) == cfg


class TestJsonFiles:
    def test_write_read(self, tmp_path):
        write_json(tmp_path / "nested" / "a.json", {"x": [1.5, 2]})
        assert read_json(tmp_path / "nested" / "a.json") == {"x": [1.5, 2]}

    def test_missing(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_json(tmp_path / "a.json")

    def test_corrupt(self, tmp_path):
        (tmp_path / "a.json").write_text("{", encoding="utf-8")
        with pytest.raises(RunStorageError, match="Corrupt"):
            read_json(tmp_path / "a.json")


class TestSnapshotFiles:
    """Test state files, height CSVs and the index."""

    def test_snapshot_dict_round_trip(self, three_atom_run):
        _, snapshots = three_atom_run
        data = json.loads(json.dumps(snapshot_to_dict(snapshots[-1], include_height=True)))
        assert snapshot_from_dict(data) == snapshots[-1]

    def test_missing_height_field(self, three_atom_run):
        _, snapshots = three_atom_run
        with pytest.raises(RunStorageError):
            snapshot_from_dict(snapshot_to_dict(snapshots[0]))

    def test_write_and_read_snapshot(self, three_atom_run, tmp_path):
        cfg, snapshots = three_atom_run
        grid = build_grid(cfg.domain, cfg.quadrature)
        state_path, height_path = write_snapshot(snapshots[1], tmp_path, grid)
        assert state_path.name == "state_000001.json"
        assert height_path.name == "height_000001.csv"
        restored = read_snapshot(state_path)
        assert restored == snapshots[1]
        assert restored.height_file == "heights/height_000001.csv"

    def test_height_csv_layout(self, three_atom_run, tmp_path):
        cfg, snapshots = three_atom_run
        grid = build_grid(cfg.domain, cfg.quadrature)
        _, height_path = write_snapshot(snapshots[0], tmp_path, grid)
        with open(height_path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["x1", "x2", "h"]
        assert len(rows) == grid.size + 1
        assert np.array_equal(read_height_csv(height_path), snapshots[0].height_field)

    def test_height_csv_bad_header(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("a,b,c\n1,2,3\n", encoding="utf-8")
        with pytest.raises(RunStorageError, match="header"):
            read_height_csv(path)

    def test_index_is_monotone_and_deduplicated(self, three_atom_run, tmp_path):
        cfg, snapshots = three_atom_run
        grid = build_grid(cfg.domain, cfg.quadrature)
        for snapshot in (snapshots[2], snapshots[0], snapshots[1], snapshots[2]):
            write_snapshot(snapshot, tmp_path, grid)
        index = read_index(tmp_path)
        assert [entry["step"] for entry in index] == [0, 1, 2]
        assert index[2]["state_file"] == "snapshots/state_000002.json"
        assert load_run_snapshots(tmp_path) == snapshots[:3]

    def test_checkpoint(self, three_atom_run, tmp_path):
        _, snapshots = three_atom_run
        path = write_checkpoint(snapshots[-1], tmp_path)
        assert path.name == "checkpoint.json"
        assert read_checkpoint(tmp_path) == snapshots[-1]

    def test_manifest(self, three_atom_run, tmp_path):
        cfg, _ = three_atom_run
        write_manifest(cfg, tmp_path, {"run_id": "abc"})
        restored, extra = read_manifest(tmp_path)
        assert restored == cfg
        assert extra == {"run_id": "abc"}

    def test_layout(self, tmp_path):
        layout = run_layout(tmp_path)
        assert layout["index"] == tmp_path / "index.json"
        assert layout["manifest"] == tmp_path / "run.json"
        assert layout["snapshots"] == tmp_path / "snapshots"

    def test_required_parts_of_run_directory(self, three_atom_run, tmp_path):
        cfg, snapshots = three_atom_run
        with pytest.raises(RunStorageError) as exc_info:
            require_run_directory(tmp_path)
        message = str(exc_info.value)
        assert "run.json" in message and "index.json" in message and "snapshots" in message

        grid = build_grid(cfg.domain, cfg.quadrature)
        write_manifest(cfg, tmp_path)
        write_snapshot(snapshots[0], tmp_path, grid)
        # the checkpoint is optional
        assert require_run_directory(tmp_path)["index"] == tmp_path / "index.json"


class TestTrajectoryCsv:
    def test_rows(self, tmp_path):
        times = np.array([0.0, 0.1])
        positions = np.arange(12, dtype=float).reshape(2, 2, 3)
        path = tmp_path / "trajectory.csv"
        write_trajectory_csv(path, times, positions, np.array([0, 2]))
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["t", "particle", "x1", "x2", "x3", "cell"]
        assert len(rows) == 5
        assert rows[4] == ["0.1", "1", "9.0", "10.0", "11.0", "2"]
