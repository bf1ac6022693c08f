"""Run directory storage: state files, height CSVs, index, checkpoint, manifest.

Floats are written with repr, the shortest decimal that reads back to the
same double, so every file round-trips bit for bit.
"""

import csv
import json
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.config import (
    CHECKPOINT_FILE,
    HEIGHTS_SUBDIR,
    INDEX_FILE,
    RUN_MANIFEST,
    SNAPSHOTS_SUBDIR,
    get_height_file_path,
    get_state_file_path,
)
from src.cli_io.config_loader import config_to_mapping
from src.domain_model.types import SimConfig
from src.domain_model.validation import validate_config
from src.dynamics.snapshot import Snapshot
from src.envelope_geometry.quadrature import QuadratureGrid
from src.errors import RunStorageError

_SCALARS = (
    "time", "step", "energy", "dual_value", "duality_gap", "residual_norm", "support_radius",
    "solver_iterations", "support_origin", "support_limit", "peak_speed",
)
_ARRAYS = ("positions", "masses", "weights", "volumes", "centroids")


def create_directory(path: Path):
    """Creates a directory if it does not exist."""
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise RunStorageError(f"Cannot create directory {path}: {e}") from e


def write_json(path: Path, data: Any):
    create_directory(Path(path).parent)
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2)
            f.write("\n")
    except OSError as e:
        raise RunStorageError(f"Cannot write {path}: {e}") from e


def read_json(path: Path) -> Any:
    """Reads a JSON file written by write_json."""
    if not Path(path).exists():
        raise FileNotFoundError(f"File not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise RunStorageError(f"Corrupt JSON in {path}: line {e.lineno}: {e.msg}") from e


def snapshot_to_dict(snapshot: Snapshot, include_height: bool = False) -> Dict[str, Any]:
    data: Dict[str, Any] = {name: getattr(snapshot, name) for name in _SCALARS}
    data["time"] = float(snapshot.time)
    data["step"] = int(snapshot.step)
    data["solver_iterations"] = int(snapshot.solver_iterations)
    for name in _ARRAYS:
        data[name] = np.asarray(getattr(snapshot, name)).tolist()
    data["height_file"] = snapshot.height_file
    if include_height:
        data["height_field"] = np.asarray(snapshot.height_field).tolist()
    return data


def snapshot_from_dict(data: Dict[str, Any], height_field: Optional[np.ndarray] = None) -> Snapshot:
    if height_field is None:
        if "height_field" not in data:
            raise RunStorageError("State has no inline height field and none was supplied")
        height_field = np.asarray(data["height_field"], dtype=np.float64)
    arrays = {name: np.asarray(data[name], dtype=np.float64) for name in _ARRAYS}
    arrays["centroids"] = arrays["centroids"].reshape(-1, 3)
    arrays["positions"] = arrays["positions"].reshape(-1, 3)
    return Snapshot(
        **{name: data[name] for name in _SCALARS},
        **arrays,
        height_field=np.asarray(height_field, dtype=np.float64),
        height_file=data.get("height_file"),
    )


def write_height_csv(path: Path, grid: QuadratureGrid, height_field: np.ndarray):
    """One row (x1, x2, h) per quadrature column, wet or dry."""
    create_directory(Path(path).parent)
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["x1", "x2", "h"])
            for (x1, x2), h in zip(grid.centers, height_field):
                writer.writerow([repr(float(x1)), repr(float(x2)), repr(float(h))])
    except OSError as e:
        raise RunStorageError(f"Cannot write {path}: {e}") from e


def read_height_csv(path: Path) -> np.ndarray:
    """Heights column of a height CSV, in row order."""
    if not Path(path).exists():
        raise FileNotFoundError(f"Height file not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["x1", "x2", "h"]:
            raise RunStorageError(f"Unexpected header {header} in {path}")
        return np.array([float(row[2]) for row in reader], dtype=np.float64)


def _update_index(run_dir: Path, entry: Dict[str, Any]):
    path = Path(run_dir) / INDEX_FILE
    entries = read_json(path)["snapshots"] if path.exists() else []
    entries = [e for e in entries if e["step"] != entry["step"]]
    entries.append(entry)
    entries.sort(key=lambda e: e["step"])
    write_json(path, {"snapshots": entries})


def write_snapshot(snapshot: Snapshot, run_dir: Path, grid: QuadratureGrid) -> Tuple[Path, Path]:
    """Write the state file and height CSV of a snapshot and list it in the index.

    Returns:
        (state_path, height_path)
    """
    run_dir = Path(run_dir)
    state_path = get_state_file_path(run_dir, snapshot.step)
    height_path = get_height_file_path(run_dir, snapshot.step)
    height_name = str(height_path.relative_to(run_dir))

    write_height_csv(height_path, grid, snapshot.height_field)
    data = snapshot_to_dict(snapshot)
    data["height_file"] = height_name
    write_json(state_path, data)
    _update_index(run_dir, {
        "step": int(snapshot.step),
        "time": float(snapshot.time),
        "state_file": str(state_path.relative_to(run_dir)),
        "height_file": height_name,
    })
    return state_path, height_path


def read_snapshot(state_path: Path) -> Snapshot:
    """Read a state file and the height CSV it names (relative to the run directory)."""
    state_path = Path(state_path)
    data = read_json(state_path)
    if "height_field" in data:
        return snapshot_from_dict(data)
    run_dir = state_path.parent.parent if state_path.parent.name == SNAPSHOTS_SUBDIR else state_path.parent
    height_name = data.get("height_file")
    if not height_name:
        raise RunStorageError(f"State file {state_path} does not name a height file")
    return snapshot_from_dict(data, read_height_csv(run_dir / height_name))


def write_checkpoint(snapshot: Snapshot, run_dir: Path) -> Path:
    """Full latest state with the height field inline."""
    path = Path(run_dir) / CHECKPOINT_FILE
    write_json(path, snapshot_to_dict(snapshot, include_height=True))
    return path


def read_checkpoint(run_dir: Path) -> Snapshot:
    return snapshot_from_dict(read_json(Path(run_dir) / CHECKPOINT_FILE))


def write_manifest(cfg: SimConfig, run_dir: Path, extra: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(run_dir) / RUN_MANIFEST
    write_json(path, {"config": config_to_mapping(cfg), **(extra or {})})
    return path


def read_manifest(run_dir: Path) -> Tuple[SimConfig, Dict[str, Any]]:
    """The validated config of a run directory and the rest of its manifest."""
    data = read_json(Path(run_dir) / RUN_MANIFEST)
    cfg = validate_config(data.pop("config"))
    return cfg, data


def read_index(run_dir: Path) -> List[Dict[str, Any]]:
    return read_json(Path(run_dir) / INDEX_FILE)["snapshots"]


def load_run_snapshots(run_dir: Path) -> List[Snapshot]:
    """Every indexed snapshot of a run, in step order."""
    run_dir = Path(run_dir)
    return [read_snapshot(run_dir / entry["state_file"]) for entry in read_index(run_dir)]


def run_layout(run_dir: Path) -> Dict[str, Path]:
    run_dir = Path(run_dir)
    return {
        "snapshots": run_dir / SNAPSHOTS_SUBDIR,
        "heights": run_dir / HEIGHTS_SUBDIR,
        "index": run_dir / INDEX_FILE,
        "manifest": run_dir / RUN_MANIFEST,
        "checkpoint": run_dir / CHECKPOINT_FILE,
    }


def require_run_directory(run_dir: Path) -> Dict[str, Path]:
    """Layout of a finished or interrupted run; the manifest, index and snapshot folder must exist.

    Raises:
        RunStorageError: naming every missing part.
    """
    layout = run_layout(run_dir)
    missing = [str(layout[part]) for part in ("manifest", "index", "snapshots") if not layout[part].exists()]
    if missing:
        raise RunStorageError(f"{run_dir} is not a run directory; missing {', '.join(missing)}")
    return layout


def write_trajectory_csv(path: Path, times: np.ndarray, positions: np.ndarray, cells: np.ndarray):
    """Rows (t, particle, x1, x2, x3, cell) for every snapshot time and particle."""
    create_directory(Path(path).parent)
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["t", "particle", "x1", "x2", "x3", "cell"])
            for t, frame in zip(times, positions):
                for p, (x1, x2, x3) in enumerate(frame):
                    writer.writerow([repr(float(t)), p, repr(float(x1)), repr(float(x2)), repr(float(x3)), int(cells[p])])
    except OSError as e:
        raise RunStorageError(f"Cannot write {path}: {e}") from e
