"""Configuration loading, run storage, reports and the command line."""

from src.cli_io.config_loader import config_to_mapping, load_config, parse_config_text
from src.cli_io.snapshots import (
    load_run_snapshots,
    read_checkpoint,
    read_index,
    read_manifest,
    read_snapshot,
    write_checkpoint,
    write_manifest,
    write_snapshot,
)

__all__ = [
    'config_to_mapping',
    'load_config',
    'load_run_snapshots',
    'parse_config_text',
    'read_checkpoint',
    'read_index',
    'read_manifest',
    'read_snapshot',
    'write_checkpoint',
    'write_manifest',
    'write_snapshot',
]
