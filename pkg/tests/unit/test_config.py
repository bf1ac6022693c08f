"""Unit tests for environment configuration, logging helpers and CLI utilities."""
import json
import logging
from pathlib import Path

import click
import numpy as np
import pytest
from click.testing import CliRunner

from src.cli_utils import EXIT_ERROR, EXIT_OK, EXIT_TOLERANCE_BREACH, error_handler, handle_common_options
from src.config import (
    EnvironmentConfig,
    get_catalog_url,
    get_height_file_path,
    get_log_level,
    get_runs_dir,
    get_state_file_path,
    get_thread_count,
    structured_logs_enabled,
)
from src.errors import CapSaturationError, ConfigValidationError, ToleranceBreach
from src.logging_config import (
    OperationContext,
    RunContextFormatter,
    StructuredFormatter,
    current_operation,
    current_step,
    get_logger,
    step_context,
)


@pytest.fixture
def clean_env(monkeypatch):
    for name in EnvironmentConfig.OPTIONAL_VARS:
        monkeypatch.delenv(name, raising=False)
    return monkeypatch


class TestEnvironmentConfig:
    """Test SGFB_ variables, their defaults and validation."""

    def test_defaults(self, clean_env):
        assert get_thread_count() == 1
        assert get_log_level() == "INFO"
        assert not structured_logs_enabled()
        valid, report = EnvironmentConfig.validate_environment()
        assert valid
        assert len(report["defaults_used"]) == len(EnvironmentConfig.OPTIONAL_VARS)

    @pytest.mark.parametrize("raw,expected", [("4", 4), ("0", -1), ("many", 1)])
    def test_thread_count(self, clean_env, raw, expected):
        clean_env.setenv("SGFB_THREADS", raw)
        assert get_thread_count() == expected

    def test_invalid_format_reported(self, clean_env):
        clean_env.setenv("SGFB_LOG_LEVEL", "LOUD")
        valid, report = EnvironmentConfig.validate_environment()
        assert not valid
        assert any("SGFB_LOG_LEVEL" in error for error in report["errors"])
        assert report["summary"]["has_errors"]

    def test_thread_count_above_cores_warns(self, clean_env):
        clean_env.setenv("SGFB_THREADS", "9999")
        valid, report = EnvironmentConfig.validate_environment()
        assert valid
        assert any("9999" in warning for warning in report["warnings"])

    def test_runs_dir_override(self, clean_env, tmp_path):
        clean_env.setenv("SGFB_RUNS_DIR", str(tmp_path))
        assert get_runs_dir() == tmp_path

    def test_structured_flag(self, clean_env):
        clean_env.setenv("SGFB_STRUCTURED_LOGS", "true")
        assert structured_logs_enabled()

    def test_guide_lists_every_variable(self):
        guide = EnvironmentConfig.get_configuration_guide()
        for name in EnvironmentConfig.OPTIONAL_VARS:
            assert f"### {name}" in guide


class TestPaths:
    def test_state_and_height_paths(self):
        run = Path("out")
        assert get_state_file_path(run, 12) == Path("out/snapshots/state_000012.json")
        assert get_height_file_path(run, 12) == Path("out/heights/height_000012.csv")

    def test_catalog_url(self, tmp_path):
        assert get_catalog_url(tmp_path) == f"sqlite:///{tmp_path / 'catalog.db'}"


class TestLogging:
    """Test structured records and operation context."""

    def test_structured_formatter_includes_fields(self):
        record = logging.LogRecord("sgfb", logging.INFO, __file__, 1, "solve done", None, None)
        record.iterations = 12
        entry = json.loads(StructuredFormatter().format(record))
        assert entry["message"] == "solve done"
        assert entry["level"] == "INFO"
        assert entry["iterations"] == 12

    def test_numpy_fields_are_serialized(self):
        record = logging.LogRecord("sgfb", logging.INFO, __file__, 1, "volumes", None, None)
        record.volumes = np.array([0.25, 0.75])
        record.residual = np.float64(1e-9)
        entry = json.loads(StructuredFormatter().format(record))
        assert entry["volumes"] == [0.25, 0.75]
        assert entry["residual"] == 1e-9

    def test_step_context(self):
        with step_context(7):
            assert current_step.get() == 7
            record = logging.LogRecord("sgfb", logging.INFO, __file__, 1, "solved", None, None)
            assert RunContextFormatter().format(record).startswith("[step 7] ")
        assert current_step.get() is None

    def test_reserved_field_names_are_prefixed(self, caplog):
        caplog.set_level(logging.INFO)
        get_logger("sgfb.test").info("named", name="cloud")
        record = next(r for r in caplog.records if r.getMessage() == "named")
        assert record.name == "sgfb.test"
        assert record.field_name == "cloud"

    def test_operation_context_sets_and_resets(self, caplog):
        caplog.set_level(logging.INFO)
        with OperationContext("simulate", run_id="r1"):
            assert current_operation.get() == "simulate"
            get_logger("sgfb.test").info("inside", step=3)
        assert current_operation.get() is None
        messages = [r.getMessage() for r in caplog.records]
        assert "Operation started: simulate" in messages
        assert "Operation completed successfully: simulate" in messages
        inside = next(r for r in caplog.records if r.getMessage() == "inside")
        assert inside.step == 3
        assert inside.operation_context["run_id"] == "r1"

    def test_operation_context_logs_failure(self, caplog):
        caplog.set_level(logging.INFO)
        with pytest.raises(ValueError):
            with OperationContext("oracle"):
                raise ValueError("boom")
        failed = next(r for r in caplog.records if r.getMessage() == "Operation failed: oracle")
        assert failed.error_type == "ValueError"
        assert not failed.success


class TestErrorHandler:
    """Test the exit-code mapping of CLI commands."""

    @staticmethod
    def _command(exc):
        @click.command()
        @error_handler
        def cmd():
            if exc is not None:
                raise exc
            click.echo("done")
        return cmd

    @pytest.mark.parametrize("exc,code", [
        (None, EXIT_OK),
        (ToleranceBreach("volume mismatch", value=1.0, limit=0.5), EXIT_TOLERANCE_BREACH),
        (ConfigValidationError("bad key"), EXIT_ERROR),
        (CapSaturationError(70.0, 60.0, 3), EXIT_ERROR),
        (FileNotFoundError("missing"), EXIT_ERROR),
        (RuntimeError("other"), EXIT_ERROR),
    ])
    def test_exit_codes(self, exc, code):
        result = CliRunner().invoke(self._command(exc))
        assert result.exit_code == code

    def test_threads_option(self, clean_env):
        assert handle_common_options(False, None) == 1
        assert handle_common_options(False, 0) == -1
        assert handle_common_options(True, 3) == 3
