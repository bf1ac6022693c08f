"""Shared configuration constants, paths and process environment for the solver."""
import os
import re
from pathlib import Path
from typing import Dict, Any, Tuple
from dotenv import load_dotenv
import logging

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)

# Base paths
PROJECT_ROOT = Path(__file__).parent.parent
DATA_ROOT = PROJECT_ROOT / "data"

# Directory paths
RUNS_DIR = DATA_ROOT / "runs"
CONFIGS_DIR = DATA_ROOT / "configs"

# Run directory layout
RUN_MANIFEST = "run.json"
INDEX_FILE = "index.json"
CHECKPOINT_FILE = "checkpoint.json"
CATALOG_FILE = "catalog.db"
STATE_FILE_PATTERN = "state_{step:06d}.json"
HEIGHT_FILE_PATTERN = "height_{step:06d}.csv"
SNAPSHOTS_SUBDIR = "snapshots"
HEIGHTS_SUBDIR = "heights"


class EnvironmentConfig:
    """Environment variable configuration and validation."""

    # Process-level settings; none are required, all have defaults
    OPTIONAL_VARS = {
        'SGFB_THREADS': {
            'description': 'Worker threads for column sweeps (0 = all cores)',
            'pattern': r'^[0-9]{1,4}$',
            'example': '4',
            'default': '1',
            'type': 'integer'
        },
        'SGFB_LOG_LEVEL': {
            'description': 'Default logging level',
            'pattern': r'^(DEBUG|INFO|WARNING|ERROR)$',
            'example': 'INFO',
            'default': 'INFO',
            'type': 'choice'
        },
        'SGFB_STRUCTURED_LOGS': {
            'description': 'Emit JSON structured log records',
            'pattern': r'^(true|false)$',
            'example': 'false',
            'default': 'false',
            'type': 'boolean'
        },
        'SGFB_RUNS_DIR': {
            'description': 'Default parent directory for run outputs',
            'pattern': r'^.+$',
            'example': 'data/runs',
            'default': str(RUNS_DIR),
        },
    }

    @classmethod
    def get(cls, name: str) -> str:
        """Return the configured value or the documented default."""
        return os.getenv(name, cls.OPTIONAL_VARS[name].get('default', ''))

    @classmethod
    def validate_environment(cls) -> Tuple[bool, Dict[str, Any]]:
        """Check every SGFB_ variable against its pattern.

        Returns:
            (valid, report) where report lists errors, warnings, the
            variables that are set and those falling back to defaults.
        """
        report: Dict[str, Any] = {'errors': [], 'warnings': [], 'configured': [], 'defaults_used': []}

        for name, spec in cls.OPTIONAL_VARS.items():
            raw = os.getenv(name)
            if raw is None:
                report['defaults_used'].append({'name': name, 'default': spec.get('default')})
            elif re.match(spec['pattern'], raw) is None:
                report['errors'].append(f"Variable {name} has invalid format. Expected e.g. {spec['example']}")
            else:
                report['configured'].append(name)

        threads = os.getenv('SGFB_THREADS')
        cores = os.cpu_count() or 1
        if threads and threads.isdigit() and int(threads) > cores:
            report['warnings'].append(f"SGFB_THREADS={threads} exceeds the {cores} available cores")

        report['valid'] = not report['errors']
        report['summary'] = {
            'total_vars': len(cls.OPTIONAL_VARS),
            'configured': len(report['configured']),
            'has_errors': bool(report['errors']),
        }
        return report['valid'], report

    @classmethod
    def get_configuration_guide(cls) -> str:
        """Get a configuration guide for the process environment."""
        guide = [
            "# Environment Configuration Guide",
            "",
        ]

        for var_name, var_config in cls.OPTIONAL_VARS.items():
            default_info = f" (Default: {var_config['default']})" if 'default' in var_config else ""
            guide.extend([
                f"### {var_name}",
                f"- **Description**: {var_config['description']}",
                f"- **Example**: `{var_name}={var_config['example']}`{default_info}",
                "- **Required**: No",
                ""
            ])

        return "\n".join(guide)


def get_thread_count() -> int:
    """Worker count for joblib; 0 in the environment means all cores."""
    raw = EnvironmentConfig.get('SGFB_THREADS')
    try:
        threads = int(raw)
    except ValueError:
        logger.warning(f"Ignoring invalid SGFB_THREADS={raw!r}, using 1")
        return 1
    return -1 if threads == 0 else max(threads, 1)


def get_log_level() -> str:
    return EnvironmentConfig.get('SGFB_LOG_LEVEL').upper()


def structured_logs_enabled() -> bool:
    return EnvironmentConfig.get('SGFB_STRUCTURED_LOGS').lower() == 'true'


def get_runs_dir() -> Path:
    return Path(EnvironmentConfig.get('SGFB_RUNS_DIR'))


def ensure_directories():
    """Create the default data directories."""
    RUNS_DIR.mkdir(parents=True, exist_ok=True)
    CONFIGS_DIR.mkdir(parents=True, exist_ok=True)


# Helper functions for path construction
def get_state_file_path(run_dir: Path, step: int) -> Path:
    """Path of the state file written for a given step."""
    return Path(run_dir) / SNAPSHOTS_SUBDIR / STATE_FILE_PATTERN.format(step=step)


def get_height_file_path(run_dir: Path, step: int) -> Path:
    """Path of the height CSV written for a given step."""
    return Path(run_dir) / HEIGHTS_SUBDIR / HEIGHT_FILE_PATTERN.format(step=step)


def get_catalog_url(run_dir: Path) -> str:
    """SQLAlchemy URL of the run catalog inside a run directory."""
    return f"sqlite:///{Path(run_dir) / CATALOG_FILE}"
