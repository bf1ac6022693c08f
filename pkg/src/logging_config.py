"""
Logging for the free-surface solver.

Records carry the current CLI operation, run id and time-step index from
context variables, so solver and decomposition code deep in a run can log
without threading identifiers through every call. With structured logging
enabled each record is one JSON object; otherwise a text line prefixed with
``[run step]``.
"""

import json
import logging
import time
import uuid
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Any, Dict, Iterator, Optional

import numpy as np

current_operation: ContextVar[Optional[str]] = ContextVar('current_operation', default=None)
current_run_id: ContextVar[Optional[str]] = ContextVar('current_run_id', default=None)
current_step: ContextVar[Optional[int]] = ContextVar('current_step', default=None)
request_id: ContextVar[Optional[str]] = ContextVar('request_id', default=None)

# LogRecord attributes that are not user fields
_RECORD_ATTRS = frozenset(vars(logging.LogRecord('', 0, '', 0, '', None, None))) | {'message', 'asctime'}

# Third-party loggers that are chatty at INFO
_QUIET_LOGGERS = ('joblib', 'sqlalchemy.engine', 'sqlalchemy.pool')


def run_context() -> Dict[str, Any]:
    """Non-empty context variables of the calling task."""
    context = {
        'operation': current_operation.get(),
        'run_id': current_run_id.get(),
        'step': current_step.get(),
        'request_id': request_id.get(),
    }
    return {key: value for key, value in context.items() if value is not None}


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return str(value)


class StructuredFormatter(logging.Formatter):
    """One JSON object per record: level, logger, message, run context and extra fields."""

    def format(self, record: logging.LogRecord) -> str:
        entry: Dict[str, Any] = {
            'timestamp': record.created,
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
            'function': f"{record.module}.{record.funcName}:{record.lineno}",
        }
        entry.update(run_context())

        if record.exc_info:
            exc_type, exc_value, _ = record.exc_info
            entry['exception'] = {
                'type': exc_type.__name__ if exc_type else None,
                'message': str(exc_value) if exc_value else None,
                'traceback': self.formatException(record.exc_info),
            }

        for key, value in record.__dict__.items():
            if key not in _RECORD_ATTRS and key not in entry:
                entry[key] = value

        return json.dumps(entry, default=_json_default, ensure_ascii=False)


class RunContextFormatter(logging.Formatter):
    """Plain text with a ``[run step]`` prefix when a run is active."""

    def __init__(self):
        super().__init__('%(asctime)s %(levelname)-7s %(name)s: %(message)s')

    def format(self, record: logging.LogRecord) -> str:
        line = super().format(record)
        context = run_context()
        tags = [context['run_id'][:8]] if 'run_id' in context else []
        if 'step' in context:
            tags.append(f"step {context['step']}")
        return f"[{' '.join(tags)}] {line}" if tags else line


class ContextLogger:
    """Logger wrapper that accepts structured fields as keyword arguments.

    ``logger.info("solve done", iterations=12)`` attaches ``iterations`` to
    the record; the structured formatter emits it as a JSON field.
    """

    def __init__(self, name: str):
        self.logger = logging.getLogger(name)

    def _log(self, level: int, message: str, exc_info: bool = False, **fields) -> None:
        if not self.logger.isEnabledFor(level):
            return
        context = run_context()
        if 'operation' in context:
            fields.setdefault('operation_context', context)
        # field names may not shadow LogRecord attributes
        extra = {(f"field_{key}" if key in _RECORD_ATTRS else key): value for key, value in fields.items()}
        self.logger.log(level, message, exc_info=exc_info, extra=extra, stacklevel=3)

    def is_enabled_for(self, level: int) -> bool:
        return self.logger.isEnabledFor(level)

    def debug(self, message: str, **fields) -> None:
        self._log(logging.DEBUG, message, **fields)

    def info(self, message: str, **fields) -> None:
        self._log(logging.INFO, message, **fields)

    def warning(self, message: str, **fields) -> None:
        self._log(logging.WARNING, message, **fields)

    def error(self, message: str, **fields) -> None:
        self._log(logging.ERROR, message, **fields)

    def exception(self, message: str, **fields) -> None:
        """Log at ERROR with the active exception's traceback."""
        self._log(logging.ERROR, message, exc_info=True, **fields)


def setup_logging(level: str = "INFO", structured: bool = False) -> None:
    """
    Configure application-wide logging.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR)
        structured: Emit JSON records instead of text lines
    """
    numeric_level = getattr(logging, level.upper(), logging.INFO)

    root_logger = logging.getLogger()
    root_logger.setLevel(numeric_level)
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    console_handler = logging.StreamHandler()
    console_handler.setLevel(numeric_level)
    console_handler.setFormatter(StructuredFormatter() if structured else RunContextFormatter())
    root_logger.addHandler(console_handler)

    for name in _QUIET_LOGGERS:
        logging.getLogger(name).setLevel(max(numeric_level, logging.WARNING))


def get_logger(name: str) -> ContextLogger:
    """Get a context-aware logger for the given name."""
    return ContextLogger(name)


@contextmanager
def step_context(step: int) -> Iterator[None]:
    """Tag every record logged inside the block with a time-step index."""
    token = current_step.set(step)
    try:
        yield
    finally:
        current_step.reset(token)


class OperationContext:
    """Context manager for one CLI operation: sets run context and logs start, end and duration."""

    def __init__(self, operation: str, run_id: Optional[str] = None):
        self.operation = operation
        self.run_id = run_id
        self.request_id = str(uuid.uuid4())
        self.logger = get_logger(f"operation.{operation}")
        self._started: Optional[float] = None
        self._tokens = []

    def __enter__(self):
        self._tokens = [
            (current_operation, current_operation.set(self.operation)),
            (current_run_id, current_run_id.set(self.run_id)),
            (request_id, request_id.set(self.request_id)),
        ]
        self._started = time.perf_counter()
        self.logger.info(f"Operation started: {self.operation}", operation_start=True)
        return self

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self._started if self._started is not None else 0.0

    def __exit__(self, exc_type, exc_val, exc_tb):
        if exc_type is None:
            self.logger.info(
                f"Operation completed successfully: {self.operation}",
                operation_end=True, duration_seconds=self.elapsed, success=True,
            )
        else:
            self.logger.error(
                f"Operation failed: {self.operation}",
                operation_end=True, duration_seconds=self.elapsed, success=False,
                error_type=exc_type.__name__, error_message=str(exc_val) if exc_val else None,
            )

        for var, token in reversed(self._tokens):
            var.reset(token)
        current_step.set(None)
        return False
