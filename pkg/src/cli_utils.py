"""Common CLI utilities and shared command patterns."""
import functools
import sys
from typing import Callable

import click

from src.config import get_log_level, structured_logs_enabled
from src.errors import SemigeostrophicError, ToleranceBreach
from src.logging_config import setup_logging

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TOLERANCE_BREACH = 2


def common_options(func: Callable) -> Callable:
    """Decorator to add the shared --verbose/--threads options to commands."""
    func = click.option('--threads', type=int, default=None,
                        help='Worker threads for column sweeps (0 = all cores)')(func)
    func = click.option('--verbose', is_flag=True, help='Log one line per solver iteration')(func)
    return func


def handle_common_options(verbose: bool, threads) -> int:
    """Configure logging and resolve the joblib worker count."""
    from src.config import get_thread_count

    level = "DEBUG" if verbose else get_log_level()
    setup_logging(level=level, structured=structured_logs_enabled())

    if threads is None:
        return get_thread_count()
    return -1 if threads == 0 else max(threads, 1)


def error_handler(func: Callable) -> Callable:
    """Decorator mapping exceptions to the CLI exit-code contract.

    0 on success, 2 on a tolerance breach, 1 on any other error.
    """
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ToleranceBreach as e:
            error_message(f"Tolerance breach: {e}")
            sys.exit(EXIT_TOLERANCE_BREACH)
        except FileNotFoundError as e:
            error_message(f"Error: {e}")
            sys.exit(EXIT_ERROR)
        except (SemigeostrophicError, ValueError) as e:
            error_message(f"Error: {e}")
            sys.exit(EXIT_ERROR)
        except Exception as e:
            error_message(f"Unexpected error: {type(e).__name__}: {e}")
            sys.exit(EXIT_ERROR)

    return wrapper


def success_message(message: str):
    """Display a success message with consistent formatting."""
    click.echo(click.style(f"✅ {message}", fg='green'))


def warning_message(message: str):
    """Display a warning message with consistent formatting."""
    click.echo(click.style(f"⚠️  {message}", fg='yellow'))


def error_message(message: str):
    """Display an error message with consistent formatting."""
    click.echo(click.style(f"❌ {message}", fg='red'), err=True)


def info_message(message: str):
    """Display an info message with consistent formatting."""
    click.echo(click.style(f"ℹ️  {message}", fg='blue'))


class CommonGroup(click.Group):
    """Custom Group class with common functionality."""

    def __init__(self, *args, **kwargs):
        kwargs.setdefault('context_settings', dict(help_option_names=['-h', '--help']))
        super().__init__(*args, **kwargs)

    def format_help(self, ctx, formatter):
        """Custom help formatting."""
        if self.help:
            formatter.write_paragraph()
            formatter.write_text(self.help)

        commands = []
        for subcommand in self.list_commands(ctx):
            cmd = self.get_command(ctx, subcommand)
            if cmd is None or cmd.hidden:
                continue
            commands.append((subcommand, cmd.get_short_help_str(limit=60)))

        if commands:
            with formatter.section('Available Commands'):
                formatter.write_dl(commands)

        if self.epilog:
            formatter.write_paragraph()
            formatter.write_text(self.epilog)
