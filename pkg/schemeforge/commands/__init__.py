# schemeforge/commands/__init__.py

# This package holds one handler per CLI subcommand plus the shared error-to-exit-code mapping.

from contextlib import contextmanager, nullcontext

import structlog
from rich.console import Console
from threadpoolctl import threadpool_limits

from schemeforge.exceptions import (
    ClassificationError,
    MeasurementError,
    MeshError,
    SolverError,
    SpecError,
    UnsupportedProblemFamily,
)

console = Console(stderr=True)
logger = structlog.get_logger()

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_SOLVER_ERROR = 3
EXIT_UNSUPPORTED_FAMILY = 4


def exit_code_for(exception: Exception) -> int | None:
    """
    Map an exception to a process exit code, None when it is not an expected failure.
    """
    if isinstance(exception, UnsupportedProblemFamily):
        return EXIT_UNSUPPORTED_FAMILY
    if isinstance(exception, (SolverError, MeshError, MeasurementError)):
        return EXIT_SOLVER_ERROR
    if isinstance(exception, (SpecError, ClassificationError, ValueError, FileNotFoundError)):
        return EXIT_INPUT_ERROR
    return None


def report_failure(subcommand: str, exception: Exception) -> int:
    """
    Print a diagnostic for an expected failure and return its exit code.

    Raises:
        Exception: The original exception when it is not an expected failure.
    """
    code = exit_code_for(exception)
    if code is None:
        console.print(f"[bold red]🚨 An unexpected error occurred: {exception}[/bold red]")
        logger.exception("Unexpected error", subcommand=subcommand)
        raise exception

    console.print(f"[bold red]🚨 {type(exception).__name__}: {exception}[/bold red]")
    logger.error(
        "Command failed",
        subcommand=subcommand,
        error=str(exception),
        error_type=type(exception).__name__,
        exit_code=code,
    )
    return code


@contextmanager
def thread_cap(threads: int | None):
    """Cap BLAS/OpenMP pools for the duration of a command; no cap when threads is None."""
    with threadpool_limits(limits=threads) if threads else nullcontext():
        if threads:
            logger.debug("Capped numerical thread pools", threads=threads)
        yield
