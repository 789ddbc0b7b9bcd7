# schemeforge/cli.py

# This module provides the command-line interface: classify, solve, verify and bench.

import sys
from pathlib import Path
from signal import SIGINT, signal

import click
import structlog
from rich.console import Console

from schemeforge.commands.bench_command import handle_bench
from schemeforge.commands.classify_command import handle_classify
from schemeforge.commands.solve_command import handle_solve
from schemeforge.commands.verify_command import handle_verify
from schemeforge.config import (
    DEFAULT_OUT_DIR,
    MULTISCALE_RATIO,
    WORKER_THRESHOLD,
    CliConfig,
    resolve_threads,
)
from schemeforge.logging_config import configure_structlog
from schemeforge.problem_spec import bundled_spec_path
from schemeforge.scheme_selector import Scheme

console = Console(stderr=True)
logger = structlog.get_logger()


def _signal_handler(signal_received, frame):
    """
    Handle exit gracefully on SIGINT (Ctrl+C).

    Exits with 130 (128 + SIGINT), the shell convention for an interrupted command, so
    scripts can tell an interrupt from a successful run.

    Args:
        signal_received (int): The signal number received.
        frame (FrameType): The current stack frame.
    """
    console.print("\n[bold yellow]🚨 Received exit signal. Exiting gracefully...[/bold yellow]")
    sys.exit(130)


def setup_signal_handling():
    """
    Register _signal_handler for SIGINT.
    """
    signal(SIGINT, _signal_handler)


def _resolve_spec(ctx, param, value: str) -> Path:
    """Accept a file path or the name of a bundled spec such as 'lpbf'."""
    path = Path(value)
    if path.is_file():
        return path
    try:
        return bundled_spec_path(value)
    except FileNotFoundError:
        raise click.BadParameter(f"'{value}' is neither a file nor a bundled spec") from None


def _resolve_threads(ctx, param, value: int | None) -> int | None:
    try:
        return resolve_threads(value)
    except ValueError as e:
        raise click.BadParameter(str(e)) from e


spec_option = click.option(
    "--spec", "-s", required=True, callback=_resolve_spec, help="Problem spec file or bundled spec name."
)
out_option = click.option(
    "--out", "-o", "out_dir", type=click.Path(file_okay=False, path_type=Path),
    default=DEFAULT_OUT_DIR, show_default=True, help="Directory for CSV outputs.",
)  # fmt: skip
threads_option = click.option(
    "--threads", type=click.IntRange(min=1), callback=_resolve_threads,
    help="Cap numerical thread pools (default: $SCHEMEFORGE_THREADS, else no cap).",
)  # fmt: skip
threshold_options = [
    click.option(
        "--worker-threshold", type=click.IntRange(min=1), default=WORKER_THRESHOLD,
        show_default=True, help="Workers from which CPU hardware counts as massively parallel.",
    ),
    click.option(
        "--multiscale-ratio", type=click.FloatRange(min=1.0), default=MULTISCALE_RATIO,
        show_default=True, help="Length-scale ratio from which a problem counts as multiscale.",
    ),
]  # fmt: skip


def with_thresholds(command):
    for option in reversed(threshold_options):
        command = option(command)
    return command


@click.group()
@click.option("--debug", is_flag=True, help="Enable debug logging.")
@click.option("--log-file", type=click.Path(dir_okay=False, path_type=Path), help="Also log to this file.")
@click.version_option(package_name="schemeforge")
def cli(debug, log_file):
    """
    schemeforge selects numerical schemes for multiphysics problems and runs the
    benchmark solvers behind the selection.
    """
    setup_signal_handling()
    configure_structlog(debug, log_file)
    logger.debug("Starting schemeforge CLI", debug=debug)


@cli.command()
@spec_option
@out_option
@with_thresholds
@click.pass_context
def classify(ctx, spec, out_dir, worker_threshold, multiscale_ratio):
    """
    Assign a scheme to every governed field and print the decision trail.
    """
    config = CliConfig(
        "classify", spec, out_dir,
        worker_threshold=worker_threshold, multiscale_ratio=multiscale_ratio,
    )  # fmt: skip
    ctx.exit(handle_classify(config))


@cli.command()
@spec_option
@out_option
@click.option("--scheme", type=click.Choice([s.value for s in Scheme], case_sensitive=False),
              help="Override the selected scheme.")  # fmt: skip
@click.option("--p", "p", type=click.IntRange(min=0), help="Polynomial degree (advection only).")
@click.option("--h", "h", type=click.FloatRange(min=0, min_open=True), help="Grid spacing.")
@click.option("--dt", type=click.FloatRange(min=0, min_open=True), help="Time step.")
@threads_option
@with_thresholds
@click.pass_context
def solve(ctx, spec, out_dir, scheme, p, h, dt, threads, worker_threshold, multiscale_ratio):
    """
    Run the selected (or overridden) scheme to the end time and write tracks and snapshots.
    """
    config = CliConfig(
        "solve", spec, out_dir, dt=dt, h=h, p=p, scheme=scheme, threads=threads,
        worker_threshold=worker_threshold, multiscale_ratio=multiscale_ratio,
    )  # fmt: skip
    ctx.exit(handle_solve(config))


@cli.command()
@spec_option
@out_option
@threads_option
@click.pass_context
def verify(ctx, spec, out_dir, threads):
    """
    Run the family's analytic checks; exits 1 if any check fails.
    """
    ctx.exit(handle_verify(CliConfig("verify", spec, out_dir, threads=threads)))


@cli.command()
@spec_option
@out_option
@click.option("--repeats", "-n", type=click.IntRange(min=1), default=20, show_default=True,
              help="Full solves per scheme.")  # fmt: skip
@click.option("--h", "h", type=click.FloatRange(min=0, min_open=True), help="Grid spacing.")
@click.option("--dt", type=click.FloatRange(min=0, min_open=True), help="Time step.")
@threads_option
@click.pass_context
def bench(ctx, spec, out_dir, repeats, h, dt, threads):
    """
    Time both candidate schemes of the family single-threaded.
    """
    config = CliConfig("bench", spec, out_dir, dt=dt, h=h, repeats=repeats, threads=threads)
    ctx.exit(handle_bench(config))


if __name__ == "__main__":
    cli()
