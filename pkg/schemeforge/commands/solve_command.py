# schemeforge/commands/solve_command.py

# This module provides the functionality to run the selected scheme of a benchmark problem to its end time.

import structlog
from rich.console import Console

from schemeforge.commands import EXIT_OK, report_failure, thread_cap
from schemeforge.config import CliConfig
from schemeforge.output_formatter import display_summary
from schemeforge.problem_runner import ProblemRunner, RunOverrides
from schemeforge.problem_spec import load_problem_spec

console = Console()
logger = structlog.get_logger()


def handle_solve(config: CliConfig) -> int:
    """
    Handle a solve run.

    Args:
        config (CliConfig): Spec path, output directory and overrides (scheme, p, h, dt, threads).

    Returns:
        int: 0 on success, 2 for input errors, 3 for solver failures, 4 for specs without a solvable family.
    """
    try:
        spec = load_problem_spec(config.spec_path)
        runner = ProblemRunner(
            spec,
            RunOverrides(
                dt=config.dt,
                h=config.h,
                p=config.p,
                scheme=config.scheme,
                worker_threshold=config.worker_threshold,
                multiscale_ratio=config.multiscale_ratio,
            ),
        )
        with thread_cap(config.threads), console.status("Solving..."):
            result = runner.solve(config.out_dir)

        display_summary(f"Solve: {result.family}", result.summary)
        console.print(f"[bold green]✅ Wrote {len(result.files)} file(s) to {config.out_dir}[/bold green]")
        logger.info("Solve finished", family=str(result.family), scheme=result.scheme, files=len(result.files))
        return EXIT_OK
    except Exception as e:
        return report_failure("solve", e)
