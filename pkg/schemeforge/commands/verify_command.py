# schemeforge/commands/verify_command.py

# This module provides the functionality to run the analytic checks of a benchmark problem.

import structlog
from rich.console import Console

from schemeforge.commands import EXIT_OK, EXIT_VERIFY_FAILED, report_failure, thread_cap
from schemeforge.config import CliConfig
from schemeforge.output_formatter import display_checks
from schemeforge.problem_runner import ProblemRunner, RunOverrides
from schemeforge.problem_spec import load_problem_spec

console = Console()
logger = structlog.get_logger()


def handle_verify(config: CliConfig) -> int:
    """
    Handle a verification run.

    Args:
        config (CliConfig): Spec path, output directory and thread cap.

    Returns:
        int: 0 when every check passes, 1 when one fails, 2/3/4 as for solve.
    """
    try:
        spec = load_problem_spec(config.spec_path)
        runner = ProblemRunner(
            spec,
            RunOverrides(
                worker_threshold=config.worker_threshold,
                multiscale_ratio=config.multiscale_ratio,
            ),
        )
        with thread_cap(config.threads), console.status("Verifying..."):
            checks = runner.verify()
        display_checks(checks, config.out_dir / runner.family.value / "checks.csv")
    except Exception as e:
        return report_failure("verify", e)

    failed = [c.name for c in checks if not c.passed]
    if failed:
        console.print(f"[bold red]🚨 {len(failed)} check(s) failed: {', '.join(failed)}[/bold red]")
        logger.warning("Verification failed", failed=failed)
        return EXIT_VERIFY_FAILED

    console.print("[bold green]✅ All checks passed.[/bold green]")
    return EXIT_OK
