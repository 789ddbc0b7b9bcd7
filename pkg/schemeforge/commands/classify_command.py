# schemeforge/commands/classify_command.py

# This module provides the functionality to classify a problem spec and print its scheme assignments.

import structlog
from rich.console import Console

from schemeforge.commands import EXIT_OK, report_failure
from schemeforge.config import CliConfig
from schemeforge.output_formatter import display_assignments
from schemeforge.problem_runner import ProblemRunner, RunOverrides
from schemeforge.problem_spec import load_problem_spec

console = Console()
logger = structlog.get_logger()


def handle_classify(config: CliConfig) -> int:
    """
    Handle the classification of a problem spec.

    Prints one row per governed field with the scheme and the D1..D4 verdicts, and
    writes the same rows, decision trail included, to <out>/assignments.csv.

    Args:
        config (CliConfig): Spec path, output directory and decision thresholds.

    Returns:
        int: 0 on success, 2 for invalid or unclassifiable specs.
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
        assignments = runner.classify()
        display_assignments(assignments, config.out_dir / "assignments.csv")
        logger.info("Classified problem", problem=spec.name, fields=len(assignments))
        return EXIT_OK
    except Exception as e:
        return report_failure("classify", e)
