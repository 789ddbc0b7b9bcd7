# schemeforge/commands/bench_command.py

# This module provides the functionality to benchmark the candidate schemes of a problem family.

import structlog
from rich.console import Console

from schemeforge.commands import EXIT_OK, report_failure, thread_cap
from schemeforge.config import CliConfig
from schemeforge.output_formatter import display_bench_reports
from schemeforge.problem_runner import ProblemRunner, RunOverrides
from schemeforge.problem_spec import load_problem_spec

console = Console()
logger = structlog.get_logger()

# Timings are taken single-threaded regardless of --threads
BENCH_THREADS = 1


def handle_bench(config: CliConfig) -> int:
    """
    Handle a benchmark run.

    Args:
        config (CliConfig): Spec path, output directory, repeats and dt override.

    Returns:
        int: 0 on success, 2/3/4 as for solve.
    """
    try:
        spec = load_problem_spec(config.spec_path)
        runner = ProblemRunner(spec, RunOverrides(dt=config.dt, h=config.h, repeats=config.repeats))
        if config.threads not in (None, BENCH_THREADS):
            logger.info("Ignoring thread cap for benchmarks", requested=config.threads)

        with thread_cap(BENCH_THREADS), console.status("Benchmarking..."):
            reports = runner.bench(config.repeats)

        display_bench_reports(reports, config.out_dir / runner.family.value / "bench.csv")
        return EXIT_OK
    except Exception as e:
        return report_failure("bench", e)
