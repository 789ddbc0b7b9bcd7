# schemeforge/output_formatter.py

# This module formats results once and writes them both to the console and to CSV files.

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import structlog
from rich.console import Console
from rich.table import Table

from schemeforge.metrics_bench import BenchReport, InterfaceTrack, RadiusTrack, relative_column
from schemeforge.scheme_selector import DECISION_COLUMNS, SchemeAssignment, decision_columns, format_trail

console = Console()
logger = structlog.get_logger()

ASSIGNMENT_HEADER = ["field", "scheme", *DECISION_COLUMNS, "trail"]
BENCH_HEADER = ["scheme", "n", "median_s", "mean_s", "std_s", "bytes", "relative_time", "relative_bytes"]
CHECK_HEADER = ["check", "passed", "detail"]
TRACK_HEADER = ["t", "measured", "analytic"]


def format_number(value: float) -> str:
    """The one number format shared by tables and CSV files."""
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return "nan"
    return f"{value:.6g}"


def write_rows_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    """
    Write pre-formatted rows as a UTF-8 CSV file with a header row.

    Args:
        path (str | Path): Output file, parent directories are created.
        header (Sequence[str]): Column names.
        rows (Iterable[Sequence[str]]): Rows of strings.

    Returns:
        Path: The written file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    logger.debug("Wrote CSV", path=str(path))
    return path


def _print_table(title: str, header: Sequence[str], rows: list[list[str]], styles: dict[str, str] | None = None):
    table = Table(title=title, show_lines=True)
    for column in header:
        table.add_column(column, style=(styles or {}).get(column))
    for row in rows:
        table.add_row(*row)
    console.print(table)


def assignment_rows(assignments: list[SchemeAssignment]) -> list[list[str]]:
    return [
        [a.field, str(a.scheme), *decision_columns(a), format_trail(a.trail)] for a in assignments
    ]


def display_assignments(assignments: list[SchemeAssignment], csv_path: str | Path | None = None):
    """
    Print the scheme assignments with their D1..D4 verdicts and optionally write them as CSV.

    Args:
        assignments (list[SchemeAssignment]): Result of the decision process.
        csv_path (str | Path | None): Where to write assignments.csv.
    """
    if not assignments:
        console.print("[bold yellow]⚠️ No governed fields to assign.[/bold yellow]")
        return

    rows = assignment_rows(assignments)
    # The trail column is CSV only; the table shows the decision columns
    _print_table(
        "Scheme Assignments",
        ASSIGNMENT_HEADER[:-1],
        [row[:-1] for row in rows],
        {"field": "cyan", "scheme": "magenta"},
    )
    if csv_path is not None:
        write_rows_csv(csv_path, ASSIGNMENT_HEADER, rows)


def bench_rows(reports: list[BenchReport]) -> list[list[str]]:
    ratios = relative_column(reports)
    return [
        [
            r.scheme,
            str(r.n),
            format_number(r.median_s),
            format_number(r.mean_s),
            format_number(r.std_s),
            str(r.bytes),
            format_number(time_ratio),
            format_number(bytes_ratio),
        ]
        for r, (time_ratio, bytes_ratio) in zip(reports, ratios)
    ]


def display_bench_reports(reports: list[BenchReport], csv_path: str | Path | None = None):
    """
    Print benchmark statistics with the ratios to the fastest scheme and optionally write them as CSV.
    """
    rows = bench_rows(reports)
    _print_table("Benchmark", BENCH_HEADER, rows, {"scheme": "cyan", "relative_time": "green"})
    if csv_path is not None:
        write_rows_csv(csv_path, BENCH_HEADER, rows)


def check_rows(checks) -> list[list[str]]:
    return [[c.name, "PASS" if c.passed else "FAIL", c.detail] for c in checks]


def display_checks(checks, csv_path: str | Path | None = None):
    """
    Print pass/fail per verification check.

    Args:
        checks (list[CheckResult]): Results in execution order.
        csv_path (str | Path | None): Where to write checks.csv.
    """
    rows = check_rows(checks)
    table = Table(title="Verification", show_lines=True)
    table.add_column("check", style="cyan")
    table.add_column("passed")
    table.add_column("detail")
    for row, check in zip(rows, checks):
        table.add_row(row[0], f"[green]{row[1]}[/green]" if check.passed else f"[red]{row[1]}[/red]", row[2])
    console.print(table)
    if csv_path is not None:
        write_rows_csv(csv_path, CHECK_HEADER, rows)


def track_rows(track: InterfaceTrack | RadiusTrack) -> list[list[str]]:
    return [
        [format_number(t), format_number(m), format_number(a)]
        for t, m, a in zip(track.times, track.measured, track.analytic)
    ]


def write_track_csv(track: InterfaceTrack | RadiusTrack, path: str | Path) -> Path:
    return write_rows_csv(path, TRACK_HEADER, track_rows(track))


def write_snapshot_csv(points: np.ndarray, values: np.ndarray, path: str | Path) -> Path:
    """
    Write a solution snapshot as x[,y],value rows.

    Args:
        points (np.ndarray): Node coordinates, shape (n, dim).
        values (np.ndarray): Nodal values.
        path (str | Path): Output file.

    Returns:
        Path: The written file.
    """
    points = np.asarray(points).reshape(len(values), -1)
    axes = ["x", "y", "z"][: points.shape[1]]
    rows = ([*(format_number(c) for c in p), format_number(v)] for p, v in zip(points, values))
    return write_rows_csv(path, [*axes, "value"], rows)


def display_summary(title: str, summary: dict[str, str]):
    """Print a two-column key/value table, e.g. the outcome of a solve."""
    _print_table(title, ["quantity", "value"], [[k, v] for k, v in summary.items()], {"quantity": "cyan"})
