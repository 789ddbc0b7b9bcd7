# schemeforge/tests/test_cli.py

import json
import signal

import pytest
from click.testing import CliRunner

from schemeforge.cli import _signal_handler, cli
from schemeforge.commands import exit_code_for
from schemeforge.exceptions import (
    NoCrossing,
    NonFiniteState,
    NoSecondOrderTerms,
    SelectionError,
    SingularJacobian,
    SpecSyntaxError,
    UnsupportedProblemFamily,
)
from schemeforge.problem_runner import CheckResult, ProblemRunner


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def write_spec(tmp_path, spec_document):
    """Write a patched bundled spec to a file and return its path."""

    def write(name, patch=None):
        document = spec_document(name)
        if patch is not None:
            patch(document)
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(document), encoding="utf-8")
        return str(path)

    return write


def small_advection(d):
    d["benchmark"]["params"].update(cells=8, degree=1, end_time=1.0)


@pytest.mark.parametrize(
    "exception, code",
    [
        (UnsupportedProblemFamily("x"), 4),
        (NonFiniteState(3), 3),
        (SingularJacobian("x"), 3),
        (NoCrossing("x"), 3),
        (SpecSyntaxError("x"), 2),
        (SelectionError("u", NoSecondOrderTerms("x")), 2),
        (ValueError("x"), 2),
        (FileNotFoundError("x"), 2),
        (RuntimeError("x"), None),
    ],
)
def test_exit_code_for(exception, code):
    assert exit_code_for(exception) == code


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert "version" in result.output


def test_classify_bundled_spec(runner, tmp_path):
    result = runner.invoke(cli, ["classify", "--spec", "lpbf", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "alpha_solid" in result.output
    lines = (tmp_path / "assignments.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "field,scheme,D1,D2,D3,D4,trail"
    assert len(lines) == 7


def test_classify_with_thresholds(runner, tmp_path):
    result = runner.invoke(
        cli, ["classify", "-s", "advection_2d", "-o", str(tmp_path), "--worker-threshold", "4"]
    )
    assert result.exit_code == 0
    row = (tmp_path / "assignments.csv").read_text(encoding="utf-8").splitlines()[1]
    assert row.startswith("alpha,DGM,yes,")


def test_classify_rejects_malformed_json(runner, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json", encoding="utf-8")
    result = runner.invoke(cli, ["classify", "--spec", str(path), "--out", str(tmp_path)])
    assert result.exit_code == 2
    assert not (tmp_path / "assignments.csv").exists()


def test_unknown_spec_name(runner):
    result = runner.invoke(cli, ["classify", "--spec", "no_such_problem"])
    assert result.exit_code == 2
    assert "neither a file nor a bundled spec" in result.output


def test_solve_without_family(runner, tmp_path):
    result = runner.invoke(cli, ["solve", "--spec", "lpbf", "--out", str(tmp_path)])
    assert result.exit_code == 4


def test_solve_rejects_dimension_mismatch(runner, tmp_path, write_spec):
    def rebind(d):
        d["benchmark"] = {"family": "advection_2d", "params": {}}

    result = runner.invoke(cli, ["solve", "--spec", write_spec("allen_cahn_1d", rebind), "--out", str(tmp_path)])
    assert result.exit_code == 2


def test_solve_advection(runner, tmp_path, write_spec):
    spec = write_spec("advection_2d", small_advection)
    result = runner.invoke(cli, ["solve", "--spec", spec, "--out", str(tmp_path), "--threads", "1"])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "advection_2d" / "dgm_p1_mass.csv").is_file()


def test_solve_rejects_unknown_scheme(runner):
    result = runner.invoke(cli, ["solve", "--spec", "advection_2d", "--scheme", "SPH"])
    assert result.exit_code == 2


def test_invalid_thread_environment(runner, monkeypatch):
    monkeypatch.setenv("SCHEMEFORGE_THREADS", "many")
    result = runner.invoke(cli, ["solve", "--spec", "advection_2d"])
    assert result.exit_code == 2
    assert "SCHEMEFORGE_THREADS" in result.output


def test_bench_writes_the_report(runner, tmp_path, write_spec):
    spec = write_spec("advection_2d", small_advection)
    result = runner.invoke(cli, ["bench", "--spec", spec, "--out", str(tmp_path), "-n", "1"])
    assert result.exit_code == 0, result.output
    lines = (tmp_path / "advection_2d" / "bench.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("scheme,n,median_s")
    assert len(lines) == 3


def test_verify_reports_failed_checks(runner, tmp_path, monkeypatch):
    monkeypatch.setattr(
        ProblemRunner,
        "verify",
        lambda self: [CheckResult("mass_conservation_p3", True, "ok"), CheckResult("cfl_violated", False, "1.0")],
    )
    result = runner.invoke(cli, ["verify", "--spec", "advection_2d", "--out", str(tmp_path)])
    assert result.exit_code == 1
    assert (tmp_path / "advection_2d" / "checks.csv").is_file()


def test_verify_passes(runner, tmp_path, monkeypatch):
    monkeypatch.setattr(ProblemRunner, "verify", lambda self: [CheckResult("fd_cg_agreement", True, "ok")])
    result = runner.invoke(cli, ["verify", "--spec", "allen_cahn_1d", "--out", str(tmp_path)])
    assert result.exit_code == 0


def test_unexpected_errors_propagate(runner, tmp_path, monkeypatch):
    def explode(self):
        raise RuntimeError("boom")

    monkeypatch.setattr(ProblemRunner, "classify", explode)
    result = runner.invoke(cli, ["classify", "--spec", "lpbf", "--out", str(tmp_path)])
    assert isinstance(result.exception, RuntimeError)
    assert result.exit_code == 1


def test_interrupt_exits_with_the_shell_code():
    with pytest.raises(SystemExit) as e:
        _signal_handler(signal.SIGINT, None)
    assert e.value.code == 130
