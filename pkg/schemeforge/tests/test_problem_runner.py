# schemeforge/tests/test_problem_runner.py

import csv

import pytest

from schemeforge.commands import thread_cap
from schemeforge.exceptions import SpecValidationError, UnsupportedProblemFamily
from schemeforge.metrics_bench import relative_column
from schemeforge.problem_runner import (
    DEFAULT_REPEATS,
    Advection2dParams,
    AllenCahn1dParams,
    ProblemFamily,
    ProblemRunner,
    RunOverrides,
)
from schemeforge.scheme_selector import Scheme


def params_patch(**values):
    def patch(d):
        d["benchmark"]["params"].update(values)

    return patch


@pytest.fixture
def small_advection(make_spec):
    return make_spec("advection_2d", params_patch(cells=8, degree=1, end_time=1.0))


@pytest.fixture
def short_front(make_spec):
    return make_spec("allen_cahn_1d", params_patch(end_time=10.0, bench_end_time=2.0))


def test_family_binding(allen_cahn_1d_spec, allen_cahn_2d_spec, advection_spec):
    assert ProblemRunner(allen_cahn_1d_spec).family is ProblemFamily.ALLEN_CAHN_1D
    assert ProblemRunner(allen_cahn_2d_spec).family is ProblemFamily.ALLEN_CAHN_2D
    assert ProblemRunner(advection_spec).family is ProblemFamily.ADVECTION_2D


def test_spec_without_benchmark_is_classify_only(lpbf_spec):
    runner = ProblemRunner(lpbf_spec)
    assert len(runner.classify()) == 6
    with pytest.raises(UnsupportedProblemFamily):
        runner.family


def test_unknown_family(make_spec):
    def rename(d):
        d["benchmark"]["family"] = "navier_stokes_3d"

    with pytest.raises(UnsupportedProblemFamily) as e:
        ProblemRunner(make_spec("allen_cahn_1d", rename)).family
    assert "allen_cahn_1d" in str(e.value)


def test_family_dimension_must_match(make_spec):
    def rebind(d):
        d["benchmark"] = {"family": "advection_2d", "params": {}}

    with pytest.raises(SpecValidationError) as e:
        ProblemRunner(make_spec("allen_cahn_1d", rebind)).family
    assert e.value.path == "domain.dim"


def test_params_defaults_and_values(allen_cahn_1d_spec, advection_spec):
    params = ProblemRunner(allen_cahn_1d_spec).params()
    assert isinstance(params, AllenCahn1dParams)
    assert params.bench_end_time == 50.0
    assert params.dt == 0.1
    advection = ProblemRunner(advection_spec).params()
    assert isinstance(advection, Advection2dParams)
    assert (advection.cells, advection.degree, advection.safety) == (48, 3, 0.9)


@pytest.mark.parametrize(
    "patch, path",
    [
        (params_patch(gamma=-1.0), "benchmark.params.gamma"),
        (params_patch(bogus=1.0), "benchmark.params.bogus"),
        (params_patch(dt="0.1"), "benchmark.params.dt"),
    ],
)
def test_params_errors_carry_the_path(make_spec, patch, path):
    with pytest.raises(SpecValidationError) as e:
        ProblemRunner(make_spec("allen_cahn_1d", patch)).params()
    assert e.value.path == path


@pytest.mark.parametrize(
    "fixture, overrides, expected",
    [
        ("allen_cahn_1d", RunOverrides(), (Scheme.FDM, None)),
        ("allen_cahn_1d", RunOverrides(scheme="cgm"), (Scheme.CGM, None)),
        ("advection_2d", RunOverrides(), (Scheme.DGM, 3)),
        ("advection_2d", RunOverrides(p=1), (Scheme.DGM, 1)),
        ("advection_2d", RunOverrides(p=0), (Scheme.FVM, 0)),
        ("advection_2d", RunOverrides(scheme="FVM"), (Scheme.FVM, 0)),
    ],
)
def test_resolve_scheme(make_spec, fixture, overrides, expected):
    assert ProblemRunner(make_spec(fixture), overrides).resolve_scheme() == expected


def test_resolve_scheme_follows_the_selector_thresholds(advection_spec):
    runner = ProblemRunner(advection_spec, RunOverrides(worker_threshold=4))
    assert runner.resolve_scheme() == (Scheme.DGM, 3)


@pytest.mark.parametrize(
    "fixture, overrides, error",
    [
        ("allen_cahn_1d", RunOverrides(scheme="DGM"), UnsupportedProblemFamily),
        ("advection_2d", RunOverrides(scheme="CGM"), UnsupportedProblemFamily),
        ("allen_cahn_1d", RunOverrides(p=2), ValueError),
        ("advection_2d", RunOverrides(scheme="FVM", p=2), ValueError),
        ("advection_2d", RunOverrides(scheme="SPH"), ValueError),
    ],
)
def test_resolve_scheme_rejects(make_spec, fixture, overrides, error):
    with pytest.raises(error):
        ProblemRunner(make_spec(fixture), overrides).resolve_scheme()


def test_solve_advection(tmp_path, small_advection):
    result = ProblemRunner(small_advection).solve(tmp_path)
    assert result.family is ProblemFamily.ADVECTION_2D
    assert result.scheme == "DGM"
    assert result.summary["degree"] == "1"
    assert result.summary["cells per axis"] == "8"

    out = tmp_path / "advection_2d"
    names = {f.name for f in result.files}
    assert "dgm_p1_snapshot_t0000.000.csv" in names
    assert "dgm_p1_snapshot_t0001.000.csv" in names
    assert {"dgm_p1_mass.csv", "dgm_p1_vertices.csv"} <= names
    assert all(f.parent == out for f in result.files)

    with (out / "dgm_p1_mass.csv").open(encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["t", "mass"]
    assert float(rows[-1][1]) == pytest.approx(float(rows[1][1]), rel=1e-12)


def test_solve_finite_volume(tmp_path, small_advection):
    result = ProblemRunner(small_advection, RunOverrides(p=0)).solve(tmp_path)
    assert result.scheme == "FVM"
    # Equal dofs: 8 cells of degree 1 match 16 cells of degree 0
    assert result.summary["cells per axis"] == "16"


@pytest.mark.parametrize("scheme", ["FDM", "CGM"])
def test_solve_planar_front(tmp_path, short_front, scheme):
    result = ProblemRunner(short_front, RunOverrides(scheme=scheme)).solve(tmp_path)
    assert result.stats.steps == 100
    # The front moves M mu0 / gamma = 0.1 per unit time
    assert float(result.summary["interface position"]) == pytest.approx(21.0, abs=0.3)
    assert float(result.summary["analytic position"]) == pytest.approx(21.0)
    label = scheme.lower()
    names = {f.name for f in result.files}
    assert f"{label}_interface_track.csv" in names
    assert (f"{label}_stiffness.csv" in names) is (scheme == "CGM")
    # The 1D stencil solves its Newton stages directly, CG goes through GMRES
    assert (result.stats.krylov_iterations == 0) is (scheme == "FDM")


def test_bench_reports_both_schemes(short_front):
    reports = ProblemRunner(short_front).bench(repeats=2)
    assert [r.scheme for r in reports] == ["FDM", "CGM"]
    assert all(r.n == 2 for r in reports)
    assert reports[1].bytes > reports[0].bytes


@pytest.mark.slow
def test_bench_finite_differences_outrun_galerkin(allen_cahn_1d_spec, allen_cahn_2d_spec):
    ratios = {}
    with thread_cap(1):
        for spec in (allen_cahn_1d_spec, allen_cahn_2d_spec):
            reports = ProblemRunner(spec).bench(DEFAULT_REPEATS)
            assert [r.scheme for r in reports] == ["FDM", "CGM"]
            ratios[spec.name] = relative_column(reports)[1]

    time_1d, bytes_1d = ratios["allen_cahn_1d"]
    time_2d, bytes_2d = ratios["allen_cahn_2d"]
    assert time_1d >= 5.0
    assert time_2d > time_1d
    assert bytes_1d >= 5.0
    assert bytes_2d >= 5.0


def test_bench_advection_labels(small_advection):
    reports = ProblemRunner(small_advection, RunOverrides(repeats=1)).bench()
    assert [r.scheme for r in reports] == ["DGM_p1", "FVM_p0"]


def test_verify_small_advection(small_advection):
    checks = {c.name: c for c in ProblemRunner(small_advection).verify()}
    assert list(checks) == [
        "mass_conservation_p0",
        "mass_conservation_p1",
        "accuracy_ordering",
        "cfl_within_bound",
        "cfl_violated",
    ]
    assert checks["mass_conservation_p0"].passed
    assert checks["mass_conservation_p1"].passed
    assert checks["cfl_within_bound"].passed


@pytest.mark.slow
def test_verify_planar_front(allen_cahn_1d_spec):
    checks = ProblemRunner(allen_cahn_1d_spec).verify()
    assert [c.name for c in checks] == ["fd_cg_agreement", "interface_position", "interface_shape"]
    assert all(c.passed for c in checks), checks


@pytest.mark.slow
def test_verify_shrinking_grain(allen_cahn_2d_spec):
    checks = ProblemRunner(allen_cahn_2d_spec).verify()
    assert [c.name for c in checks] == [
        "stiffness_stencil",
        "fd_cg_rhs_agreement",
        "radius_monotone",
        "radius_squared_slope",
    ]
    assert all(c.passed for c in checks), checks


@pytest.mark.slow
def test_verify_box_advection(advection_spec):
    checks = {c.name: c for c in ProblemRunner(advection_spec).verify()}
    assert checks["mass_conservation_p3"].passed
    assert checks["mass_conservation_p0"].passed
    assert checks["accuracy_ordering"].passed
