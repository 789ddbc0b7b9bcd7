# schemeforge/problem_runner.py

# This module binds problem specs to the benchmark families and runs classify, solve, verify and bench on them.

import math
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from schemeforge.config import (
    ADVECTION_SAFETY,
    DT_ALLEN_CAHN_1D,
    DT_ALLEN_CAHN_2D,
    MULTISCALE_RATIO,
    SAMPLE_EVERY,
    WORKER_THRESHOLD,
)
from schemeforge.exceptions import NonFiniteState, SpecValidationError, UnsupportedProblemFamily
from schemeforge.mesh import build_cartesian_grid, dump_mesh_csv
from schemeforge.metrics_bench import (
    BenchReport,
    BenchSetup,
    InterfaceTrack,
    RadiusTrack,
    analytic_advection,
    analytic_grain_radius,
    analytic_interface_position,
    interface_velocity_ratio,
    l2_error,
    measure_grain_radius,
    measure_interface_position,
    profile_shape_error,
    r_squared_slope,
    run_benchmark,
)
from schemeforge.output_formatter import write_snapshot_csv, write_track_csv
from schemeforge.problem_spec import ProblemSpec
from schemeforge.scheme_selector import Scheme, SchemeAssignment, select_schemes
from schemeforge.solver_cg import build_cg_system, dump_operator_csv, five_point_stencil_deviation
from schemeforge.solver_dg import (
    AdvectionParams,
    DgSystem,
    box_indicator,
    build_dg_system,
    dofs_matched_cells,
    max_stable_dt,
    project_to_vertices,
)
from schemeforge.solver_fd import (
    AllenCahnParams,
    FdSystem,
    build_fd_system,
    planar_front,
    quarter_grain,
    vanishing_time,
)
from schemeforge.time_integrator import (
    OdeProblem,
    StepperStats,
    TimeSeries,
    fit_step,
    integrate_dirk2,
    integrate_ssprk3,
    write_time_series_csv,
)

logger = structlog.get_logger()

DEFAULT_REPEATS = 20
CHECK_TIMES_1D = (25.0, 50.0, 75.0, 100.0)
FD_CG_TOLERANCE = 1e-8
SHAPE_TOLERANCE = 0.05
STENCIL_TOLERANCE = 1e-12
MASS_STEP_TOLERANCE = 1e-12
MASS_RUN_TOLERANCE = 1e-10
ACCURACY_FACTOR = 2.0
CFL_MESH_CELLS = 16
CFL_BLOWUP = 4.0
CFL_GROWTH = 10.0
BOUNDED_GROWTH = 1.01


class ProblemFamily(StrEnum):
    ALLEN_CAHN_1D = "allen_cahn_1d"
    ALLEN_CAHN_2D = "allen_cahn_2d"
    ADVECTION_2D = "advection_2d"


class _FamilyParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, strict=True)


class AllenCahn1dParams(_FamilyParams):
    gamma: float = Field(default=1.0, gt=0)
    xi: float = Field(default=1.5, gt=0)
    mobility: float = Field(default=1.0, gt=0)
    mu0: float = 0.1
    x0: float = 20.0
    h: float = Field(default=1.0, gt=0)
    dt: float = Field(default=DT_ALLEN_CAHN_1D, gt=0)
    end_time: float = Field(default=100.0, gt=0)
    bench_end_time: float = Field(default=50.0, gt=0)
    sample_every: float = Field(default=SAMPLE_EVERY, gt=0)


class AllenCahn2dParams(_FamilyParams):
    gamma: float = Field(default=50.0, gt=0)
    xi: float = Field(default=4.0, gt=0)
    mobility: float = Field(default=1.0, gt=0)
    mu0: float = 0.0
    r0: float = Field(default=32.0, gt=0)
    h: float = Field(default=1.0, gt=0)
    dt: float = Field(default=DT_ALLEN_CAHN_2D, gt=0)
    end_time: float = Field(default=100.0, gt=0)
    bench_end_time: float = Field(default=2.0, gt=0)
    sample_every: float = Field(default=SAMPLE_EVERY, gt=0)


class Advection2dParams(_FamilyParams):
    ux: float = 1.0
    uy: float = 1.0
    end_time: float = Field(default=5.0, gt=0)
    cells: int = Field(default=48, ge=2)
    degree: int = Field(default=3, ge=0)
    safety: float = Field(default=ADVECTION_SAFETY, gt=0, le=1)
    box_lower: float = 2.0
    box_upper: float = 3.0
    snapshot_every: float = Field(default=1.0, gt=0)


FAMILY_PARAMS: dict[ProblemFamily, type[_FamilyParams]] = {
    ProblemFamily.ALLEN_CAHN_1D: AllenCahn1dParams,
    ProblemFamily.ALLEN_CAHN_2D: AllenCahn2dParams,
    ProblemFamily.ADVECTION_2D: Advection2dParams,
}

FAMILY_SCHEMES: dict[ProblemFamily, tuple[Scheme, ...]] = {
    ProblemFamily.ALLEN_CAHN_1D: (Scheme.FDM, Scheme.CGM),
    ProblemFamily.ALLEN_CAHN_2D: (Scheme.FDM, Scheme.CGM),
    ProblemFamily.ADVECTION_2D: (Scheme.DGM, Scheme.FVM),
}

FAMILY_DIM = {
    ProblemFamily.ALLEN_CAHN_1D: 1,
    ProblemFamily.ALLEN_CAHN_2D: 2,
    ProblemFamily.ADVECTION_2D: 2,
}


@dataclass
class RunOverrides:
    """Command-line overrides; None keeps the family default."""

    dt: float | None = None
    h: float | None = None
    p: int | None = None
    scheme: str | None = None
    repeats: int | None = None
    worker_threshold: int = WORKER_THRESHOLD
    multiscale_ratio: float = MULTISCALE_RATIO


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class SolveResult:
    family: ProblemFamily
    scheme: str
    stats: StepperStats
    files: list[Path] = field(default_factory=list)
    summary: dict[str, str] = field(default_factory=dict)


def _steps_per(interval: float, dt: float) -> int:
    return max(1, round(interval / dt))


def _implicit_problem(system, end_time: float, dt: float, direct_stages: bool = True) -> OdeProblem:
    # Only finite difference systems carry a direct stage solver
    stage_solve = system.stage_solver() if direct_stages and isinstance(system, FdSystem) else None
    return OdeProblem(system.rhs, system.state, 0.0, end_time, dt, stage_solve)


def _check(name: str, passed: bool, detail: str) -> CheckResult:
    logger.info("Verification check", check=name, passed=bool(passed), detail=detail)
    return CheckResult(name, bool(passed), detail)


class ProblemRunner:
    """
    ProblemRunner turns a validated spec plus overrides into runs of one benchmark family.

    Args:
        spec (ProblemSpec): The validated problem.
        overrides (RunOverrides | None): Command-line overrides.
    """

    def __init__(self, spec: ProblemSpec, overrides: RunOverrides | None = None):
        self.spec = spec
        self.overrides = overrides or RunOverrides()

    # --- binding -----------------------------------------------------------

    @property
    def family(self) -> ProblemFamily:
        if self.spec.benchmark is None:
            raise UnsupportedProblemFamily(
                f"problem '{self.spec.name or 'unnamed'}' has no benchmark binding; only classify is available"
            )
        try:
            family = ProblemFamily(self.spec.benchmark.family)
        except ValueError as e:
            known = ", ".join(f.value for f in ProblemFamily)
            raise UnsupportedProblemFamily(
                f"unknown problem family '{self.spec.benchmark.family}' (supported: {known})"
            ) from e
        if self.spec.domain.dim != FAMILY_DIM[family]:
            raise SpecValidationError(
                f"family {family} needs a {FAMILY_DIM[family]}D domain", "domain.dim"
            )
        return family

    def params(self) -> Any:
        family = self.family
        try:
            return FAMILY_PARAMS[family].model_validate(self.spec.benchmark.params)
        except ValidationError as e:
            first = e.errors()[0]
            loc = ".".join(str(part) for part in first["loc"])
            raise SpecValidationError(first["msg"], f"benchmark.params.{loc}" if loc else "benchmark.params") from e

    def classify(self) -> list[SchemeAssignment]:
        return select_schemes(
            self.spec, self.overrides.worker_threshold, self.overrides.multiscale_ratio
        )

    def resolve_scheme(self) -> tuple[Scheme, int | None]:
        """
        Scheme for the family's governed field, after overrides.

        Returns:
            tuple[Scheme, int | None]: The scheme and, for advection, the polynomial degree.

        Raises:
            UnsupportedProblemFamily: If the family has no solver for the scheme.
            ValueError: For contradicting overrides.
        """
        family = self.family
        if self.overrides.scheme:
            scheme = Scheme(self.overrides.scheme.upper())
        else:
            scheme = self.classify()[0].scheme

        if scheme not in FAMILY_SCHEMES[family]:
            raise UnsupportedProblemFamily(f"family {family} has no {scheme} solver")

        if family is not ProblemFamily.ADVECTION_2D:
            if self.overrides.p is not None:
                raise ValueError("--p applies to the advection family only")
            return scheme, None

        p = self.overrides.p
        if scheme is Scheme.FVM:
            if p not in (None, 0):
                raise ValueError("the finite volume scheme has degree 0")
            return scheme, 0
        degree = self.params().degree if p is None else p
        # Degree zero DG is the finite volume method
        return (Scheme.FVM if degree == 0 else Scheme.DGM), degree

    # --- solve ---------------------------------------------------------------

    def solve(self, out_dir: str | Path) -> SolveResult:
        """
        Run the resolved scheme to the end time and write tracks and snapshots.

        Args:
            out_dir (str | Path): Output directory; a sub-directory per family is used.

        Returns:
            SolveResult: Statistics, written files and a printable summary.
        """
        family = self.family
        scheme, p = self.resolve_scheme()
        out = Path(out_dir) / family.value
        logger.info("Solving problem", family=str(family), scheme=str(scheme), p=p, out=str(out))

        try:
            if family is ProblemFamily.ALLEN_CAHN_1D:
                return self._solve_allen_cahn_1d(scheme, out)
            if family is ProblemFamily.ALLEN_CAHN_2D:
                return self._solve_allen_cahn_2d(scheme, out)
            return self._solve_advection(scheme, p, out)
        except Exception as e:
            self._log_exception("An error occurred while solving", e, {"family": str(family)})
            raise

    def _allen_cahn_1d(self, scheme: Scheme, params: AllenCahn1dParams | None = None):
        params = params or self.params()
        h = self.overrides.h or params.h
        model = AllenCahnParams(params.gamma, params.xi, params.mobility, params.mu0, params.x0, h)
        grid = build_cartesian_grid(1, self.spec.domain.extents, h)
        state = planar_front(grid.axis_coordinates(0), model)
        build = build_fd_system if scheme is Scheme.FDM else build_cg_system
        return grid, model, build(grid, model, state)

    def _allen_cahn_2d(self, scheme: Scheme, params: AllenCahn2dParams | None = None):
        params = params or self.params()
        h = self.overrides.h or params.h
        model = AllenCahnParams(params.gamma, params.xi, params.mobility, params.mu0, None, h)
        grid = build_cartesian_grid(2, self.spec.domain.extents, h)
        state = quarter_grain(grid.node_coordinates(), params.r0, model)
        build = build_fd_system if scheme is Scheme.FDM else build_cg_system
        return grid, model, build(grid, model, state)

    def _interface_run(self, scheme: Scheme, end_time: float, direct_stages: bool = True):
        params = self.params()
        grid, model, system = self._allen_cahn_1d(scheme, params)
        dt = self.overrides.dt or params.dt
        times, positions, states = [], [], {}

        def observe(t, state):
            times.append(t)
            positions.append(measure_interface_position(state, grid))
            states[round(t, 9)] = state.copy()

        problem = _implicit_problem(system, end_time, dt, direct_stages)
        final, stats = integrate_dirk2(
            problem, observer=observe, observe_every=_steps_per(params.sample_every, dt)
        )
        times = np.array(times)
        track = InterfaceTrack(
            times,
            np.array(positions),
            np.array([analytic_interface_position(t, model) for t in times]),
        )
        return grid, model, system, final, stats, track, states

    def _solve_allen_cahn_1d(self, scheme: Scheme, out: Path) -> SolveResult:
        params = self.params()
        grid, model, system, final, stats, track, _ = self._interface_run(scheme, params.end_time)
        label = scheme.value.lower()
        files = [
            write_track_csv(track, out / f"{label}_interface_track.csv"),
            write_snapshot_csv(system.node_coordinates(), final, out / f"{label}_final.csv"),
        ]
        if scheme is Scheme.CGM:
            files.append(dump_operator_csv(system.stiffness, out / f"{label}_stiffness.csv"))
        summary = {
            "scheme": scheme.value,
            "steps": str(stats.steps),
            "rhs evaluations": str(stats.rhs_evaluations),
            "interface position": f"{track.measured[-1]:.6g}",
            "analytic position": f"{track.analytic[-1]:.6g}",
            "velocity ratio": f"{interface_velocity_ratio(track):.6g}",
        }
        return SolveResult(ProblemFamily.ALLEN_CAHN_1D, scheme.value, stats, files, summary)

    def _radius_run(self, scheme: Scheme, end_time: float):
        params = self.params()
        grid, model, system = self._allen_cahn_2d(scheme, params)
        dt = self.overrides.dt or params.dt
        times, radii = [], []

        def observe(t, state):
            times.append(t)
            radii.append(measure_grain_radius(state, grid))

        problem = _implicit_problem(system, end_time, dt)
        final, stats = integrate_dirk2(
            problem, observer=observe, observe_every=_steps_per(params.sample_every, dt)
        )
        vanishing = vanishing_time(params.r0, model)
        analytic = [
            analytic_grain_radius(t, params.r0, model.mobility) if t <= vanishing else math.nan
            for t in times
        ]
        track = RadiusTrack(np.array(times), np.array(radii), np.array(analytic))
        return grid, system, final, stats, track

    def _solve_allen_cahn_2d(self, scheme: Scheme, out: Path) -> SolveResult:
        params = self.params()
        grid, system, final, stats, track = self._radius_run(scheme, params.end_time)
        label = scheme.value.lower()
        files = [
            write_track_csv(track, out / f"{label}_radius_track.csv"),
            write_snapshot_csv(system.node_coordinates(), final, out / f"{label}_final.csv"),
        ]
        if scheme is Scheme.CGM:
            files.append(dump_operator_csv(system.stiffness, out / f"{label}_stiffness.csv"))
        summary = {
            "scheme": scheme.value,
            "steps": str(stats.steps),
            "rhs evaluations": str(stats.rhs_evaluations),
            "grain radius": f"{track.measured[-1]:.6g}",
            "analytic radius": f"{track.analytic[-1]:.6g}",
            "r^2 slope": f"{r_squared_slope(track):.6g}",
        }
        return SolveResult(ProblemFamily.ALLEN_CAHN_2D, scheme.value, stats, files, summary)

    def _advection_setup(self, p: int, params: Advection2dParams | None = None):
        params = params or self.params()
        extents = tuple(tuple(e) for e in self.spec.domain.extents)
        model = AdvectionParams((params.ux, params.uy), extents, params.end_time)
        ic = box_indicator(params.box_lower, params.box_upper)
        n_cells = dofs_matched_cells(params.cells, params.degree, p)
        system = build_dg_system(n_cells, p, model, ic)
        return model, ic, system

    def _advection_dt(self, system: DgSystem, params: Advection2dParams, safety: float | None = None) -> float:
        if self.overrides.dt:
            return self.overrides.dt
        bound = max_stable_dt(
            system.element.order, system.h, system.params.velocity, safety or params.safety
        )
        return fit_step(0.0, params.end_time, bound)

    def _solve_advection(self, scheme: Scheme, p: int, out: Path) -> SolveResult:
        params = self.params()
        model, ic, system = self._advection_setup(p, params)
        dt = self._advection_dt(system, params)
        label = f"{scheme.value.lower()}_p{p}"
        files: list[Path] = []
        series = TimeSeries(("mass",))
        record_mass = series.observer({"mass": system.total_mass})
        every = _steps_per(params.snapshot_every, dt)

        def observe(t, state):
            record_mass(t, state)
            files.append(
                write_snapshot_csv(system.node_coordinates(), state, out / f"{label}_snapshot_t{t:08.3f}.csv")
            )

        problem = OdeProblem(system.rhs, system.state, 0.0, params.end_time, dt)
        final, stats = integrate_ssprk3(problem, observer=observe, observe_every=every)
        files.append(write_time_series_csv(series, out / f"{label}_mass.csv"))
        files.append(
            write_snapshot_csv(system.mesh.vertices, project_to_vertices(system, final), out / f"{label}_vertices.csv")
        )
        files.extend(dump_mesh_csv(system.mesh, out / f"{label}_mesh"))

        exact = analytic_advection(ic, model, params.end_time)
        summary = {
            "scheme": scheme.value,
            "degree": str(p),
            "cells per axis": str(system.mesh.cells_per_axis[0]),
            "dofs": str(system.dofmap.n_dofs),
            "dt": f"{dt:.6g}",
            "steps": str(stats.steps),
            "mass drift": f"{abs(series.rows[-1][1] - series.rows[0][1]):.3e}",
            "L2 error": f"{l2_error(final, exact, system):.6g}",
        }
        return SolveResult(ProblemFamily.ADVECTION_2D, scheme.value, stats, files, summary)

    # --- verify --------------------------------------------------------------

    def verify(self) -> list[CheckResult]:
        """
        Run the analytic-comparison checks of the family.

        Returns:
            list[CheckResult]: One result per check, in execution order.
        """
        family = self.family
        logger.info("Verifying problem", family=str(family))
        try:
            if family is ProblemFamily.ALLEN_CAHN_1D:
                return self._verify_allen_cahn_1d()
            if family is ProblemFamily.ALLEN_CAHN_2D:
                return self._verify_allen_cahn_2d()
            return self._verify_advection()
        except Exception as e:
            self._log_exception("An error occurred while verifying", e, {"family": str(family)})
            raise

    def _verify_allen_cahn_1d(self) -> list[CheckResult]:
        params = self.params()
        # Same Newton-Krylov path for both, so the comparison isolates the spatial operators
        grid, model, _, fd_final, _, track, fd_states = self._interface_run(
            Scheme.FDM, params.end_time, direct_stages=False
        )
        _, _, _, _, _, _, cg_states = self._interface_run(Scheme.CGM, params.end_time)

        checks = []
        check_times = [t for t in CHECK_TIMES_1D if t <= params.end_time]
        compared = [t for t in check_times if t in fd_states and t in cg_states]
        worst = max((float(np.max(np.abs(fd_states[t] - cg_states[t]))) for t in compared), default=math.inf)
        checks.append(_check(
            "fd_cg_agreement",
            worst <= FD_CG_TOLERANCE,
            f"max |FD - CG| = {worst:.3e} at t in {check_times} (tol {FD_CG_TOLERANCE:g})",
        ))

        measured, analytic = track.measured[-1], track.analytic[-1]
        low, high = sorted((model.x0, analytic))
        checks.append(_check(
            "interface_position",
            low <= measured <= high and measured <= analytic,
            f"measured {measured:.4f}, analytic {analytic:.4f}, bracket [{low:g}; {high:g}]",
        ))

        shape = profile_shape_error(fd_final, grid, measured, model)
        checks.append(_check(
            "interface_shape",
            shape <= SHAPE_TOLERANCE,
            f"RMS deviation from centred tanh {shape:.3e} (tol {SHAPE_TOLERANCE:g})",
        ))
        return checks

    def _verify_allen_cahn_2d(self) -> list[CheckResult]:
        params = self.params()
        grid, _, fd = self._allen_cahn_2d(Scheme.FDM, params)
        _, _, cg = self._allen_cahn_2d(Scheme.CGM, params)

        checks = []
        deviation = five_point_stencil_deviation(cg.stiffness, grid)
        checks.append(_check(
            "stiffness_stencil",
            deviation <= STENCIL_TOLERANCE,
            f"max interior-row deviation {deviation:.3e} on {grid.counts[0] - 1}x{grid.counts[1] - 1} cells",
        ))

        rhs_diff = float(np.max(np.abs(fd.rhs(fd.state, 0.0) - cg.rhs(cg.state, 0.0))))
        checks.append(_check(
            "fd_cg_rhs_agreement",
            rhs_diff <= FD_CG_TOLERANCE,
            f"max |R_FD - R_CG| = {rhs_diff:.3e} on the initial state",
        ))

        _, _, _, _, track = self._radius_run(Scheme.FDM, params.end_time)
        increases = float(np.max(np.diff(track.measured), initial=0.0))
        checks.append(_check(
            "radius_monotone",
            increases <= 1e-9,
            f"largest radius increase {increases:.3e}",
        ))

        slope = r_squared_slope(track, 0.5)
        expected = -2.0 * params.mobility
        checks.append(_check(
            "radius_squared_slope",
            slope < 0 and abs(slope - expected) <= 0.5 * abs(expected),
            f"d(r^2)/dt = {slope:.4f}, curvature flow {expected:g}",
        ))
        return checks

    def _verify_advection(self) -> list[CheckResult]:
        params = self.params()
        checks = []
        errors: dict[int, float] = {}

        for p in sorted({0, 1, params.degree}):
            try:
                model, ic, system = self._advection_setup(p, params)
            except ValueError as e:
                logger.warning("Skipping degree without a dof-matched mesh", degree=p, error=str(e))
                continue
            dt = self._advection_dt(system, params)
            initial = system.total_mass()
            worst_step = 0.0
            previous = {"mass": initial}

            def observe(t, state, system=system, previous=previous):
                nonlocal worst_step
                mass = system.total_mass(state)
                worst_step = max(worst_step, abs(mass - previous["mass"]) / abs(initial))
                previous["mass"] = mass

            problem = OdeProblem(system.rhs, system.state, 0.0, params.end_time, dt)
            final, _ = integrate_ssprk3(problem, observer=observe)
            drift = abs(system.total_mass(final) - initial) / abs(initial)
            checks.append(_check(
                f"mass_conservation_p{p}",
                worst_step <= MASS_STEP_TOLERANCE and drift <= MASS_RUN_TOLERANCE,
                f"per step {worst_step:.2e}, over the run {drift:.2e} on {system.mesh.cells_per_axis[0]}^2 cells",
            ))
            errors[p] = l2_error(final, analytic_advection(ic, model, params.end_time), system)

        if params.degree > 0 and params.degree in errors and 0 in errors:
            dg, fv = errors[params.degree], errors[0]
            checks.append(_check(
                "accuracy_ordering",
                dg * ACCURACY_FACTOR <= fv,
                f"L2 error DG p={params.degree} {dg:.4e} vs FV {fv:.4e} at equal dofs",
            ))

        checks.extend(self._verify_cfl(params))
        return checks

    def _verify_cfl(self, params: Advection2dParams) -> list[CheckResult]:
        extents = tuple(tuple(e) for e in self.spec.domain.extents)
        model = AdvectionParams((params.ux, params.uy), extents, params.end_time)
        ic = box_indicator(params.box_lower, params.box_upper)
        p = max(params.degree, 1)
        checks = []

        for name, factor in (("cfl_within_bound", params.safety), ("cfl_violated", CFL_BLOWUP)):
            system = build_dg_system(CFL_MESH_CELLS, p, model, ic)
            bound = max_stable_dt(p, system.h, model.velocity, 1.0)
            dt = fit_step(0.0, params.end_time, bound * factor)
            norm0 = system.l2_norm(system.state)
            problem = OdeProblem(system.rhs, system.state, 0.0, params.end_time, dt)
            try:
                final, _ = integrate_ssprk3(problem)
                growth = system.l2_norm(final) / norm0
                diverged = False
            except NonFiniteState:
                growth, diverged = math.inf, True

            if name == "cfl_within_bound":
                checks.append(_check(name, growth <= BOUNDED_GROWTH, f"norm ratio {growth:.6g} at dt = {dt:.4g}"))
            else:
                checks.append(_check(
                    name,
                    diverged or growth > CFL_GROWTH,
                    f"norm ratio {growth:.3g} at dt = {dt:.4g} ({'non-finite' if diverged else 'finite'})",
                ))
        return checks

    # --- bench ---------------------------------------------------------------

    def bench(self, repeats: int | None = None) -> list[BenchReport]:
        """
        Time both candidate schemes of the family.

        Args:
            repeats (int | None): Full solves per scheme, default 20.

        Returns:
            list[BenchReport]: One report per scheme.
        """
        family = self.family
        params = self.params()
        n = repeats or self.overrides.repeats or DEFAULT_REPEATS
        setups = []

        if family is ProblemFamily.ADVECTION_2D:
            for p in (params.degree, 0):
                setups.append(BenchSetup(
                    f"{'FVM' if p == 0 else 'DGM'}_p{p}",
                    lambda p=p: self._advection_setup(p, params)[2],
                    lambda system: integrate_ssprk3(
                        OdeProblem(system.rhs, system.state, 0.0, params.end_time,
                                   self._advection_dt(system, params))
                    ),
                ))  # fmt: skip
        else:
            make = self._allen_cahn_1d if family is ProblemFamily.ALLEN_CAHN_1D else self._allen_cahn_2d
            dt = self.overrides.dt or params.dt
            for scheme in (Scheme.FDM, Scheme.CGM):
                setups.append(BenchSetup(
                    scheme.value,
                    lambda scheme=scheme: make(scheme, params)[2],
                    lambda system: integrate_dirk2(_implicit_problem(system, params.bench_end_time, dt)),
                ))  # fmt: skip

        reports = []
        for setup in setups:
            try:
                reports.append(run_benchmark(setup, n))
            except Exception as e:
                self._log_exception("An error occurred while benchmarking", e, {"scheme": setup.label})
                raise
        return reports

    def _log_exception(self, message: str, exception: Exception, extra: dict | None = None):
        """
        Log an exception message with its details.

        Args:
            message (str): The log message to be prefixed to the exception details.
            exception (Exception): The caught exception.
            extra (dict, optional): Additional context to include in the log entry.
        """
        logger.error(message, error=str(exception), error_type=type(exception).__name__, **(extra or {}))
