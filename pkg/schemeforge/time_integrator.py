# schemeforge/time_integrator.py

# This module provides the fixed-step method-of-lines drivers: SSP-RK3 and an L-stable two-stage DIRK.

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import structlog
from scipy.sparse.linalg import LinearOperator, gmres

from schemeforge.config import NEWTON_MAX, NEWTON_TOL
from schemeforge.exceptions import InvalidStepSize, NewtonDivergence, NonFiniteState

logger = structlog.get_logger()

Rhs = Callable[[np.ndarray, float], np.ndarray]
Observer = Callable[[float, np.ndarray], None]
# stage_solve(y, t, shift, r) returns delta with (I - shift * J(y, t)) delta = r
StageSolve = Callable[[np.ndarray, float, float, np.ndarray], np.ndarray]

# Stiffly accurate SDIRK2: A = [[g, 0], [1 - g, g]], b = last row of A
SDIRK_GAMMA = 1.0 - 1.0 / math.sqrt(2.0)
SDIRK_A = ((SDIRK_GAMMA, 0.0), (1.0 - SDIRK_GAMMA, SDIRK_GAMMA))
SDIRK_C = (SDIRK_GAMMA, 1.0)

STEP_ROUNDING = 1e-9


@dataclass
class OdeProblem:
    """
    du/dt = rhs(u, t) on [t0; t_end] with a fixed step dt.

    Implicit steppers solve their linearized stages with `stage_solve` when the
    problem supplies one, and with matrix-free GMRES otherwise.
    """

    rhs: Rhs
    y0: np.ndarray
    t0: float
    t_end: float
    dt: float
    stage_solve: StageSolve | None = None

    def __post_init__(self):
        self.y0 = np.asarray(self.y0, dtype=float)
        if not self.dt > 0:
            raise InvalidStepSize(f"dt must be positive, got {self.dt}")
        if not self.t_end > self.t0 and self.t_end != self.t0:
            raise InvalidStepSize(f"end time {self.t_end} lies before start time {self.t0}")
        steps = (self.t_end - self.t0) / self.dt
        if abs(steps - round(steps)) > STEP_ROUNDING * max(1.0, steps):
            raise InvalidStepSize(
                f"dt = {self.dt} does not divide the span [{self.t0}; {self.t_end}]"
            )

    @property
    def n_steps(self) -> int:
        return round((self.t_end - self.t0) / self.dt)

    def time_at(self, step: int) -> float:
        return self.t0 + step * self.dt


@dataclass
class StepperStats:
    steps: int = 0
    rhs_evaluations: int = 0
    newton_iterations: int = 0
    krylov_iterations: int = 0
    wall_time: float = 0.0


@dataclass
class TimeSeries:
    """Observables collected by an observer at a fixed stride."""

    names: tuple[str, ...]
    rows: list[tuple[float, ...]] = field(default_factory=list)

    def observer(self, probes: dict[str, Callable[[np.ndarray], float]], every: int = 1) -> Observer:
        """
        Build an observer recording the probes every `every` calls.
        """
        counter = {"calls": 0}

        def observe(t: float, state: np.ndarray):
            if counter["calls"] % every == 0:
                self.rows.append((t, *(float(probe(state)) for probe in probes.values())))
            counter["calls"] += 1

        return observe


def fit_step(t0: float, t_end: float, dt_max: float) -> float:
    """
    Largest uniform step not exceeding dt_max that divides [t0; t_end].

    Args:
        t0 (float): Start time.
        t_end (float): End time.
        dt_max (float): Upper bound, e.g. a stability limit.

    Returns:
        float: The step.
    """
    if not dt_max > 0:
        raise InvalidStepSize(f"dt_max must be positive, got {dt_max}")
    n = max(1, math.ceil((t_end - t0) / dt_max - STEP_ROUNDING))
    return (t_end - t0) / n


def _check_finite(state: np.ndarray, step: int):
    if not np.all(np.isfinite(state)):
        logger.error("State became non-finite", step=step)
        raise NonFiniteState(step)


def integrate_ssprk3(
    problem: OdeProblem, observer: Observer | None = None, observe_every: int = 1
) -> tuple[np.ndarray, StepperStats]:
    """
    Advance with the three-stage strong-stability-preserving Runge-Kutta method.

    Args:
        problem (OdeProblem): The problem.
        observer (Observer | None): Called as observer(t, state) at t0, every
            `observe_every` steps and at the end.
        observe_every (int): Observer stride in steps.

    Returns:
        tuple[np.ndarray, StepperStats]: Final state and statistics.

    Raises:
        NonFiniteState: If the state stops being finite; carries the step index.
    """
    stats = StepperStats()
    started = time.perf_counter()
    rhs, dt = problem.rhs, problem.dt
    u = problem.y0.copy()

    if observer:
        observer(problem.t0, u)

    for step in range(1, problem.n_steps + 1):
        t = problem.time_at(step - 1)
        u1 = u + dt * rhs(u, t)
        u2 = 0.75 * u + 0.25 * (u1 + dt * rhs(u1, t + dt))
        u = (u + 2.0 * (u2 + dt * rhs(u2, t + 0.5 * dt))) / 3.0
        stats.rhs_evaluations += 3
        stats.steps = step
        _check_finite(u, step)

        if observer and (step % observe_every == 0 or step == problem.n_steps):
            observer(problem.time_at(step), u)

    stats.wall_time = time.perf_counter() - started
    logger.debug("Finished SSP-RK3 integration", steps=stats.steps, rhs=stats.rhs_evaluations)
    return u, stats


class _CountingRhs:
    def __init__(self, rhs: Rhs, stats: StepperStats):
        self.rhs = rhs
        self.stats = stats

    def __call__(self, u: np.ndarray, t: float) -> np.ndarray:
        self.stats.rhs_evaluations += 1
        return self.rhs(u, t)


def _solve_stage(
    rhs: _CountingRhs,
    known: np.ndarray,
    guess: np.ndarray,
    t: float,
    step_gamma: float,
    newton_tol: float,
    newton_max: int,
    step: int,
    stats: StepperStats,
    stage_solve: StageSolve | None = None,
) -> np.ndarray:
    """
    Solve Y - step_gamma * rhs(Y, t) = known by Newton iteration.

    With a stage_solve the Newton corrections come from it directly. Otherwise they are
    Newton-Krylov: Jacobian-vector products are directional finite differences of rhs and
    the linear systems are left to unpreconditioned GMRES.
    """
    y = guess.copy()
    f_y = rhs(y, t)
    residual = y - step_gamma * f_y - known
    norm = float(np.max(np.abs(residual)))

    for _ in range(newton_max):
        if norm < newton_tol:
            return y

        if stage_solve is not None:
            y = y + stage_solve(y, t, step_gamma, -residual)
        else:
            y = y + _krylov_correction(rhs, y, f_y, residual, t, step_gamma, newton_tol, step, norm, stats)
        f_y = rhs(y, t)
        residual = y - step_gamma * f_y - known
        norm = float(np.max(np.abs(residual)))
        stats.newton_iterations += 1

    if norm < newton_tol:
        return y
    logger.warning("Newton iteration stalled", step=step, residual=norm)
    raise NewtonDivergence(step, norm)


def _krylov_correction(
    rhs: _CountingRhs,
    y: np.ndarray,
    f_y: np.ndarray,
    residual: np.ndarray,
    t: float,
    step_gamma: float,
    newton_tol: float,
    step: int,
    norm: float,
    stats: StepperStats,
) -> np.ndarray:
    """One Newton correction from GMRES on finite-difference Jacobian-vector products."""
    n = y.size
    sqrt_eps = math.sqrt(np.finfo(float).eps)
    y_scale = 1.0 + float(np.linalg.norm(y))

    def jvp(v, y=y, f_y=f_y, y_scale=y_scale):
        v = np.ravel(v)
        v_norm = np.linalg.norm(v)
        if v_norm == 0.0:
            return np.zeros_like(v)
        eps = sqrt_eps * y_scale / v_norm
        return v - step_gamma * (rhs(y + eps * v, t) - f_y) / eps

    krylov_calls = {"n": 0}

    def count(_):
        krylov_calls["n"] += 1

    operator = LinearOperator((n, n), matvec=jvp, dtype=float)
    delta, info = gmres(
        operator,
        -residual,
        rtol=1e-12,
        atol=0.1 * newton_tol,
        restart=50,
        maxiter=10,
        callback=count,
        callback_type="pr_norm",
    )
    stats.krylov_iterations += krylov_calls["n"]
    if info < 0:
        raise NewtonDivergence(step, norm)

    return delta


def integrate_dirk2(
    problem: OdeProblem,
    newton_tol: float = NEWTON_TOL,
    newton_max: int = NEWTON_MAX,
    observer: Observer | None = None,
    observe_every: int = 1,
) -> tuple[np.ndarray, StepperStats]:
    """
    Advance with the L-stable, stiffly accurate two-stage SDIRK method of order two.

    Args:
        problem (OdeProblem): The problem; rhs must be differentiable in the state. Its
            stage_solve, when set, replaces the Krylov solves of the Newton corrections.
        newton_tol (float): Absolute max-norm tolerance on the stage residual.
        newton_max (int): Newton iterations allowed per stage.
        observer (Observer | None): Called as observer(t, state) at t0, every
            `observe_every` steps and at the end.
        observe_every (int): Observer stride in steps.

    Returns:
        tuple[np.ndarray, StepperStats]: Final state and statistics.

    Raises:
        NewtonDivergence: If a stage residual is not below newton_tol after newton_max iterations.
        NonFiniteState: If the state stops being finite.
    """
    stats = StepperStats()
    started = time.perf_counter()
    rhs = _CountingRhs(problem.rhs, stats)
    dt = problem.dt
    step_gamma = dt * SDIRK_GAMMA
    u = problem.y0.copy()

    if observer:
        observer(problem.t0, u)

    for step in range(1, problem.n_steps + 1):
        t = problem.time_at(step - 1)

        y1 = _solve_stage(
            rhs, u, u, t + SDIRK_C[0] * dt, step_gamma, newton_tol, newton_max, step, stats, problem.stage_solve
        )
        k1 = (y1 - u) / step_gamma

        known = u + dt * SDIRK_A[1][0] * k1
        u = _solve_stage(
            rhs, known, y1, t + SDIRK_C[1] * dt, step_gamma, newton_tol, newton_max, step, stats, problem.stage_solve
        )

        stats.steps = step
        _check_finite(u, step)
        if observer and (step % observe_every == 0 or step == problem.n_steps):
            observer(problem.time_at(step), u)

    stats.wall_time = time.perf_counter() - started
    logger.debug(
        "Finished DIRK2 integration",
        steps=stats.steps,
        rhs=stats.rhs_evaluations,
        newton=stats.newton_iterations,
        krylov=stats.krylov_iterations,
    )
    return u, stats


def write_time_series_csv(series: TimeSeries, path: str | Path) -> Path:
    """
    Write a time series as CSV with a t column followed by the observables.

    Args:
        series (TimeSeries): Collected rows.
        path (str | Path): Output file.

    Returns:
        Path: The written file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        path,
        np.array(series.rows, dtype=float).reshape(-1, 1 + len(series.names)),
        delimiter=",",
        header=",".join(["t", *series.names]),
        comments="",
        fmt="%.10g",
        encoding="utf-8",
    )
    return path
