# schemeforge/tests/test_metrics_bench.py

import math

import numpy as np
import pytest

from schemeforge.exceptions import MultipleCrossings, NegativeArea, NoCrossing
from schemeforge.mesh import build_cartesian_grid
from schemeforge.metrics_bench import (
    BenchReport,
    BenchSetup,
    InterfaceTrack,
    RadiusTrack,
    analytic_advection,
    analytic_grain_radius,
    analytic_interface,
    analytic_interface_position,
    interface_velocity_ratio,
    l2_error,
    measure_grain_radius,
    measure_interface_position,
    profile_shape_error,
    r_squared_slope,
    relative_column,
    run_benchmark,
    summarize_samples,
)
from schemeforge.solver_dg import AdvectionParams, box_indicator
from schemeforge.solver_fd import PLANAR_FRONT, VANISHING_GRAIN, quarter_grain

LINE = build_cartesian_grid(1, [(0.0, 100.0)], 1.0)
SQUARE = build_cartesian_grid(2, [(0.0, 64.0), (0.0, 64.0)], 1.0)


def test_analytic_interface_moves_with_the_driving_force():
    assert analytic_interface_position(0.0, PLANAR_FRONT) == 20.0
    assert analytic_interface_position(100.0, PLANAR_FRONT) == pytest.approx(30.0)
    profile = analytic_interface(np.array([30.0]), 100.0, PLANAR_FRONT)
    assert profile[0] == pytest.approx(0.5)


def test_analytic_references_need_x0():
    with pytest.raises(ValueError):
        analytic_interface_position(1.0, VANISHING_GRAIN)
    with pytest.raises(ValueError):
        analytic_interface(np.zeros(2), 1.0, VANISHING_GRAIN)


def test_analytic_grain_radius():
    assert analytic_grain_radius(0.0, 32.0, 1.0) == 32.0
    assert analytic_grain_radius(256.0, 32.0, 1.0) == pytest.approx(math.sqrt(512.0))
    assert analytic_grain_radius(512.0, 32.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        analytic_grain_radius(600.0, 32.0, 1.0)


def test_analytic_advection_wraps_periodically():
    params = AdvectionParams()
    box = box_indicator()
    after_a_period = analytic_advection(box, params, 5.0)
    x = np.array([2.5, 0.5, 4.9])
    y = np.array([2.5, 2.5, 0.1])
    np.testing.assert_array_equal(after_a_period(x, y), box(x, y))
    # After t = 1 the box covers [3; 4]^2
    shifted = analytic_advection(box, params, 1.0)
    np.testing.assert_array_equal(shifted(np.array([3.5, 2.5]), np.array([3.5, 2.5])), [1.0, 0.0])


def test_interface_position_of_the_analytic_profile():
    state = analytic_interface(LINE.axis_coordinates(0), 0.0, PLANAR_FRONT)
    assert measure_interface_position(state, LINE) == pytest.approx(20.0, abs=1e-2)


def test_interface_position_interpolates_linearly():
    grid = build_cartesian_grid(1, [(0.0, 3.0)], 1.0)
    assert measure_interface_position(np.array([1.0, 0.75, 0.25, 0.0]), grid) == pytest.approx(1.5)


@pytest.mark.parametrize(
    "state, error",
    [(np.ones(4), NoCrossing), (np.zeros(4), NoCrossing), (np.array([1.0, 0.0, 1.0, 0.0]), MultipleCrossings)],
)
def test_interface_position_errors(state, error):
    grid = build_cartesian_grid(1, [(0.0, 3.0)], 1.0)
    with pytest.raises(error):
        measure_interface_position(state, grid)


def test_interface_position_needs_1d():
    with pytest.raises(ValueError):
        measure_interface_position(np.zeros(SQUARE.n_points), SQUARE)


def test_grain_radius_of_the_initial_quarter_grain():
    state = quarter_grain(SQUARE.node_coordinates(), 32.0, VANISHING_GRAIN)
    assert measure_grain_radius(state, SQUARE) == pytest.approx(32.0, rel=0.02)


def test_grain_radius_rejects_empty_phase():
    with pytest.raises(NegativeArea):
        measure_grain_radius(np.zeros(SQUARE.n_points), SQUARE)


def test_l2_error():
    grid = build_cartesian_grid(2, [(0.0, 2.0), (0.0, 3.0)], 1.0)
    state = np.ones(grid.n_points)
    assert l2_error(state, lambda x, y: np.ones_like(x), grid) == 0.0
    # Constant offset of 2 over an area of 6
    assert l2_error(state, lambda x, y: np.full_like(x, 3.0), grid) == pytest.approx(2.0 * math.sqrt(6.0))


def test_profile_shape_error():
    x = LINE.axis_coordinates(0)
    state = analytic_interface(x, 0.0, PLANAR_FRONT)
    assert profile_shape_error(state, LINE, 20.0, PLANAR_FRONT) == pytest.approx(0.0, abs=1e-14)
    assert profile_shape_error(state, LINE, 25.0, PLANAR_FRONT) > 0.05


def test_tracks_validate_their_columns():
    with pytest.raises(ValueError):
        InterfaceTrack(np.arange(3.0), np.zeros(3), np.zeros(2))
    with pytest.raises(ValueError):
        RadiusTrack(np.array([0.0, 0.0]), np.zeros(2), np.zeros(2))


def test_interface_velocity_ratio_and_lag():
    times = np.linspace(0.0, 100.0, 11)
    track = InterfaceTrack(times, 20.0 + 0.095 * times, 20.0 + 0.1 * times)
    assert interface_velocity_ratio(track) == pytest.approx(0.95)
    assert track.lag[-1] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        interface_velocity_ratio(InterfaceTrack(times, times, np.zeros(11)))


def test_r_squared_slope_uses_the_leading_fraction():
    times = np.linspace(0.0, 400.0, 41)
    radii = np.sqrt(1024.0 - 2.0 * times)
    # The tail is corrupted and lies past the fitted half
    radii[-5:] = 1.0
    track = RadiusTrack(times, radii, radii)
    assert r_squared_slope(track) == pytest.approx(-2.0)
    with pytest.raises(ValueError):
        r_squared_slope(track, fraction=0.0)
    with pytest.raises(ValueError):
        r_squared_slope(track, fraction=0.001)


def test_summarize_samples():
    report = summarize_samples("FDM", [3.0, 1.0, 2.0], 64)
    assert report == BenchReport("FDM", 3, 2.0, 2.0, 1.0, 64)
    single = summarize_samples("CGM", [0.5], 128)
    assert single.std_s == 0.0
    with pytest.raises(ValueError):
        summarize_samples("FDM", [], 8)


class _Sized:
    def __init__(self, nbytes):
        self.nbytes = nbytes
        self.runs = 0

    def allocated_bytes(self):
        return self.nbytes


def test_run_benchmark_rebuilds_for_every_repeat():
    built = []

    def build():
        built.append(_Sized(256))
        return built[-1]

    def run(system):
        system.runs += 1

    report = run_benchmark(BenchSetup("FDM", build, run), 4)
    assert report.n == 4
    assert report.bytes == 256
    assert len(built) == 4
    assert all(s.runs == 1 for s in built)
    assert report.median_s >= 0.0
    with pytest.raises(ValueError):
        run_benchmark(BenchSetup("FDM", build, run), 0)


def test_relative_column():
    reports = [BenchReport("CGM", 3, 6.0, 6.0, 0.1, 800), BenchReport("FDM", 3, 1.5, 1.5, 0.1, 100)]
    assert relative_column(reports) == [(4.0, 8.0), (1.0, 1.0)]
    assert relative_column([]) == []
