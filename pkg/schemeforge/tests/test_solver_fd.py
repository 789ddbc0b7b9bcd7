# schemeforge/tests/test_solver_fd.py

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from schemeforge.exceptions import SizeMismatch
from schemeforge.mesh import build_cartesian_grid
from schemeforge.solver_fd import (
    PLANAR_FRONT,
    VANISHING_GRAIN,
    AllenCahnParams,
    ac_rhs,
    ac_rhs_derivative,
    build_fd_system,
    fd_laplacian_apply,
    fd_semidiscrete_rhs,
    front_velocity,
    planar_front,
    quarter_grain,
    vanishing_time,
)

GRID_1D = build_cartesian_grid(1, [(0.0, 10.0)], 1.0)
GRID_2D = build_cartesian_grid(2, [(0.0, 6.0), (0.0, 4.0)], 1.0)

values = st.floats(min_value=-10, max_value=10, allow_nan=False)


def test_reaction_at_the_wells_and_midpoint():
    np.testing.assert_allclose(ac_rhs(np.array([0.0, 1.0]), PLANAR_FRONT), 0.0)
    # Only the driving term survives at phi = 1/2
    expected = -(0.1 / (3.0 * 1.0 * 1.5)) * 6.0 * 0.25
    assert ac_rhs(np.array([0.5]), PLANAR_FRONT)[0] == pytest.approx(expected)
    assert ac_rhs(np.array([0.5]), VANISHING_GRAIN)[0] == 0.0


def test_laplacian_of_a_quadratic():
    x = GRID_1D.axis_coordinates(0)
    lap = fd_laplacian_apply(x**2, GRID_1D)
    np.testing.assert_allclose(lap[1:-1], 2.0)
    # Mirror ghosts: 2 (u1 - u0) / h^2 at the left end
    assert lap[0] == pytest.approx(2.0)


def test_laplacian_of_constants_and_linear_2d():
    np.testing.assert_allclose(fd_laplacian_apply(np.full(GRID_2D.n_points, 3.0), GRID_2D), 0.0)
    x = GRID_2D.node_coordinates()[:, 0]
    lap = fd_laplacian_apply(x, GRID_2D).reshape(GRID_2D.shape)
    np.testing.assert_allclose(lap[:, 1:-1], 0.0)


def test_laplacian_writes_into_the_buffer():
    out = np.empty(GRID_2D.n_points)
    state = np.random.default_rng(1).random(GRID_2D.n_points)
    result = fd_laplacian_apply(state, GRID_2D, out)
    assert result is out


def test_laplacian_size_checks():
    with pytest.raises(SizeMismatch):
        fd_laplacian_apply(np.zeros(5), GRID_1D)
    with pytest.raises(SizeMismatch):
        fd_laplacian_apply(np.zeros(GRID_1D.n_points), GRID_1D, np.zeros(3))


@given(
    arrays(float, GRID_2D.n_points, elements=values),
    arrays(float, GRID_2D.n_points, elements=values),
    st.floats(min_value=-5, max_value=5),
)
def test_laplacian_is_linear(u, v, a):
    left = fd_laplacian_apply(a * u + v, GRID_2D)
    right = a * fd_laplacian_apply(u, GRID_2D) + fd_laplacian_apply(v, GRID_2D)
    np.testing.assert_allclose(left, right, atol=1e-9)


@given(
    arrays(float, GRID_2D.n_points, elements=values),
    arrays(float, GRID_2D.n_points, elements=values),
)
def test_laplacian_is_symmetric_in_the_trapezoid_product(u, v):
    w = GRID_2D.quadrature_weights()
    left = np.dot(w * fd_laplacian_apply(u, GRID_2D), v)
    right = np.dot(w * u, fd_laplacian_apply(v, GRID_2D))
    assert left == pytest.approx(right, abs=1e-8)


def test_system_rhs_combines_diffusion_and_reaction():
    params = AllenCahnParams(gamma=1.0, xi=1.5, mobility=2.0, mu0=0.1, x0=5.0)
    state = planar_front(GRID_1D.axis_coordinates(0), params)
    system = build_fd_system(GRID_1D, params, state)
    expected = 2.0 * (fd_laplacian_apply(state, GRID_1D) - ac_rhs(state, params))
    np.testing.assert_allclose(fd_semidiscrete_rhs(system, 0.0), expected)
    np.testing.assert_allclose(system.rhs(state, 0.0), expected)


def test_system_only_holds_the_state():
    system = build_fd_system(GRID_2D, VANISHING_GRAIN, np.zeros(GRID_2D.n_points))
    assert system.allocated_bytes() == GRID_2D.n_points * 8
    np.testing.assert_array_equal(system.quadrature_weights(), GRID_2D.quadrature_weights())


def test_reaction_derivative_matches_difference_quotients():
    phi = np.linspace(-0.2, 1.2, 15)
    eps = 1e-6
    quotient = (ac_rhs(phi + eps, PLANAR_FRONT) - ac_rhs(phi - eps, PLANAR_FRONT)) / (2.0 * eps)
    np.testing.assert_allclose(ac_rhs_derivative(phi, PLANAR_FRONT), quotient, atol=1e-8)


def test_stage_solver_inverts_the_stage_matrix():
    params = AllenCahnParams(gamma=1.0, xi=1.5, mobility=2.0, mu0=0.1, x0=5.0)
    y = planar_front(GRID_1D.axis_coordinates(0), params)
    system = build_fd_system(GRID_1D, params, y)
    n = GRID_1D.n_points
    laplacian = np.column_stack([fd_laplacian_apply(e, GRID_1D) for e in np.eye(n)])
    jacobian = params.mobility * (laplacian - np.diag(ac_rhs_derivative(y, params)))
    shift, r = 0.03, np.sin(np.arange(n, dtype=float))

    delta = system.stage_solver()(y, 0.0, shift, r)
    np.testing.assert_allclose((np.eye(n) - shift * jacobian) @ delta, r, atol=1e-12)


def test_stage_solver_only_on_a_line():
    system = build_fd_system(GRID_2D, VANISHING_GRAIN, np.zeros(GRID_2D.n_points))
    assert system.stage_solver() is None


def test_system_rejects_wrong_state():
    with pytest.raises(SizeMismatch):
        build_fd_system(GRID_2D, VANISHING_GRAIN, np.zeros(4))


def test_planar_front_profile():
    x = np.array([PLANAR_FRONT.x0])
    assert planar_front(x, PLANAR_FRONT)[0] == pytest.approx(0.5)
    assert front_velocity(PLANAR_FRONT) == pytest.approx(0.1)
    # The centre has moved by M mu0 t / gamma
    assert planar_front(x + 10.0, PLANAR_FRONT, t=100.0)[0] == pytest.approx(0.5)


def test_quarter_grain_profile():
    points = np.array([[0.0, 0.0], [32.0, 0.0], [0.0, 64.0]])
    phi = quarter_grain(points, 32.0, VANISHING_GRAIN)
    assert phi[0] == pytest.approx(1.0)
    assert phi[1] == pytest.approx(0.5)
    assert phi[2] < 1e-6
    assert vanishing_time(32.0, VANISHING_GRAIN) == pytest.approx(512.0)


@pytest.mark.parametrize("field", ["xi", "mobility", "h", "gamma"])
def test_parameters_must_be_positive(field):
    kwargs = {"gamma": 1.0, "xi": 1.0, "mobility": 1.0, "mu0": 0.0, field: 0.0}
    with pytest.raises(ValueError):
        AllenCahnParams(**kwargs)
