# schemeforge/tests/test_solver_cg.py

import csv

import numpy as np
import pytest
import scipy.sparse as sp

from schemeforge.exceptions import SizeMismatch
from schemeforge.mesh import (
    GAUSS_LEGENDRE,
    build_cartesian_grid,
    build_dof_map,
    build_quad_mesh_from_grid,
    build_reference_element,
)
from schemeforge.solver_cg import (
    AssemblyCache,
    assemble_mass_diagonal,
    assemble_reaction,
    assemble_stiffness,
    build_cg_system,
    cg_semidiscrete_rhs,
    consistent_mass_matrix,
    dump_operator_csv,
    five_point_stencil_deviation,
)
from schemeforge.solver_fd import (
    PLANAR_FRONT,
    VANISHING_GRAIN,
    ac_rhs,
    build_fd_system,
    planar_front,
    quarter_grain,
)


def q1_setup(grid):
    mesh = build_quad_mesh_from_grid(grid)
    element = build_reference_element("interval" if grid.dim == 1 else "quad", 1)
    return mesh, element, build_dof_map(mesh, element, "continuous")


@pytest.fixture
def grid_8x8():
    return build_cartesian_grid(2, [(0.0, 8.0), (0.0, 8.0)], 1.0)


def test_interior_rows_are_the_five_point_stencil(grid_8x8):
    stiffness = assemble_stiffness(*q1_setup(grid_8x8))
    assert five_point_stencil_deviation(stiffness, grid_8x8) <= 1e-12

    row = stiffness.getrow(4 * 9 + 4).toarray().reshape(9, 9)
    assert row[4, 4] == pytest.approx(-4.0)
    assert [row[4, 3], row[4, 5], row[3, 4], row[5, 4]] == pytest.approx([1.0] * 4)
    assert [row[3, 3], row[3, 5], row[5, 3], row[5, 5]] == pytest.approx([0.0] * 4, abs=1e-14)


def test_stretched_grid_scales_the_stencil():
    grid = build_cartesian_grid(2, [(0.0, 12.0), (0.0, 3.0)], (2.0, 0.5))
    stiffness = assemble_stiffness(*q1_setup(grid))
    assert five_point_stencil_deviation(stiffness, grid) <= 1e-12


def test_stiffness_is_symmetric_with_zero_row_sums(grid_8x8):
    stiffness = assemble_stiffness(*q1_setup(grid_8x8))
    assert abs(stiffness - stiffness.T).max() <= 1e-14
    np.testing.assert_allclose(np.asarray(stiffness.sum(axis=1)).ravel(), 0.0, atol=1e-12)
    assert stiffness.has_sorted_indices


def test_stencil_deviation_needs_a_2d_grid():
    grid = build_cartesian_grid(1, [(0.0, 4.0)], 1.0)
    with pytest.raises(ValueError):
        five_point_stencil_deviation(sp.identity(5, format="csr"), grid)


def test_mass_diagonal_is_the_trapezoid_rule(grid_8x8):
    mass = assemble_mass_diagonal(*q1_setup(grid_8x8))
    np.testing.assert_allclose(mass, grid_8x8.quadrature_weights())


def test_consistent_mass_rows_sum_to_the_diagonal(grid_8x8):
    mesh, element, dofmap = q1_setup(grid_8x8)
    consistent = consistent_mass_matrix(mesh, dofmap)
    np.testing.assert_allclose(
        np.asarray(consistent.sum(axis=1)).ravel(), assemble_mass_diagonal(mesh, element, dofmap)
    )
    assert consistent[0, 1] > 0


def test_mass_diagonal_needs_collocation(grid_8x8):
    mesh = build_quad_mesh_from_grid(grid_8x8)
    element = build_reference_element("quad", 1, GAUSS_LEGENDRE)
    with pytest.raises(ValueError):
        assemble_mass_diagonal(mesh, element, build_dof_map(mesh, element, "continuous"))


def test_reaction_is_lumped(grid_8x8):
    mesh, element, dofmap = q1_setup(grid_8x8)
    state = quarter_grain(grid_8x8.node_coordinates(), 4.0, VANISHING_GRAIN)
    cache = AssemblyCache.for_system(mesh.n_cells, element)
    reaction = assemble_reaction(state, VANISHING_GRAIN, mesh, element, dofmap, cache)
    expected = assemble_mass_diagonal(mesh, element, dofmap) * ac_rhs(state, VANISHING_GRAIN)
    np.testing.assert_allclose(reaction, expected, atol=1e-14)
    assert cache.nbytes() > 0


def test_reaction_size_check(grid_8x8):
    mesh, element, dofmap = q1_setup(grid_8x8)
    with pytest.raises(SizeMismatch):
        assemble_reaction(np.zeros(3), VANISHING_GRAIN, mesh, element, dofmap)


def test_cg_matches_fd_in_1d():
    grid = build_cartesian_grid(1, [(0.0, 100.0)], 1.0)
    state = planar_front(grid.axis_coordinates(0), PLANAR_FRONT)
    fd = build_fd_system(grid, PLANAR_FRONT, state)
    cg = build_cg_system(grid, PLANAR_FRONT, state)
    np.testing.assert_allclose(cg_semidiscrete_rhs(cg, 0.0), fd.rhs(state, 0.0), atol=1e-12)


def test_cg_matches_fd_in_2d(grid_8x8):
    state = quarter_grain(grid_8x8.node_coordinates(), 4.0, VANISHING_GRAIN)
    fd = build_fd_system(grid_8x8, VANISHING_GRAIN, state)
    cg = build_cg_system(grid_8x8, VANISHING_GRAIN, state)
    out = np.empty_like(state)
    result = cg.rhs(state, 0.0, out)
    assert result is out
    np.testing.assert_allclose(result, fd.rhs(state, 0.0), atol=1e-12)


def test_cg_allocates_more_than_fd(grid_8x8):
    state = np.zeros(grid_8x8.n_points)
    fd = build_fd_system(grid_8x8, VANISHING_GRAIN, state)
    cg = build_cg_system(grid_8x8, VANISHING_GRAIN, state)
    assert cg.allocated_bytes() > 5 * fd.allocated_bytes()
    np.testing.assert_array_equal(cg.node_coordinates(), grid_8x8.node_coordinates())


def test_operator_dump(tmp_path):
    matrix = sp.csr_matrix(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    path = dump_operator_csv(matrix, tmp_path / "ops" / "k.csv")
    with path.open(encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["row", "col", "value"]
    assert rows[1:] == [["0", "0", "2"], ["0", "1", "-1"], ["1", "0", "-1"], ["1", "1", "2"]]
