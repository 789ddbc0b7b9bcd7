# schemeforge/solver_cg.py

# This module provides the collocated Q1 continuous Galerkin semi-discretization of the Allen-Cahn equation.

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import structlog

from schemeforge.exceptions import SizeMismatch
from schemeforge.mesh import (
    COLLOCATION,
    GAUSS_LEGENDRE,
    CartesianGrid,
    DofMap,
    QuadMesh,
    ReferenceElement,
    build_dof_map,
    build_quad_mesh_from_grid,
    build_reference_element,
    cell_jacobians,
)
from schemeforge.solver_fd import AllenCahnParams, ac_rhs

logger = structlog.get_logger()


def _scatter_matrix(local: np.ndarray, dofmap: DofMap) -> sp.csr_matrix:
    """Accumulate per-cell matrices into a coordinate buffer, then compress once."""
    dofs = dofmap.cell_dofs
    nb = dofs.shape[1]
    rows = np.broadcast_to(dofs[:, :, None], (len(dofs), nb, nb)).ravel()
    cols = np.broadcast_to(dofs[:, None, :], (len(dofs), nb, nb)).ravel()
    matrix = sp.coo_matrix(
        (local.ravel(), (rows, cols)), shape=(dofmap.n_dofs, dofmap.n_dofs)
    ).tocsr()
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return matrix


def assemble_stiffness(mesh: QuadMesh, element: ReferenceElement, dofmap: DofMap) -> sp.csr_matrix:
    """
    Assemble K_ij = -integral(grad phi_i . grad phi_j) cell by cell.

    Every cell maps its reference gradients through its own jacobian, uniform mesh or
    not. With collocation and h = 1 the interior rows reproduce the five-point stencil.

    Args:
        mesh (QuadMesh): Mesh of the domain.
        element (ReferenceElement): Q1 element.
        dofmap (DofMap): Continuous dof map.

    Returns:
        sp.csr_matrix: Symmetric stiffness operator with sorted column indices.

    Raises:
        SingularJacobian: If a cell jacobian is not positive.
    """
    _, det, inv = cell_jacobians(mesh, element.quad_points)
    grads = np.einsum("qbk,cqkj->cqbj", element.grad_at_quad, inv)
    weights = det * element.quad_weights
    local = -np.einsum("cq,cqaj,cqbj->cab", weights, grads, grads)

    stiffness = _scatter_matrix(local, dofmap)
    logger.info("Assembled stiffness", dofs=dofmap.n_dofs, nnz=stiffness.nnz)
    return stiffness


def assemble_mass_diagonal(mesh: QuadMesh, element: ReferenceElement, dofmap: DofMap) -> np.ndarray:
    """
    Assemble the diagonal mass matrix of a collocated element.

    Args:
        mesh (QuadMesh): Mesh of the domain.
        element (ReferenceElement): Element with Gauss-Lobatto collocation.
        dofmap (DofMap): Dof map.

    Returns:
        np.ndarray: Diagonal entries, sum of quadrature weight times |det J| per dof.

    Raises:
        ValueError: If the element is not collocated.
    """
    if element.quadrature != COLLOCATION:
        raise ValueError("a diagonal mass matrix needs collocation quadrature")

    _, det, _ = cell_jacobians(mesh, element.quad_points)
    local = np.einsum("cq,qa->ca", det * element.quad_weights, element.basis_at_quad)
    return np.bincount(dofmap.cell_dofs.ravel(), weights=local.ravel(), minlength=dofmap.n_dofs)


def consistent_mass_matrix(mesh: QuadMesh, dofmap: DofMap) -> sp.csr_matrix:
    """
    Gauss-Legendre integrated consistent Q1 mass matrix, kept for cross-checks only.
    Its row sums equal the collocated diagonal.
    """
    element = build_reference_element("interval" if mesh.dim == 1 else "quad", 1, GAUSS_LEGENDRE)
    _, det, _ = cell_jacobians(mesh, element.quad_points)
    local = np.einsum(
        "cq,qa,qb->cab", det * element.quad_weights, element.basis_at_quad, element.basis_at_quad
    )
    return _scatter_matrix(local, dofmap)


@dataclass
class AssemblyCache:
    """Per-cell work buffers reused across reaction assemblies."""

    values_at_quad: np.ndarray
    local_vector: np.ndarray

    @classmethod
    def for_system(cls, n_cells: int, element: ReferenceElement) -> "AssemblyCache":
        n_quad = len(element.quad_points)
        return cls(np.empty((n_cells, n_quad)), np.empty((n_cells, element.n_basis)))

    def nbytes(self) -> int:
        return self.values_at_quad.nbytes + self.local_vector.nbytes


def assemble_reaction(
    state: np.ndarray,
    params: AllenCahnParams,
    mesh: QuadMesh,
    element: ReferenceElement,
    dofmap: DofMap,
    cache: AssemblyCache | None = None,
) -> np.ndarray:
    """
    Assemble F_i = integral(phi_i f(phi_h)) by collocation.

    The reaction depends on the state, so this runs on every evaluation, jacobians included.

    Args:
        state (np.ndarray): Dof values.
        params (AllenCahnParams): Model parameters.
        mesh (QuadMesh): Mesh of the domain.
        element (ReferenceElement): Collocated element.
        dofmap (DofMap): Dof map.
        cache (AssemblyCache | None): Optional reusable buffers.

    Returns:
        np.ndarray: Reaction vector, equal to M_diag * f(state) up to rounding.

    Raises:
        SizeMismatch: If the state does not match the dof map.
    """
    if state.shape != (dofmap.n_dofs,):
        raise SizeMismatch(f"state of shape {state.shape} for {dofmap.n_dofs} dofs")
    if cache is None:
        cache = AssemblyCache.for_system(mesh.n_cells, element)

    np.einsum("qa,ca->cq", element.basis_at_quad, state[dofmap.cell_dofs], out=cache.values_at_quad)
    _, det, _ = cell_jacobians(mesh, element.quad_points)
    integrand = det * element.quad_weights * ac_rhs(cache.values_at_quad, params)
    np.einsum("cq,qa->ca", integrand, element.basis_at_quad, out=cache.local_vector)

    return np.bincount(
        dofmap.cell_dofs.ravel(), weights=cache.local_vector.ravel(), minlength=dofmap.n_dofs
    )


@dataclass
class CgSystem:
    """
    Continuous Galerkin Allen-Cahn system.

    The stiffness K carries the sign of -integral(grad . grad), so the semi-discrete
    form reads M du/dt = mobility * (K phi - F(phi)), the same ODE as the finite
    difference system.
    """

    mesh: QuadMesh
    element: ReferenceElement
    dofmap: DofMap
    stiffness: sp.csr_matrix
    mass_diagonal: np.ndarray
    params: AllenCahnParams
    state: np.ndarray
    cache: AssemblyCache | None = field(default=None, repr=False)

    def __post_init__(self):
        self.state = np.asarray(self.state, dtype=float)
        if self.state.shape != (self.dofmap.n_dofs,):
            raise SizeMismatch(f"state of shape {self.state.shape} for {self.dofmap.n_dofs} dofs")
        if np.any(self.mass_diagonal <= 0):
            raise ValueError("mass diagonal entries must be positive")
        if self.cache is None:
            self.cache = AssemblyCache.for_system(self.mesh.n_cells, self.element)
        self._inverse_mass = 1.0 / self.mass_diagonal

    def rhs(self, state: np.ndarray, t: float, out: np.ndarray | None = None) -> np.ndarray:
        reaction = assemble_reaction(
            state, self.params, self.mesh, self.element, self.dofmap, self.cache
        )
        du = np.subtract(self.stiffness @ state, reaction, out=out)
        du *= self._inverse_mass
        du *= self.params.mobility
        return du

    def node_coordinates(self) -> np.ndarray:
        return self.mesh.vertices

    def quadrature_weights(self) -> np.ndarray:
        return self.mass_diagonal

    def allocated_bytes(self) -> int:
        k = self.stiffness
        element_arrays = (
            self.element.nodes, self.element.coefficients, self.element.quad_points,
            self.element.quad_weights, self.element.basis_at_quad, self.element.grad_at_quad,
        )  # fmt: skip
        return (
            k.data.nbytes
            + k.indices.nbytes
            + k.indptr.nbytes
            + self.mass_diagonal.nbytes
            + self._inverse_mass.nbytes
            + self.state.nbytes
            + self.mesh.nbytes()
            + self.dofmap.cell_dofs.nbytes
            + sum(a.nbytes for a in element_arrays)
            + self.cache.nbytes()
        )


def cg_semidiscrete_rhs(system: CgSystem, t: float, out: np.ndarray | None = None) -> np.ndarray:
    """
    Evaluate du/dt = mobility * M^-1 (K phi - F(phi)) on the system's current state.

    Args:
        system (CgSystem): The assembled system.
        t (float): Time, unused by the autonomous model.
        out (np.ndarray | None): Optional output buffer.

    Returns:
        np.ndarray: Time derivative of the state.
    """
    return system.rhs(system.state, t, out)


def build_cg_system(grid: CartesianGrid, params: AllenCahnParams, state: np.ndarray) -> CgSystem:
    """
    Triangulate a grid and assemble the collocated Q1 system on it.

    Args:
        grid (CartesianGrid): Grid whose vertices become the dofs.
        params (AllenCahnParams): Model parameters.
        state (np.ndarray): Initial dof values in grid order.

    Returns:
        CgSystem: The assembled system.
    """
    mesh = build_quad_mesh_from_grid(grid)
    element = build_reference_element("interval" if grid.dim == 1 else "quad", 1)
    dofmap = build_dof_map(mesh, element, "continuous")
    system = CgSystem(
        mesh=mesh,
        element=element,
        dofmap=dofmap,
        stiffness=assemble_stiffness(mesh, element, dofmap),
        mass_diagonal=assemble_mass_diagonal(mesh, element, dofmap),
        params=params,
        state=np.array(state, dtype=float),
    )
    logger.debug("Built continuous Galerkin system", dofs=dofmap.n_dofs, bytes=system.allocated_bytes())
    return system


def five_point_stencil_deviation(stiffness: sp.csr_matrix, grid: CartesianGrid) -> float:
    """
    Largest deviation of the interior rows of a 2D stiffness from the five-point stencil.

    Args:
        stiffness (sp.csr_matrix): Assembled operator on the grid's vertices.
        grid (CartesianGrid): The 2D grid it was assembled on, unit-free spacing.

    Returns:
        float: max |K_ij - L_ij| over rows of nodes off the boundary, L the scaled stencil.
    """
    if grid.dim != 2:
        raise ValueError("the five-point stencil is a 2D comparison")
    nx, ny = grid.counts
    hx, hy = grid.spacing

    def second_difference(n, h):
        return sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(n, n)) * (1.0 / (h * h))

    # Scaled by the cell area, the collocated Q1 rows reduce to the plain stencil
    stencil = (
        sp.kron(sp.identity(ny), second_difference(nx, hx))
        + sp.kron(second_difference(ny, hy), sp.identity(nx))
    ) * (hx * hy)

    i, j = np.meshgrid(np.arange(1, nx - 1), np.arange(1, ny - 1))
    interior = (j * nx + i).ravel()
    diff = (stiffness.tocsr()[interior] - stencil.tocsr()[interior]).tocoo()
    return float(np.max(np.abs(diff.data), initial=0.0))


def dump_operator_csv(matrix: sp.spmatrix, path: str | Path) -> Path:
    """
    Write a sparse operator as row,col,value triplets.

    Args:
        matrix (sp.spmatrix): The operator.
        path (str | Path): Output CSV file.

    Returns:
        Path: The written file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    coo = matrix.tocoo()
    np.savetxt(
        path,
        np.column_stack([coo.row, coo.col, coo.data]),
        delimiter=",",
        header="row,col,value",
        comments="",
        fmt=["%d", "%d", "%.17g"],
        encoding="utf-8",
    )
    logger.info("Wrote operator dump", path=str(path), nnz=coo.nnz)
    return path
