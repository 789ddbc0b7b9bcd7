# schemeforge/solver_dg.py

# This module provides the discontinuous Galerkin semi-discretization of 2D linear advection on periodic quad meshes.

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import structlog

from schemeforge.exceptions import SizeMismatch
from schemeforge.mesh import (
    DofMap,
    QuadMesh,
    ReferenceElement,
    build_cartesian_grid,
    build_dof_map,
    build_quad_mesh_from_grid,
    build_reference_element,
    cell_jacobians,
    map_points,
)

logger = structlog.get_logger()

InitialCondition = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class AdvectionParams:
    """
    Constant-velocity advection d(alpha)/dt + u . grad(alpha) = 0 on a periodic box.

    Attributes:
        velocity: Constant 2-vector u.
        extents: Per-axis [min, max] of the box.
        end_time: Final time T.
    """

    velocity: tuple[float, float] = (1.0, 1.0)
    extents: tuple[tuple[float, float], tuple[float, float]] = ((0.0, 5.0), (0.0, 5.0))
    end_time: float = 5.0

    def __post_init__(self):
        if len(self.velocity) != 2 or not all(math.isfinite(c) for c in self.velocity):
            raise ValueError(f"velocity must be a finite 2-vector, got {self.velocity}")
        if len(self.extents) != 2 or any(not hi > lo for lo, hi in self.extents):
            raise ValueError(f"invalid extents {self.extents}")
        if not self.end_time > 0:
            raise ValueError(f"end time must be positive, got {self.end_time}")

    @property
    def lengths(self) -> tuple[float, float]:
        return tuple(hi - lo for lo, hi in self.extents)


def box_indicator(lower: float = 2.0, upper: float = 3.0) -> InitialCondition:
    """Rectangle function, one on [lower; upper]^2 and zero elsewhere."""

    def ic(x, y):
        inside = (x >= lower) & (x <= upper) & (y >= lower) & (y <= upper)
        return inside.astype(float)

    return ic


@dataclass(frozen=True, eq=False)
class FacetTrace:
    """
    Two-sided values on a batch of facets at the facet quadrature points.

    alpha_plus is taken from the owner cell, alpha_minus from the neighbor; the
    normal points out of the owner, so the neighbor sees -normal.
    """

    facets: np.ndarray
    alpha_plus: np.ndarray
    alpha_minus: np.ndarray
    normal: np.ndarray


def lax_friedrichs_flux(
    alpha_plus: np.ndarray,
    alpha_minus: np.ndarray,
    velocity: Sequence[float],
    normal: np.ndarray,
    c: float,
) -> np.ndarray:
    """
    Lax-Friedrichs numerical flux of linear advection.

    f* = {alpha} (u . n+) + C/2 [[alpha]] with {.} the two-sided average and
    [[alpha]] = alpha+ - alpha-.

    Args:
        alpha_plus (np.ndarray): Owner-side values, shape (..., n_points).
        alpha_minus (np.ndarray): Neighbor-side values, same shape.
        velocity (Sequence[float]): Advection velocity u.
        normal (np.ndarray): Owner outward normal(s), shape (2,) or (..., 2).
        c (float): Dissipation constant, at least the largest |u . n|.

    Returns:
        np.ndarray: Flux values, same shape as alpha_plus.
    """
    alpha_plus = np.asarray(alpha_plus, dtype=float)
    alpha_minus = np.asarray(alpha_minus, dtype=float)
    un = np.asarray(normal, dtype=float) @ np.asarray(velocity, dtype=float)
    un = np.reshape(un, np.shape(un) + (1,) * (alpha_plus.ndim - np.ndim(un)))
    return 0.5 * un * (alpha_plus + alpha_minus) + 0.5 * c * (alpha_plus - alpha_minus)


def flux_constant(mesh: QuadMesh, velocity: Sequence[float]) -> float:
    """Largest normal speed |u . n| over the facets of a mesh."""
    return float(np.max(np.abs(mesh.facet_normal @ np.asarray(velocity, dtype=float))))


def max_stable_dt(p: int, h: float, velocity: Sequence[float], safety: float = 1.0) -> float:
    """
    Explicit step bound dt = safety * h / ((|u_x| + |u_y|) (2p + 1)).

    Args:
        p (int): Polynomial degree.
        h (float): Cell width.
        velocity (Sequence[float]): Advection velocity.
        safety (float): Factor in (0; 1].

    Returns:
        float: Largest step allowed.

    Raises:
        ValueError: For p < 0, h <= 0, a safety outside (0; 1] or zero velocity.
    """
    if p < 0:
        raise ValueError(f"polynomial degree must be non-negative, got {p}")
    if not h > 0:
        raise ValueError(f"cell width must be positive, got {h}")
    if not 0.0 < safety <= 1.0:
        raise ValueError(f"safety must lie in (0; 1], got {safety}")
    speed = float(np.sum(np.abs(velocity)))
    if speed == 0.0:
        raise ValueError("zero velocity has no CFL bound")
    return safety * h / (speed * (2 * p + 1))


def dofs_matched_cells(reference_cells: int, reference_degree: int, p: int) -> int:
    """
    Cells per axis giving degree p the same dof count as the reference discretization.

    Raises:
        ValueError: If the counts do not divide evenly.
    """
    total = reference_cells * (reference_degree + 1)
    if total % (p + 1):
        raise ValueError(
            f"{reference_cells} cells at degree {reference_degree} have no dof-matched mesh at degree {p}"
        )
    return total // (p + 1)


@dataclass
class DgSystem:
    """
    DG advection system on a periodic mesh.

    Dofs of cell c are c * n_basis + i with i the element-local node index. Under
    collocation the mass matrix is diagonal per cell and stored as `mass` (n_cells, n_basis).
    """

    mesh: QuadMesh
    element: ReferenceElement
    dofmap: DofMap
    params: AdvectionParams
    state: np.ndarray
    mass: np.ndarray = field(init=False, repr=False)
    volume_operator: np.ndarray = field(init=False, repr=False)
    flux_c: float = field(init=False)

    def __post_init__(self):
        if self.mesh.dim != 2:
            raise ValueError("advection runs on 2D meshes only")
        if len(self.mesh.boundary_facets):
            raise ValueError("the advection mesh must be periodic")
        self.state = np.asarray(self.state, dtype=float)
        if self.state.shape != (self.dofmap.n_dofs,):
            raise SizeMismatch(f"state of shape {self.state.shape} for {self.dofmap.n_dofs} dofs")

        element, mesh = self.element, self.mesh
        u = np.asarray(self.params.velocity, dtype=float)
        _, det, inv = cell_jacobians(mesh, element.quad_points)
        weights = det * element.quad_weights
        self.mass = np.einsum("cq,qa->ca", weights, element.basis_at_quad)

        # S[c, i, q] = w_q |J| (grad phi_i . u) at quadrature point q
        if element.order > 0:
            grads = np.einsum("qbk,cqkj->cqbj", element.grad_at_quad, inv)
            self.volume_operator = np.einsum("cq,cqbj,j->cbq", weights, grads, u)
        else:
            self.volume_operator = np.empty((0, 0, 0))

        nb = element.n_basis
        owner, neighbor = mesh.facet_owner, mesh.facet_neighbor
        self._owner_dofs = owner[:, None] * nb + element.face_nodes[mesh.facet_owner_face]
        self._neighbor_dofs = neighbor[:, None] * nb + element.face_nodes[mesh.facet_neighbor_face]
        self._face_scale = mesh.facet_measures()[:, None] * element.face_weights
        self._scatter_dofs = np.concatenate([self._owner_dofs.ravel(), self._neighbor_dofs.ravel()])
        self.flux_c = flux_constant(mesh, u)

    @property
    def n_cells(self) -> int:
        return self.mesh.n_cells

    @property
    def h(self) -> float:
        """Smallest cell width."""
        return float(np.min(self.mesh.facet_measures()))

    def rhs(self, state: np.ndarray, t: float, out: np.ndarray | None = None) -> np.ndarray:
        if state.shape != (self.dofmap.n_dofs,):
            raise SizeMismatch(f"state of shape {state.shape} for {self.dofmap.n_dofs} dofs")

        flux = lax_friedrichs_flux(
            state[self._owner_dofs],
            state[self._neighbor_dofs],
            self.params.velocity,
            self.mesh.facet_normal,
            self.flux_c,
        )
        flux *= self._face_scale
        # Owner test functions see +[[v]], neighbor test functions -[[v]]
        surface = np.bincount(
            self._scatter_dofs,
            weights=np.concatenate([-flux.ravel(), flux.ravel()]),
            minlength=self.dofmap.n_dofs,
        )

        if out is None:
            du = surface
        else:
            out[...] = surface
            du = out
        if self.element.order > 0:
            cells = state.reshape(self.mass.shape)
            du += np.einsum("cbq,cq->cb", self.volume_operator, cells).ravel()
        du /= self.mass.ravel()
        return du

    def total_mass(self, state: np.ndarray | None = None) -> float:
        state = self.state if state is None else state
        return float(np.dot(self.mass.ravel(), state))

    def l2_norm(self, state: np.ndarray) -> float:
        """Mass-weighted L2 norm."""
        return math.sqrt(float(np.dot(self.mass.ravel(), state * state)))

    def node_coordinates(self) -> np.ndarray:
        return map_points(self.mesh, self.element.nodes).reshape(-1, 2)

    def quadrature_weights(self) -> np.ndarray:
        return self.mass.ravel()

    def allocated_bytes(self) -> int:
        arrays = (
            self.state, self.mass, self.volume_operator, self._owner_dofs,
            self._neighbor_dofs, self._face_scale, self._scatter_dofs, self.dofmap.cell_dofs,
        )  # fmt: skip
        return sum(a.nbytes for a in arrays) + self.mesh.nbytes()


def facet_traces(system: DgSystem, state: np.ndarray, facets: np.ndarray | None = None) -> FacetTrace:
    """
    Collect owner and neighbor values on facets.

    Args:
        system (DgSystem): The system.
        state (np.ndarray): Dof values.
        facets (np.ndarray | None): Facet ids, all facets when omitted.

    Returns:
        FacetTrace: Values of shape (n_facets, p + 1) per side.
    """
    if facets is None:
        facets = np.arange(system.mesh.n_facets)
    return FacetTrace(
        facets=facets,
        alpha_plus=state[system._owner_dofs[facets]],
        alpha_minus=state[system._neighbor_dofs[facets]],
        normal=system.mesh.facet_normal[facets],
    )


def dg_semidiscrete_rhs(system: DgSystem, t: float, out: np.ndarray | None = None) -> np.ndarray:
    """
    Evaluate the DG right-hand side on the system's current state.

    Per cell: du = M^-1 (integral((grad v . u) alpha) - sum over facets of integral(f* [[v]])).
    The volume term vanishes identically for p = 0 and is skipped.

    Args:
        system (DgSystem): The system.
        t (float): Time, unused.
        out (np.ndarray | None): Optional output buffer.

    Returns:
        np.ndarray: Time derivative of the dofs.
    """
    return system.rhs(system.state, t, out)


def project_initial_condition(ic: InitialCondition, system: DgSystem, n_sub: int = 8) -> np.ndarray:
    """
    Project an initial condition onto the discrete space.

    Degree p >= 1 interpolates at the element nodes. Degree 0 takes the cell average
    by a composite midpoint rule with n_sub x n_sub points per cell.

    Args:
        ic (InitialCondition): Function of the x and y coordinate arrays.
        system (DgSystem): Target system.
        n_sub (int): Midpoint sub-points per axis for p = 0.

    Returns:
        np.ndarray: Dof values.
    """
    if system.element.order > 0:
        points = system.node_coordinates()
        return np.asarray(ic(points[:, 0], points[:, 1]), dtype=float)

    mid = (np.arange(n_sub) + 0.5) / n_sub
    x, y = np.meshgrid(mid, mid)
    ref = np.column_stack([x.ravel(), y.ravel()])
    _, det, _ = cell_jacobians(system.mesh, ref)
    points = map_points(system.mesh, ref)
    values = np.asarray(ic(points[..., 0], points[..., 1]), dtype=float)
    return np.sum(values * det, axis=1) / np.sum(det, axis=1)


def sample_solution(
    system: DgSystem, state: np.ndarray, ref_points: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """
    Evaluate the piecewise polynomial at reference points of every cell.

    Returns:
        tuple[np.ndarray, np.ndarray]: Physical points (n_cells * n, 2) and values (n_cells * n,).
    """
    ref_points = np.atleast_2d(ref_points)
    values, _ = system.element.tabulate(ref_points)
    cells = state.reshape(system.mass.shape)
    sampled = np.einsum("na,ca->cn", values, cells)
    return map_points(system.mesh, ref_points).reshape(-1, 2), sampled.ravel()


def project_to_vertices(system: DgSystem, state: np.ndarray) -> np.ndarray:
    """
    Average the element corner values onto mesh vertices, for plotting only.
    """
    p = system.element.order
    n1 = p + 1
    corners = [0, p, n1 * n1 - 1, p * n1]  # counter-clockwise like the cell vertices
    values = state.reshape(system.mass.shape)[:, corners]
    n_vertices = len(system.mesh.vertices)
    sums = np.bincount(system.mesh.cells.ravel(), weights=values.ravel(), minlength=n_vertices)
    counts = np.bincount(system.mesh.cells.ravel(), minlength=n_vertices)
    return sums / np.maximum(counts, 1)


def fv_upwind_rhs(cells: np.ndarray, velocity: Sequence[float], h: float | Sequence[float]) -> np.ndarray:
    """
    First order upwind finite volume update of periodic cell averages.

    Args:
        cells (np.ndarray): Cell averages of shape (ny, nx).
        velocity (Sequence[float]): Advection velocity.
        h (float | Sequence[float]): Cell width, scalar or (hx, hy).

    Returns:
        np.ndarray: d(cells)/dt, same shape.
    """
    hx, hy = (h, h) if np.isscalar(h) else h
    du = np.zeros_like(cells, dtype=float)
    for axis, speed, width in ((1, velocity[0], hx), (0, velocity[1], hy)):
        if speed >= 0:
            upwind_flux = speed * cells
            du -= (upwind_flux - np.roll(upwind_flux, 1, axis=axis)) / width
        else:
            upwind_flux = speed * np.roll(cells, -1, axis=axis)
            du -= (upwind_flux - np.roll(upwind_flux, 1, axis=axis)) / width
    return du


def build_dg_system(
    n_cells: int, p: int, params: AdvectionParams, ic: InitialCondition | None = None
) -> DgSystem:
    """
    Build a periodic DG system with n_cells per axis and degree p.

    Args:
        n_cells (int): Cells per axis.
        p (int): Polynomial degree, 0 is the finite volume limit.
        params (AdvectionParams): Problem parameters.
        ic (InitialCondition | None): Projected into the initial state when given.

    Returns:
        DgSystem: The system.
    """
    if n_cells < 2:
        raise ValueError(f"need at least two cells per axis, got {n_cells}")
    grid = build_cartesian_grid(2, params.extents, [length / n_cells for length in params.lengths])
    mesh = build_quad_mesh_from_grid(grid, periodic=True)
    element = build_reference_element("quad", p)
    dofmap = build_dof_map(mesh, element, "discontinuous")
    system = DgSystem(mesh, element, dofmap, params, np.zeros(dofmap.n_dofs))
    if ic is not None:
        system.state = project_initial_condition(ic, system)

    logger.info(
        "Built discontinuous Galerkin system",
        cells=mesh.n_cells,
        degree=p,
        dofs=dofmap.n_dofs,
        flux_c=system.flux_c,
    )
    return system
