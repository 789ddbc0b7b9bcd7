# schemeforge/mesh.py

# This module provides cartesian point grids, structured quadrilateral meshes, reference elements and dof maps.

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import structlog
from numpy.polynomial import legendre

from schemeforge.exceptions import NonDivisibleExtent, SingularJacobian, UnsupportedOrder

logger = structlog.get_logger()

MAX_ORDER = 8
COLLOCATION = "gauss_lobatto_collocation"
GAUSS_LEGENDRE = "gauss_legendre"

# Local faces of the reference cell [0;1]^d
FACE_NAMES = ("left", "right", "bottom", "top")
FACE_NORMALS = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]])


@dataclass(frozen=True, eq=False)
class CartesianGrid:
    """
    Equispaced vertex grid. Flat index of vertex (i, j) is j * nx + i.
    """

    dim: int
    extents: tuple[tuple[float, float], ...]
    spacing: tuple[float, ...]
    counts: tuple[int, ...]

    @property
    def n_points(self) -> int:
        return math.prod(self.counts)

    @property
    def shape(self) -> tuple[int, ...]:
        """Array shape of a reshaped state, slowest axis first."""
        return tuple(reversed(self.counts))

    @property
    def measure(self) -> float:
        return math.prod(hi - lo for lo, hi in self.extents)

    def axis_coordinates(self, axis: int) -> np.ndarray:
        lo = self.extents[axis][0]
        return lo + self.spacing[axis] * np.arange(self.counts[axis])

    def node_coordinates(self) -> np.ndarray:
        """Vertex coordinates, shape (n_points, dim), in flat-index order."""
        if self.dim == 1:
            return self.axis_coordinates(0)[:, None]
        x, y = np.meshgrid(self.axis_coordinates(0), self.axis_coordinates(1))
        return np.column_stack([x.ravel(), y.ravel()])

    def quadrature_weights(self) -> np.ndarray:
        """Tensor trapezoid weights; identical to the collocated Q1 mass diagonal."""
        per_axis = []
        for h, n in zip(self.spacing, self.counts):
            w = np.full(n, h)
            w[0] = w[-1] = 0.5 * h
            per_axis.append(w)
        if self.dim == 1:
            return per_axis[0]
        return np.outer(per_axis[1], per_axis[0]).ravel()


def build_cartesian_grid(
    dim: int, extents: Sequence[Sequence[float]], h: float | Sequence[float]
) -> CartesianGrid:
    """
    Build an equispaced grid over a box.

    Args:
        dim (int): Spatial dimension, 1 or 2.
        extents (Sequence[Sequence[float]]): Per-axis [min, max].
        h (float | Sequence[float]): Spacing, scalar or per axis.

    Returns:
        CartesianGrid: Grid with extent/h + 1 vertices per axis.

    Raises:
        ValueError: If dim, extents or h are invalid.
        NonDivisibleExtent: If h does not divide an extent.
    """
    if dim not in (1, 2):
        raise ValueError(f"grids are 1D or 2D, got dim={dim}")
    if len(extents) != dim:
        raise ValueError(f"expected {dim} extents, got {len(extents)}")

    spacing = tuple(float(s) for s in (h if isinstance(h, Sequence) else [h] * dim))
    if len(spacing) != dim or any(s <= 0 for s in spacing):
        raise ValueError(f"invalid spacing {h}")

    counts = []
    for (lo, hi), s in zip(extents, spacing):
        cells = (hi - lo) / s
        n = round(cells)
        if n < 1 or abs(cells - n) > 1e-9 * max(1.0, cells):
            raise NonDivisibleExtent(f"spacing {s} does not divide extent [{lo};{hi}]")
        counts.append(n + 1)

    grid = CartesianGrid(
        dim,
        tuple((float(lo), float(hi)) for lo, hi in extents),
        spacing,
        tuple(counts),
    )
    logger.debug("Built cartesian grid", dim=dim, counts=grid.counts, spacing=spacing)
    return grid


@dataclass(frozen=True, eq=False)
class QuadMesh:
    """
    Structured mesh of intervals (1D) or quadrilaterals (2D).

    Cell vertices run counter-clockwise. Each facet is stored once with an owner
    ("+") side, an outward unit normal from the owner and, on interior facets, the
    neighbor cell. Boundary facets carry neighbor -1 and a side tag.
    """

    dim: int
    vertices: np.ndarray
    cells: np.ndarray
    cells_per_axis: tuple[int, ...]
    facet_owner: np.ndarray
    facet_neighbor: np.ndarray
    facet_owner_face: np.ndarray
    facet_neighbor_face: np.ndarray
    facet_normal: np.ndarray
    facet_tag: np.ndarray
    facet_vertices: np.ndarray
    periodic: bool = False

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def n_facets(self) -> int:
        return len(self.facet_owner)

    @property
    def interior_facets(self) -> np.ndarray:
        return np.flatnonzero(self.facet_neighbor >= 0)

    @property
    def boundary_facets(self) -> np.ndarray:
        return np.flatnonzero(self.facet_neighbor < 0)

    def facet_measures(self) -> np.ndarray:
        if self.dim == 1:
            return np.ones(self.n_facets)
        a = self.vertices[self.facet_vertices[:, 0]]
        b = self.vertices[self.facet_vertices[:, 1]]
        return np.linalg.norm(b - a, axis=1)

    def cell_measures(self) -> np.ndarray:
        points, weights = _gauss_legendre(2, self.dim)
        _, det, _ = cell_jacobians(self, points)
        return det @ weights

    def nbytes(self) -> int:
        arrays = (
            self.vertices, self.cells, self.facet_owner, self.facet_neighbor,
            self.facet_owner_face, self.facet_neighbor_face, self.facet_normal,
            self.facet_tag, self.facet_vertices,
        )  # fmt: skip
        return sum(a.nbytes for a in arrays)


def _facets_along(n_faces: int, n_cells: int, periodic: bool):
    """
    Facet positions 0..n_faces-1 along one axis with (left cell, right cell) per position.
    Left/right is -1 outside the mesh. Periodic meshes drop position 0 and wrap the last.
    """
    positions = np.arange(1 if periodic else 0, n_faces)
    left = positions - 1
    right = np.where(positions < n_cells, positions, 0 if periodic else -1)
    return positions, left, right


def build_quad_mesh_from_grid(g: CartesianGrid, periodic: bool = False) -> QuadMesh:
    """
    Triangulate a cartesian grid with one cell per grid box.

    Args:
        g (CartesianGrid): The grid whose vertices become mesh vertices.
        periodic (bool): Pair left with right and bottom with top instead of tagging boundaries.

    Returns:
        QuadMesh: Mesh with connectivity and facet data.
    """
    vertices = g.node_coordinates()
    cells_per_axis = tuple(n - 1 for n in g.counts)

    owner, neighbor, owner_face, neighbor_face, normal, tag, fverts = ([] for _ in range(7))

    def add(own, nbr, own_face, nbr_face, nrm, tags, verts):
        owner.append(own)
        neighbor.append(nbr)
        owner_face.append(own_face)
        neighbor_face.append(nbr_face)
        normal.append(nrm)
        tag.append(tags)
        fverts.append(verts)

    if g.dim == 1:
        nx = cells_per_axis[0]
        cells = np.column_stack([np.arange(nx), np.arange(1, nx + 1)])
        pos, left, right = _facets_along(nx + 1, nx, periodic)
        _add_axis_facets(add, pos, left, right, lambda c: c, 0, 1, np.array([[-1.0], [1.0]]),
                         ("left", "right"), pos[:, None])  # fmt: skip
    else:
        nx, ny = cells_per_axis
        vx = nx + 1

        def vid(i, j):
            return j * vx + i

        ii, jj = np.meshgrid(np.arange(nx), np.arange(ny))
        ii, jj = ii.ravel(), jj.ravel()
        cells = np.column_stack([vid(ii, jj), vid(ii + 1, jj), vid(ii + 1, jj + 1), vid(ii, jj + 1)])

        # Vertical facets, normal along x
        pos, left, right = _facets_along(nx + 1, nx, periodic)
        for j in range(ny):
            _add_axis_facets(
                add, pos, left, right, lambda c, j=j: np.where(c >= 0, j * nx + c, -1),
                0, 1, FACE_NORMALS[:2], ("left", "right"),
                np.column_stack([vid(pos, j), vid(pos, j + 1)]),
            )  # fmt: skip

        # Horizontal facets, normal along y
        pos, below, above = _facets_along(ny + 1, ny, periodic)
        for i in range(nx):
            _add_axis_facets(
                add, pos, below, above, lambda c, i=i: np.where(c >= 0, c * nx + i, -1),
                2, 3, FACE_NORMALS[2:], ("bottom", "top"),
                np.column_stack([vid(i, pos), vid(i + 1, pos)]),
            )  # fmt: skip

    mesh = QuadMesh(
        dim=g.dim,
        vertices=vertices,
        cells=cells.astype(np.int64),
        cells_per_axis=cells_per_axis,
        facet_owner=np.concatenate(owner).astype(np.int64),
        facet_neighbor=np.concatenate(neighbor).astype(np.int64),
        facet_owner_face=np.concatenate(owner_face).astype(np.int64),
        facet_neighbor_face=np.concatenate(neighbor_face).astype(np.int64),
        facet_normal=np.concatenate(normal),
        facet_tag=np.concatenate(tag),
        facet_vertices=np.concatenate(fverts).astype(np.int64),
        periodic=periodic,
    )
    logger.debug(
        "Built quad mesh",
        cells=mesh.n_cells,
        vertices=len(vertices),
        facets=mesh.n_facets,
        periodic=periodic,
    )
    return mesh


def _add_axis_facets(add, pos, left, right, to_cell, low_face, high_face, normals, names, verts):
    """
    Append the facets of one grid line. Interior facets are owned by the lower cell;
    boundary facets by the only incident cell with the normal pointing out of the mesh.
    """
    n = len(pos)
    lower, upper = to_cell(left), to_cell(right)
    interior = (lower >= 0) & (upper >= 0)
    at_low = lower < 0

    own = np.where(at_low, upper, lower)
    nbr = np.where(interior, upper, -1)
    own_face = np.where(at_low, low_face, high_face)
    nbr_face = np.where(interior, low_face, -1)
    nrm = np.where(at_low[:, None], normals[0], normals[1])
    tags = np.where(interior, "", np.where(at_low, names[0], names[1])).astype("<U6")

    add(own, nbr, own_face, nbr_face, nrm.reshape(n, -1), tags, verts)


def _q1_shape_gradients(points: np.ndarray, dim: int) -> np.ndarray:
    """Gradients of the Q1 geometry map basis in counter-clockwise vertex order."""
    if dim == 1:
        return np.tile(np.array([[-1.0], [1.0]]), (len(points), 1, 1))
    xi, eta = points[:, 0], points[:, 1]
    d_xi = np.column_stack([-(1 - eta), 1 - eta, eta, -eta])
    d_eta = np.column_stack([-(1 - xi), -xi, xi, 1 - xi])
    return np.stack([d_xi, d_eta], axis=-1)


def _q1_shape_values(points: np.ndarray, dim: int) -> np.ndarray:
    if dim == 1:
        return np.column_stack([1 - points[:, 0], points[:, 0]])
    xi, eta = points[:, 0], points[:, 1]
    return np.column_stack([(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta])


def map_points(mesh: QuadMesh, ref_points: np.ndarray) -> np.ndarray:
    """
    Map reference points into every cell.

    Returns:
        np.ndarray: Physical coordinates, shape (n_cells, n_points, dim).
    """
    shape = _q1_shape_values(ref_points, mesh.dim)
    return np.einsum("qa,cai->cqi", shape, mesh.vertices[mesh.cells])


def cell_jacobians(mesh: QuadMesh, ref_points: np.ndarray):
    """
    Evaluate the geometry jacobian of every cell at the given reference points.

    Args:
        mesh (QuadMesh): The mesh.
        ref_points (np.ndarray): Reference points, shape (n_points, dim).

    Returns:
        tuple[np.ndarray, np.ndarray, np.ndarray]: J (cells, points, dim, dim), det J
        (cells, points) and J^-1 (cells, points, dim, dim).

    Raises:
        SingularJacobian: If any determinant is not positive.
    """
    grads = _q1_shape_gradients(ref_points, mesh.dim)
    jac = np.einsum("cai,qak->cqik", mesh.vertices[mesh.cells], grads)
    det = np.linalg.det(jac)
    if np.any(det <= 0.0):
        bad = int(np.argwhere(det <= 0.0)[0, 0])
        raise SingularJacobian(f"cell {bad} has a non-positive jacobian determinant")
    return jac, det, np.linalg.inv(jac)


def _gauss_lobatto_1d(p: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Lobatto nodes and weights on [0;1] with p + 1 points."""
    lp = legendre.Legendre.basis(p)
    interior = np.sort(lp.deriv().roots().real) if p > 1 else np.array([])
    x = np.concatenate([[-1.0], interior, [1.0]])
    w = 2.0 / (p * (p + 1) * lp(x) ** 2)
    return 0.5 * (x + 1.0), 0.5 * w


def _gauss_legendre_1d(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _tensor(points_1d: np.ndarray, weights_1d: np.ndarray, dim: int):
    if dim == 1:
        return points_1d[:, None], weights_1d.copy()
    x, y = np.meshgrid(points_1d, points_1d)
    return np.column_stack([x.ravel(), y.ravel()]), np.outer(weights_1d, weights_1d).ravel()


def _gauss_legendre(n: int, dim: int):
    return _tensor(*_gauss_legendre_1d(n), dim)


@dataclass(frozen=True, eq=False)
class ReferenceElement:
    """
    Tensor-product Lagrange element on the reference cell [0;1]^d.

    Node (a, b) of a quad has local index b * (p + 1) + a. Basis polynomials are
    stored as monomial coefficients of the 1D Lagrange factors.
    """

    primitive: str
    order: int
    quadrature: str
    nodes: np.ndarray
    coefficients: np.ndarray
    quad_points: np.ndarray
    quad_weights: np.ndarray
    basis_at_quad: np.ndarray
    grad_at_quad: np.ndarray
    face_nodes: np.ndarray
    face_weights: np.ndarray

    @property
    def dim(self) -> int:
        return 1 if self.primitive == "interval" else 2

    @property
    def n_basis(self) -> int:
        return len(self.nodes)

    def tabulate(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """
        Evaluate basis values and reference gradients at arbitrary points.

        Args:
            points (np.ndarray): Reference points, shape (n, dim).

        Returns:
            tuple[np.ndarray, np.ndarray]: Values (n, n_basis) and gradients (n, n_basis, dim).
        """
        points = np.atleast_2d(points)
        powers = np.arange(self.order + 1)

        def factors(x):
            mono = x[:, None] ** powers
            dmono = np.zeros_like(mono)
            dmono[:, 1:] = powers[1:] * x[:, None] ** (powers[1:] - 1)
            return mono @ self.coefficients, dmono @ self.coefficients

        lx, dlx = factors(points[:, 0])
        if self.dim == 1:
            return lx, dlx[:, :, None]

        ly, dly = factors(points[:, 1])
        n = len(points)
        values = np.einsum("na,nb->nba", lx, ly).reshape(n, -1)
        dx = np.einsum("na,nb->nba", dlx, ly).reshape(n, -1)
        dy = np.einsum("na,nb->nba", lx, dly).reshape(n, -1)
        return values, np.stack([dx, dy], axis=-1)


def build_reference_element(
    primitive: str, p: int, quadrature: str = COLLOCATION
) -> ReferenceElement:
    """
    Build a Lagrange reference element with tabulated basis data.

    Args:
        primitive (str): "interval" or "quad".
        p (int): Polynomial order per axis.
        quadrature (str): "gauss_lobatto_collocation" (nodes double as quadrature points)
            or "gauss_legendre" (p + 1 points per axis, for cross-checks).

    Returns:
        ReferenceElement: The element.

    Raises:
        UnsupportedOrder: If p is negative or above 8.
        ValueError: For an unknown primitive or quadrature.
    """
    if primitive not in ("interval", "quad"):
        raise ValueError(f"unknown primitive '{primitive}'")
    if quadrature not in (COLLOCATION, GAUSS_LEGENDRE):
        raise ValueError(f"unknown quadrature '{quadrature}'")
    if p < 0 or p > MAX_ORDER:
        raise UnsupportedOrder(f"polynomial order {p} outside 0..{MAX_ORDER}")

    dim = 1 if primitive == "interval" else 2

    if p == 0:
        nodes_1d, lobatto_w = np.array([0.5]), np.array([1.0])
    else:
        nodes_1d, lobatto_w = _gauss_lobatto_1d(p)
    vandermonde = nodes_1d[:, None] ** np.arange(p + 1)
    coefficients = np.linalg.inv(vandermonde)

    nodes, _ = _tensor(nodes_1d, lobatto_w, dim)
    if quadrature == COLLOCATION:
        quad_points, quad_weights = _tensor(nodes_1d, lobatto_w, dim)
    else:
        quad_points, quad_weights = _gauss_legendre(p + 1, dim)

    # Node indices on each local face, ordered along the face
    k = np.arange(p + 1)
    if dim == 1:
        face_nodes = np.array([[0], [p]])
        face_weights = np.array([1.0])
    else:
        n1 = p + 1
        face_nodes = np.array([k * n1, k * n1 + p, k, p * n1 + k])
        face_weights = lobatto_w

    element = ReferenceElement(
        primitive=primitive,
        order=p,
        quadrature=quadrature,
        nodes=nodes,
        coefficients=coefficients,
        quad_points=quad_points,
        quad_weights=quad_weights,
        basis_at_quad=np.empty(0),
        grad_at_quad=np.empty(0),
        face_nodes=face_nodes,
        face_weights=face_weights,
    )
    values, grads = element.tabulate(quad_points)
    object.__setattr__(element, "basis_at_quad", values)
    object.__setattr__(element, "grad_at_quad", grads)
    return element


@dataclass(frozen=True, eq=False)
class DofMap:
    mode: str
    cell_dofs: np.ndarray
    n_dofs: int


def build_dof_map(mesh: QuadMesh, element: ReferenceElement, mode: str) -> DofMap:
    """
    Number the degrees of freedom of a mesh.

    Args:
        mesh (QuadMesh): The mesh.
        element (ReferenceElement): Element providing the local node layout.
        mode (str): "continuous" (shared vertex dofs, Q1 only) or "discontinuous".

    Returns:
        DofMap: Cell to global dof indices in element-local node order.

    Raises:
        UnsupportedOrder: For continuous maps of order other than 1.
        ValueError: For an unknown mode or a continuous map on a periodic mesh.
    """
    if mode == "discontinuous":
        nb = element.n_basis
        return DofMap(mode, np.arange(mesh.n_cells * nb).reshape(mesh.n_cells, nb), mesh.n_cells * nb)

    if mode != "continuous":
        raise ValueError(f"unknown dof map mode '{mode}'")
    if element.order != 1:
        raise UnsupportedOrder("continuous dof maps support order 1 only")
    if mesh.periodic:
        raise ValueError("continuous dof maps need a non-periodic mesh")

    # Lexicographic element nodes against counter-clockwise cell vertices
    local_to_vertex = [0, 1] if mesh.dim == 1 else [0, 1, 3, 2]
    return DofMap(mode, mesh.cells[:, local_to_vertex], len(mesh.vertices))


def dump_mesh_csv(mesh: QuadMesh, directory: str | Path) -> list[Path]:
    """
    Write vertices.csv and cells.csv for external plotting.

    Args:
        mesh (QuadMesh): The mesh.
        directory (str | Path): Output directory, created if missing.

    Returns:
        list[Path]: The written files.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    axes = ["x", "y"][: mesh.dim]

    vertices_path = directory / "vertices.csv"
    np.savetxt(
        vertices_path,
        np.column_stack([np.arange(len(mesh.vertices)), mesh.vertices]),
        delimiter=",",
        header=",".join(["id", *axes]),
        comments="",
        fmt=["%d"] + ["%.17g"] * mesh.dim,
        encoding="utf-8",
    )

    cells_path = directory / "cells.csv"
    corners = mesh.cells.shape[1]
    np.savetxt(
        cells_path,
        np.column_stack([np.arange(mesh.n_cells), mesh.cells]),
        delimiter=",",
        header=",".join(["id", *(f"v{k}" for k in range(corners))]),
        comments="",
        fmt="%d",
        encoding="utf-8",
    )
    logger.info("Wrote mesh dump", directory=str(directory), cells=mesh.n_cells)
    return [vertices_path, cells_path]
