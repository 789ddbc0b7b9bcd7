# schemeforge/solver_fd.py

# This module provides the matrix-free finite difference semi-discretization of the Allen-Cahn equation.

from dataclasses import dataclass

import numpy as np
import structlog
from scipy.linalg import solve_banded

from schemeforge.exceptions import SizeMismatch
from schemeforge.mesh import CartesianGrid
from schemeforge.time_integrator import StageSolve

logger = structlog.get_logger()


@dataclass(frozen=True)
class AllenCahnParams:
    """
    Allen-Cahn model parameters.

    Attributes:
        gamma: Interface energy.
        xi: Interface width.
        mobility: Kinetic mobility M.
        mu0: Bulk energy density differential driving the front.
        x0: Initial interface position of the planar front (1D).
        h: Grid spacing.
    """

    gamma: float
    xi: float
    mobility: float
    mu0: float
    x0: float | None = None
    h: float = 1.0

    def __post_init__(self):
        if not self.xi > 0:
            raise ValueError(f"xi must be positive, got {self.xi}")
        if not self.mobility > 0:
            raise ValueError(f"mobility must be positive, got {self.mobility}")
        if not self.h > 0:
            raise ValueError(f"h must be positive, got {self.h}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


# Parameter sets of the planar front (1D) and the vanishing grain (2D)
PLANAR_FRONT = AllenCahnParams(gamma=1.0, xi=1.5, mobility=1.0, mu0=0.1, x0=20.0, h=1.0)
VANISHING_GRAIN = AllenCahnParams(gamma=50.0, xi=4.0, mobility=1.0, mu0=0.0, h=1.0)


def ac_rhs(phi: np.ndarray, params: AllenCahnParams) -> np.ndarray:
    """
    Pointwise reaction term f(phi) of dphi/dt = M (laplace(phi) - f(phi)).

    The double-well part (2/xi^2) g'(phi) holds the diffuse profile together; the driving
    part (mu0 / (3 gamma xi)) h'(phi) enters with the sign that grows the phi = 1 phase for
    mu0 > 0, so the front travels with velocity M mu0 / gamma.

    Args:
        phi (np.ndarray): Phase field values.
        params (AllenCahnParams): Model parameters.

    Returns:
        np.ndarray: f(phi), same shape as phi.
    """
    phi = np.asarray(phi, dtype=float)
    bulk = phi * (1.0 - phi)
    double_well = (2.0 / params.xi**2) * 2.0 * bulk * (1.0 - 2.0 * phi)
    driving = (params.mu0 / (3.0 * params.gamma * params.xi)) * 6.0 * bulk
    return double_well - driving


def ac_rhs_derivative(phi: np.ndarray, params: AllenCahnParams) -> np.ndarray:
    """Pointwise derivative f'(phi) of the reaction term."""
    phi = np.asarray(phi, dtype=float)
    double_well = (2.0 / params.xi**2) * 2.0 * (1.0 - 6.0 * phi + 6.0 * phi * phi)
    driving = (params.mu0 / (3.0 * params.gamma * params.xi)) * 6.0 * (1.0 - 2.0 * phi)
    return double_well - driving


def fd_laplacian_apply(
    state: np.ndarray, grid: CartesianGrid, out: np.ndarray | None = None
) -> np.ndarray:
    """
    Apply the second order central Laplacian with zero-flux boundaries.

    Boundary nodes use mirror ghosts u[-1] = u[1], which doubles the inward neighbor.

    Args:
        state (np.ndarray): Flat nodal values in grid order.
        grid (CartesianGrid): The grid.
        out (np.ndarray | None): Optional caller-owned output buffer.

    Returns:
        np.ndarray: Flat Laplacian values.

    Raises:
        SizeMismatch: If state or out do not match the grid.
    """
    if state.shape != (grid.n_points,):
        raise SizeMismatch(f"state of shape {state.shape} on a grid of {grid.n_points} points")
    if out is None:
        out = np.empty_like(state)
    elif out.shape != state.shape:
        raise SizeMismatch(f"output buffer of shape {out.shape}, expected {state.shape}")

    u = state.reshape(grid.shape)
    lap = out.reshape(grid.shape)
    lap[...] = 0.0

    # One second difference per axis; the last array axis is x
    for k, h in enumerate(grid.spacing):
        axis = u.ndim - 1 - k
        inv_h2 = 1.0 / (h * h)
        um = np.moveaxis(u, axis, 0)
        lm = np.moveaxis(lap, axis, 0)
        lm[1:-1] += (um[:-2] - 2.0 * um[1:-1] + um[2:]) * inv_h2
        lm[0] += 2.0 * (um[1] - um[0]) * inv_h2
        lm[-1] += 2.0 * (um[-2] - um[-1]) * inv_h2

    return out


@dataclass
class FdSystem:
    """
    Finite difference Allen-Cahn system: grid, parameters and nodal state.

    No matrix is stored; the only persistent problem-sized array is the state.
    """

    grid: CartesianGrid
    params: AllenCahnParams
    state: np.ndarray

    def __post_init__(self):
        self.state = np.asarray(self.state, dtype=float)
        if self.state.shape != (self.grid.n_points,):
            raise SizeMismatch(
                f"state of shape {self.state.shape} on a grid of {self.grid.n_points} points"
            )
        if min(self.grid.counts) < 2:
            raise SizeMismatch("the stencil needs at least two points per axis")

    def rhs(self, state: np.ndarray, t: float, out: np.ndarray | None = None) -> np.ndarray:
        du = fd_laplacian_apply(state, self.grid, out)
        du -= ac_rhs(state, self.params)
        du *= self.params.mobility
        return du

    def stage_solver(self) -> StageSolve | None:
        """
        Direct solver for the Newton corrections of implicit stages.

        On a line the stage matrix I - shift * M (L - diag f'(y)) is tridiagonal, mirror rows
        included, and goes to a banded LU. Returns None in higher dimensions.
        """
        if self.grid.dim != 1:
            return None
        n = self.grid.n_points
        inv_h2 = 1.0 / self.grid.spacing[0] ** 2
        params = self.params

        def solve(y: np.ndarray, t: float, shift: float, r: np.ndarray) -> np.ndarray:
            coupling = shift * params.mobility * inv_h2
            bands = np.zeros((3, n))
            bands[0, 1:] = -coupling
            bands[0, 1] = -2.0 * coupling
            bands[1] = 1.0 + shift * params.mobility * (2.0 * inv_h2 + ac_rhs_derivative(y, params))
            bands[2, :-1] = -coupling
            bands[2, -2] = -2.0 * coupling
            return solve_banded((1, 1), bands, r, check_finite=False)

        return solve

    def node_coordinates(self) -> np.ndarray:
        return self.grid.node_coordinates()

    def quadrature_weights(self) -> np.ndarray:
        return self.grid.quadrature_weights()

    def allocated_bytes(self) -> int:
        return self.state.nbytes


def fd_semidiscrete_rhs(system: FdSystem, t: float, out: np.ndarray | None = None) -> np.ndarray:
    """
    Evaluate du/dt = M (laplace(phi) - f(phi)) on the system's current state.

    Args:
        system (FdSystem): The system.
        t (float): Time, unused by the autonomous model.
        out (np.ndarray | None): Optional caller-owned output buffer.

    Returns:
        np.ndarray: Time derivative of the state.
    """
    return system.rhs(system.state, t, out)


def planar_front(x: np.ndarray, params: AllenCahnParams, t: float = 0.0) -> np.ndarray:
    """Diffuse planar front, phi = 1 left of x0 + M mu0 t / gamma."""
    centre = params.x0 + params.mobility * params.mu0 * t / params.gamma
    return 0.5 * (1.0 - np.tanh((np.asarray(x) - centre) / params.xi))


def quarter_grain(points: np.ndarray, radius: float, params: AllenCahnParams) -> np.ndarray:
    """Diffuse disc of the given radius centred at the origin."""
    r = np.linalg.norm(np.atleast_2d(points), axis=1)
    return 0.5 * (1.0 - np.tanh((r - radius) / params.xi))


def build_fd_system(grid: CartesianGrid, params: AllenCahnParams, state: np.ndarray) -> FdSystem:
    system = FdSystem(grid, params, np.array(state, dtype=float))
    logger.debug(
        "Built finite difference system",
        points=grid.n_points,
        xi_over_h=params.xi / min(grid.spacing),
        bytes=system.allocated_bytes(),
    )
    return system


def front_velocity(params: AllenCahnParams) -> float:
    """Sharp-interface velocity of the planar front."""
    return params.mobility * params.mu0 / params.gamma


def vanishing_time(radius: float, params: AllenCahnParams) -> float:
    """Time at which a grain of the given radius disappears under curvature flow."""
    return radius**2 / (2.0 * params.mobility)
