"""1D viscous Burgers equation on [0, L] with homogeneous Dirichlet ends.

Central differences on ``n`` uniform grid points; the two boundary values
are eliminated so the state holds the ``n - 2`` interior values::

    u' = -u * (D1 u) + mu * D2 u
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError
from .model import DiscreteModel, check_state

__all__ = [
    "BurgersModel",
    "build_burgers",
    "burgers_rhs",
    "burgers_jacobian",
    "initial_condition",
    "ic_polynomial",
    "DEFAULT_IC_ROOTS",
]

# Interior roots (fractions of L) of the default degree-7 initial profile.
DEFAULT_IC_ROOTS = (1.2, 1.5, 2.0)


class BurgersModel(DiscreteModel):
    """Semi-discrete Burgers model; see :func:`build_burgers`.

    Attributes
    ----------
    n_grid : int
        Grid points including both boundaries.
    dim : int
        Interior points, ``n_grid - 2``.
    dx : float
    viscosity : float
    d1, d2 : (dim, dim) ndarray
        Central first and second difference matrices with zero boundary
        values folded in.
    x : (dim,) ndarray
        Interior node coordinates.
    """

    def __init__(self, n_grid: int, length: float, viscosity: float, split_linear: bool = True):
        if int(n_grid) != n_grid or n_grid < 4:
            raise InvalidArgumentError(f"n_grid must be an integer >= 4, got {n_grid}")
        if not length > 0:
            raise InvalidArgumentError(f"length must be positive, got {length}")
        if not viscosity > 0:
            raise InvalidArgumentError(f"viscosity must be positive, got {viscosity}")
        self.n_grid = int(n_grid)
        self.length = float(length)
        self.viscosity = float(viscosity)
        self.dim = self.n_grid - 2
        self.dx = self.length / (self.n_grid - 1)
        self.params = np.array([self.viscosity])
        self.x = self.dx * np.arange(1, self.n_grid - 1)

        ones = np.ones(self.dim - 1)
        self.d1 = (np.diag(ones, 1) - np.diag(ones, -1)) / (2.0 * self.dx)
        self.d2 = (
            np.diag(ones, 1) - 2.0 * np.eye(self.dim) + np.diag(ones, -1)
        ) / self.dx**2
        self.diffusion = self.viscosity * self.d2
        self.split_linear = bool(split_linear)
        self.linear_operator = self.diffusion if self.split_linear else None

    def __repr__(self):
        return (
            f"BurgersModel(n_grid={self.n_grid}, length={self.length}, "
            f"viscosity={self.viscosity})"
        )

    def with_viscosity(self, viscosity: float) -> "BurgersModel":
        return BurgersModel(self.n_grid, self.length, viscosity, self.split_linear)

    def advection(self, u):
        u = check_state(self, u)
        return -u * (self.d1 @ u)

    def advection_jacobian(self, u):
        u = check_state(self, u)
        return -np.diag(self.d1 @ u) - u[:, None] * self.d1

    def rhs(self, u):
        return self.advection(u) + self.diffusion @ u

    def rhs_jacobian(self, u):
        return self.advection_jacobian(u) + self.diffusion

    def nonlinear(self, u):
        return self.advection(u) if self.split_linear else self.rhs(u)

    def nonlinear_jacobian(self, u):
        return self.advection_jacobian(u) if self.split_linear else self.rhs_jacobian(u)

    def indices_in(self, lo: float, hi: float, atol: float = 1e-12) -> np.ndarray:
        """State indices whose node coordinate lies in ``[lo, hi]``."""
        mask = (self.x >= lo - atol) & (self.x <= hi + atol)
        return np.flatnonzero(mask)


def build_burgers(
    n_grid: int = 201, length: float = 1.0, viscosity: float = 0.1, split_linear: bool = True
) -> BurgersModel:
    """Assemble the Burgers model.

    With ``split_linear`` (default) the diffusion term is exposed as the
    model's linear operator, so reduced models project it exactly and apply
    DEIM to the advection term only. Otherwise DEIM sees the whole
    right-hand side.
    """
    return BurgersModel(n_grid, length, viscosity, split_linear)


def burgers_rhs(model: BurgersModel, u) -> np.ndarray:
    return model.rhs(u)


def burgers_jacobian(model: BurgersModel, u) -> np.ndarray:
    return model.rhs_jacobian(u)


def ic_polynomial(xi, coeff: float, roots=DEFAULT_IC_ROOTS) -> np.ndarray:
    """``coeff * xi^2 (1-xi)^2 (xi-r1)(xi-r2)(xi-r3)`` on the unit interval."""
    xi = np.asarray(xi, dtype=float)
    if len(roots) != 3:
        raise InvalidArgumentError("exactly three interior roots are required")
    p = coeff * xi**2 * (1.0 - xi) ** 2
    for r in roots:
        p = p * (xi - r)
    return p


def _normalizing_coeff(roots) -> float:
    # Scale so max |p| = 1 on [0, 1] and p > 0 just right of 0.
    xi = np.linspace(0.0, 1.0, 20001)
    p = ic_polynomial(xi, 1.0, roots)
    scale = np.max(np.abs(p))
    sign = -1.0 if np.prod(roots) > 0 else 1.0
    return sign / scale


def initial_condition(
    model: BurgersModel, coeff: float | None = None, roots=DEFAULT_IC_ROOTS
) -> np.ndarray:
    """Degree-7 initial velocity sampled at the interior nodes.

    Parameters
    ----------
    model : BurgersModel
    coeff : float, optional
        Leading coefficient. By default it is chosen so that the profile has
        unit maximum magnitude and is positive near ``x = 0``.
    roots : triple of float
        Interior roots as fractions of the domain length.
    """
    if coeff is None:
        coeff = _normalizing_coeff(roots)
    return ic_polynomial(model.x / model.length, coeff, roots)
