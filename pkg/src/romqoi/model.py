"""Discrete dynamical systems and Euler time stepping.

A model is an autonomous semi-discrete system ``x' = F(x, mu)``. One explicit
or implicit Euler step plays the role of the one-step model operator; the
implicit step is solved with a dense Newton-Raphson iteration.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import ConvergenceError, InvalidArgumentError, LinearSolveError

__all__ = [
    "DiscreteModel",
    "FunctionModel",
    "TimeGrid",
    "Trajectory",
    "NewtonSettings",
    "NewtonResult",
    "newton_solve",
    "step_explicit",
    "step_implicit",
    "integrate",
    "check_state",
]

SCHEMES = ("explicit", "implicit")


class DiscreteModel:
    """Base class for an autonomous system ``x' = F(x, mu)``.

    Subclasses set ``dim`` and ``params`` and implement :meth:`rhs` and
    :meth:`rhs_jacobian`. A model may additionally expose a split
    ``F(x) = A x + N(x)`` by setting ``linear_operator`` to the dense matrix
    ``A``; reduced models then project ``A`` exactly and hyper-reduce only
    ``N``. Without a split, ``N = F``.
    """

    dim: int
    params: np.ndarray
    linear_operator: np.ndarray | None = None

    def rhs(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def rhs_jacobian(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def nonlinear(self, x: np.ndarray) -> np.ndarray:
        """Part of ``F`` not covered by ``linear_operator``."""
        if self.linear_operator is None:
            return self.rhs(x)
        return self.rhs(x) - self.linear_operator @ x

    def nonlinear_jacobian(self, x: np.ndarray) -> np.ndarray:
        if self.linear_operator is None:
            return self.rhs_jacobian(x)
        return self.rhs_jacobian(x) - self.linear_operator


class FunctionModel(DiscreteModel):
    """Model defined by plain callables, handy for small test systems.

    Parameters
    ----------
    dim : int
        State dimension.
    rhs : callable
        ``F(x) -> (dim,) ndarray``.
    jacobian : callable
        ``dF/dx(x) -> (dim, dim) ndarray``.
    params : sequence of float, optional
        Parameter vector, stored for bookkeeping only.
    linear_operator : (dim, dim) ndarray, optional
        Linear part of ``rhs`` if it should be treated separately.
    """

    def __init__(
        self,
        dim: int,
        rhs: Callable[[np.ndarray], np.ndarray],
        jacobian: Callable[[np.ndarray], np.ndarray],
        params: Sequence[float] = (),
        linear_operator: np.ndarray | None = None,
    ):
        if int(dim) < 1:
            raise InvalidArgumentError(f"dim must be positive, got {dim}")
        self.dim = int(dim)
        self._rhs = rhs
        self._jac = jacobian
        self.params = np.asarray(params, dtype=float)
        self.linear_operator = linear_operator

    @classmethod
    def linear(cls, A) -> "FunctionModel":
        """``F(x) = A x``."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        return cls(A.shape[0], lambda x: A @ x, lambda x: A)

    @classmethod
    def zero(cls, dim: int) -> "FunctionModel":
        """``F == 0``."""
        return cls(dim, lambda x: np.zeros(dim), lambda x: np.zeros((dim, dim)))

    def rhs(self, x):
        return np.asarray(self._rhs(check_state(self, x)), dtype=float).reshape(self.dim)

    def rhs_jacobian(self, x):
        J = np.asarray(self._jac(check_state(self, x)), dtype=float)
        return J.reshape(self.dim, self.dim)


def check_state(model: DiscreteModel, x) -> np.ndarray:
    """Return ``x`` as a float vector of length ``model.dim`` or raise."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.shape != (model.dim,):
        raise InvalidArgumentError(
            f"state has shape {x.shape}, expected ({model.dim},)"
        )
    return x


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_i = i*h`` for ``i = 0..num_steps``."""

    t_final: float
    num_steps: int

    def __post_init__(self):
        if int(self.num_steps) != self.num_steps or self.num_steps < 1:
            raise InvalidArgumentError(
                f"num_steps must be a positive integer, got {self.num_steps}"
            )
        if not self.t_final > 0:
            raise InvalidArgumentError(f"t_final must be positive, got {self.t_final}")

    @property
    def h(self) -> float:
        return self.t_final / self.num_steps

    @property
    def times(self) -> np.ndarray:
        return self.h * np.arange(self.num_steps + 1)


@dataclass(frozen=True)
class NewtonSettings:
    """Stopping rule for Newton: Euclidean residual norm below ``tol``."""

    tol: float = 1e-10
    max_iter: int = 50

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidArgumentError("tol must be positive")
        if self.max_iter < 1:
            raise InvalidArgumentError("max_iter must be positive")


@dataclass
class Trajectory:
    """States ``x_0..x_Nt`` stored row-wise in an ``(Nt+1, n)`` array."""

    states: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim != 2:
            raise InvalidArgumentError("states must be a 2D array (Nt+1, n)")
        if self.states.shape[0] != self.grid.num_steps + 1:
            raise InvalidArgumentError(
                f"{self.states.shape[0]} states for {self.grid.num_steps} steps"
            )
        if not np.all(np.isfinite(self.states)):
            raise InvalidArgumentError("trajectory contains non-finite values")

    def __len__(self):
        return self.states.shape[0]

    def __getitem__(self, i):
        return self.states[i]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


class NewtonResult(NamedTuple):
    x: np.ndarray
    iterations: int
    residual_norm: float


def newton_solve(
    residual: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], np.ndarray],
    guess,
    settings: NewtonSettings = NewtonSettings(),
) -> NewtonResult:
    """Solve ``residual(y) = 0`` by Newton-Raphson with dense LU solves.

    Converged once ``||residual(y)||_2 <= settings.tol``; the starting guess is
    tested before any update, so an exact guess costs zero iterations.

    Raises
    ------
    ConvergenceError
        Tolerance not met within ``settings.max_iter`` updates.
    LinearSolveError
        Singular or non-finite Newton matrix.
    """
    y = np.array(guess, dtype=float, ndmin=1)
    r = np.asarray(residual(y), dtype=float).reshape(y.shape)
    rnorm = float(np.linalg.norm(r))
    it = 0
    while rnorm > settings.tol:
        if it >= settings.max_iter:
            raise ConvergenceError(
                f"Newton did not converge in {settings.max_iter} iterations "
                f"(residual norm {rnorm:.3e})",
                residual_norm=rnorm,
                iterations=it,
            )
        J = np.atleast_2d(np.asarray(jacobian(y), dtype=float))
        y = y - lu_solve(J, r)
        it += 1
        r = np.asarray(residual(y), dtype=float).reshape(y.shape)
        rnorm = float(np.linalg.norm(r))
        if not np.isfinite(rnorm):
            raise ConvergenceError(
                "Newton iterate diverged to non-finite values",
                residual_norm=rnorm,
                iterations=it,
            )
    return NewtonResult(y, it, rnorm)


def lu_solve(A: np.ndarray, b: np.ndarray, trans: int = 0) -> np.ndarray:
    """Solve ``A x = b`` (``trans=1``: ``A^T x = b``) by LU, raising on singularity."""
    if not np.all(np.isfinite(A)):
        raise LinearSolveError("matrix has non-finite entries")
    with np.errstate(all="ignore"), warnings.catch_warnings():
        # singularity is reported below as an exception instead
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    if np.any(np.diag(lu) == 0.0):
        raise LinearSolveError("singular matrix in LU factorization")
    return sla.lu_solve((lu, piv), b, trans=trans, check_finite=False)


def _check_finite(x):
    # explicit Euler past its stability limit overflows instead of failing
    if not np.all(np.isfinite(x)):
        raise ConvergenceError("explicit step produced non-finite values", float("nan"), 0)


def step_explicit(model: DiscreteModel, x, h: float) -> np.ndarray:
    """``x + h F(x)``."""
    x = check_state(model, x)
    if not h > 0:
        raise InvalidArgumentError("h must be positive")
    return x + h * model.rhs(x)


def step_implicit(
    model: DiscreteModel, x, h: float, settings: NewtonSettings = NewtonSettings()
) -> np.ndarray:
    """Solve ``y = x + h F(y)`` by Newton started from ``x``."""
    x = check_state(model, x)
    if not h > 0:
        raise InvalidArgumentError("h must be positive")
    eye = np.eye(model.dim)
    res = newton_solve(
        lambda y: y - x - h * model.rhs(y),
        lambda y: eye - h * model.rhs_jacobian(y),
        x,
        settings,
    )
    return res.x


def integrate(
    model: DiscreteModel,
    x0,
    grid: TimeGrid,
    scheme: str = "implicit",
    settings: NewtonSettings = NewtonSettings(),
) -> Trajectory:
    """Take ``grid.num_steps`` Euler steps from ``x0``.

    Solver failures are re-raised with ``step_index`` set to the index of
    the state being computed.
    """
    if scheme not in SCHEMES:
        raise InvalidArgumentError(f"unknown scheme {scheme!r}")
    x = check_state(model, x0)
    states = np.empty((grid.num_steps + 1, model.dim))
    states[0] = x
    h = grid.h
    for i in range(grid.num_steps):
        try:
            if scheme == "explicit":
                x = step_explicit(model, x, h)
                _check_finite(x)
            else:
                x = step_implicit(model, x, h, settings)
        except ConvergenceError as err:
            err.step_index = i + 1
            raise
        states[i + 1] = x
    return Trajectory(states, grid)
