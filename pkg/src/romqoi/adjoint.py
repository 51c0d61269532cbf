"""Quantities of interest and discrete adjoints of the Euler schemes.

For ``Q(x_0) = sum_i r_i(x_i)`` along a trajectory, the multipliers satisfy
``lambda_Nt = -dr_Nt/dx`` and run backward through the transposed tangent
of one time step; the gradient of ``Q`` with respect to ``x_0`` is
``-lambda_0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidArgumentError
from .model import SCHEMES, DiscreteModel, Trajectory, lu_solve
from .rom import ReducedModel

__all__ = [
    "QuantityOfInterest",
    "AdjointTrajectory",
    "terminal_qoi",
    "zero_qoi",
    "burgers_qoi",
    "qoi_eval",
    "full_adjoint",
    "full_adjoint_explicit",
    "full_adjoint_implicit",
    "reduced_adjoint",
    "qoi_gradient",
]


@dataclass(frozen=True)
class QuantityOfInterest:
    """``Q = sum_{i=0}^{Nt} r_i(x_i)``.

    Attributes
    ----------
    num_steps : int
        ``Nt``; the QoI consumes ``Nt + 1`` states.
    term : callable
        ``term(i, x) -> float``, the value of ``r_i``.
    gradient : callable
        ``gradient(i, x) -> ndarray``, the gradient of ``r_i`` in ``x``.
    index_set : ndarray, optional
        Support of the QoI for region-restricted functionals.
    """

    num_steps: int
    term: Callable[[int, np.ndarray], float]
    gradient: Callable[[int, np.ndarray], np.ndarray]
    index_set: np.ndarray | None = None

    def scaled(self, c: float) -> "QuantityOfInterest":
        return QuantityOfInterest(
            self.num_steps,
            lambda i, x: c * self.term(i, x),
            lambda i, x: c * self.gradient(i, x),
            self.index_set,
        )

    def shifted(self, start: int) -> "QuantityOfInterest":
        """Tail ``sum_{i>=start} r_i`` re-indexed to begin at 0."""
        if not 0 <= start <= self.num_steps:
            raise InvalidArgumentError("start outside the time grid")
        return QuantityOfInterest(
            self.num_steps - start,
            lambda i, x: self.term(i + start, x),
            lambda i, x: self.gradient(i + start, x),
            self.index_set,
        )


def terminal_qoi(num_steps: int, fn, grad, index_set=None) -> QuantityOfInterest:
    """QoI that only looks at the final state: ``r_Nt = fn``, other ``r_i = 0``."""

    def term(i, x):
        return float(fn(x)) if i == num_steps else 0.0

    def gradient(i, x):
        if i == num_steps:
            return np.asarray(grad(x), dtype=float)
        return np.zeros_like(np.asarray(x, dtype=float))

    return QuantityOfInterest(num_steps, term, gradient, index_set)


def zero_qoi(num_steps: int) -> QuantityOfInterest:
    return QuantityOfInterest(
        num_steps, lambda i, x: 0.0, lambda i, x: np.zeros_like(np.asarray(x, dtype=float))
    )


def burgers_qoi(model, num_steps: int, lo: float = 0.05, hi: float = 0.1) -> QuantityOfInterest:
    """Sum of squared final-time velocities at the nodes inside ``[lo, hi]``."""
    idx = model.indices_in(lo, hi)
    if idx.size == 0:
        raise InvalidArgumentError(f"no interior nodes in [{lo}, {hi}]")

    def fn(u):
        return np.sum(u[idx] ** 2)

    def grad(u):
        g = np.zeros(model.dim)
        g[idx] = 2.0 * u[idx]
        return g

    return terminal_qoi(num_steps, fn, grad, index_set=idx)


def qoi_eval(q: QuantityOfInterest, traj) -> float:
    """``sum_i r_i(x_i)`` over a trajectory (or ``(Nt+1, n)`` array)."""
    states = traj.states if isinstance(traj, Trajectory) else np.asarray(traj, dtype=float)
    if states.shape[0] != q.num_steps + 1:
        raise InvalidArgumentError(
            f"trajectory has {states.shape[0]} states, QoI expects {q.num_steps + 1}"
        )
    return float(sum(q.term(i, states[i]) for i in range(q.num_steps + 1)))


@dataclass
class AdjointTrajectory:
    """Multipliers ``lambda_0..lambda_Nt`` stored in forward order."""

    multipliers: np.ndarray
    scheme: str

    def __post_init__(self):
        if not np.all(np.isfinite(self.multipliers)):
            raise InvalidArgumentError("adjoint contains non-finite values")

    def __getitem__(self, i):
        return self.multipliers[i]

    def __len__(self):
        return self.multipliers.shape[0]


def _check_lengths(q, states):
    if states.shape[0] != q.num_steps + 1:
        raise InvalidArgumentError(
            f"trajectory has {states.shape[0]} states, QoI expects {q.num_steps + 1}"
        )


def full_adjoint_explicit(model: DiscreteModel, traj: Trajectory, q: QuantityOfInterest, h: float) -> AdjointTrajectory:
    """Adjoint of ``x_{i+1} = x_i + h F(x_i)``, linearized at ``x_i``."""
    X = traj.states
    _check_lengths(q, X)
    nt = q.num_steps
    lam = np.empty_like(X)
    lam[nt] = -q.gradient(nt, X[nt])
    for i in range(nt - 1, -1, -1):
        J = model.rhs_jacobian(X[i])
        lam[i] = lam[i + 1] + h * (J.T @ lam[i + 1]) - q.gradient(i, X[i])
    return AdjointTrajectory(lam, "explicit")


def full_adjoint_implicit(model: DiscreteModel, traj: Trajectory, q: QuantityOfInterest, h: float) -> AdjointTrajectory:
    """Adjoint of ``x_{i+1} = x_i + h F(x_{i+1})``, linearized at ``x_{i+1}``."""
    X = traj.states
    _check_lengths(q, X)
    nt = q.num_steps
    eye = np.eye(X.shape[1])
    lam = np.empty_like(X)
    lam[nt] = -q.gradient(nt, X[nt])
    for i in range(nt - 1, -1, -1):
        M = eye - h * model.rhs_jacobian(X[i + 1])
        lam[i] = lu_solve(M, lam[i + 1], trans=1) - q.gradient(i, X[i])
    return AdjointTrajectory(lam, "implicit")


def full_adjoint(model, traj, q, h, scheme: str) -> AdjointTrajectory:
    if scheme == "explicit":
        return full_adjoint_explicit(model, traj, q, h)
    if scheme == "implicit":
        return full_adjoint_implicit(model, traj, q, h)
    raise InvalidArgumentError(f"unknown scheme {scheme!r}")


def _lifted_jacobian(rom: ReducedModel, xr) -> np.ndarray:
    """Full-space Jacobian seen by the reduced model: ``A + U Pi dN/dx``."""
    x = rom.lift(xr)
    Jn = rom.full_model.nonlinear_jacobian(x)
    J = rom.U @ (rom.nonlinear_projector() @ Jn)
    if rom.full_model.linear_operator is not None:
        J = J + rom.full_model.linear_operator
    return J


def reduced_adjoint(
    rom: ReducedModel, rtraj: Trajectory, q: QuantityOfInterest, h: float, scheme: str, sandwich: bool = False
) -> AdjointTrajectory:
    """Discrete adjoint of the reduced Euler scheme, in reduced coordinates.

    Explicit: ``l~_i = (I + h J~(x~_i))^T l~_{i+1} - U^T dr_i(U x~_i)``.
    Implicit: ``l~_i = (I - h J~(x~_{i+1}))^{-T} l~_{i+1} - U^T dr_i(U x~_i)``.

    ``J~ = U^T Jhat U`` where ``Jhat`` is the full-space Jacobian with the
    nonlinear part passed through the DEIM projector. By default ``J~`` is
    assembled directly as ``k x k``; ``sandwich=True`` forms ``Jhat``
    (``Ns x Ns``) and applies ``U^T [I + h Jhat]^T U`` literally, which is
    slower and agrees to rounding.
    """
    if scheme not in SCHEMES:
        raise InvalidArgumentError(f"unknown scheme {scheme!r}")
    Xr = rtraj.states
    _check_lengths(q, Xr)
    U = rom.U
    nt = q.num_steps
    eye = np.eye(rom.k)
    ns = U.shape[0]
    lam = np.empty_like(Xr)
    lam[nt] = -U.T @ q.gradient(nt, U @ Xr[nt])
    for i in range(nt - 1, -1, -1):
        g = U.T @ q.gradient(i, U @ Xr[i])
        at = Xr[i] if scheme == "explicit" else Xr[i + 1]
        if sandwich:
            if scheme == "explicit":
                M = np.eye(ns) + h * _lifted_jacobian(rom, at)
                lam[i] = U.T @ (M.T @ (U @ lam[i + 1])) - g
            else:
                # (I - h J~)^{-T} with J~ = U^T Jhat U
                Mr = U.T @ (np.eye(ns) - h * _lifted_jacobian(rom, at)) @ U
                lam[i] = lu_solve(Mr, lam[i + 1], trans=1) - g
        elif scheme == "explicit":
            Jr = rom.rhs_jacobian(at)
            lam[i] = lam[i + 1] + h * (Jr.T @ lam[i + 1]) - g
        else:
            M = eye - h * rom.rhs_jacobian(at)
            lam[i] = lu_solve(M, lam[i + 1], trans=1) - g
    return AdjointTrajectory(lam, scheme)


def qoi_gradient(adj: AdjointTrajectory) -> np.ndarray:
    """``dQ/dx_0 = -lambda_0``."""
    return -adj.multipliers[0]
