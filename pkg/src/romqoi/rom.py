"""POD-Galerkin and POD/DEIM reduced models with Euler stepping."""

from __future__ import annotations

import numpy as np

from .deim import DeimApproximation
from .errors import ConvergenceError, InvalidArgumentError
from .model import SCHEMES, DiscreteModel, NewtonSettings, TimeGrid, Trajectory, _check_finite, newton_solve
from .pod import PodBasis

__all__ = [
    "ReducedModel",
    "ReducedTrajectory",
    "rom_step_explicit",
    "rom_step_implicit",
    "integrate_rom",
    "lift_trajectory",
]


class ReducedTrajectory(Trajectory):
    """Reduced states ``x~_0..x~_Nt``, one per row."""


class ReducedModel:
    """Reduced dynamics ``x~' = f~(x~)`` on the span of a POD basis.

    If the full model exposes a linear part ``A``, it is projected exactly as
    ``U^T A U``. The remaining nonlinear term is either Galerkin-projected
    (``deim=None``) or replaced by its DEIM interpolant.

    Parameters
    ----------
    basis : PodBasis
    full_model : DiscreteModel
    deim : DeimApproximation, optional
        Must have been built for ``basis``.
    """

    def __init__(self, basis: PodBasis, full_model: DiscreteModel, deim: DeimApproximation | None = None):
        if basis.dim != full_model.dim:
            raise InvalidArgumentError("basis and model dimensions differ")
        if deim is not None and deim.projector.shape != (basis.k, deim.m):
            raise InvalidArgumentError("DEIM projector does not match the basis")
        self.basis = basis
        self.full_model = full_model
        self.deim = deim
        self.U = basis.modes
        A = full_model.linear_operator
        self.linear_reduced = None if A is None else self.U.T @ A @ self.U

    @property
    def k(self) -> int:
        return self.basis.k

    @property
    def m(self) -> int | None:
        return None if self.deim is None else self.deim.m

    def _check(self, xr) -> np.ndarray:
        xr = np.asarray(xr, dtype=float).reshape(-1)
        if xr.shape != (self.k,):
            raise InvalidArgumentError(f"reduced state must have length {self.k}")
        return xr

    def rhs(self, xr) -> np.ndarray:
        xr = self._check(xr)
        N = self.full_model.nonlinear(self.U @ xr)
        if self.deim is None:
            out = self.U.T @ N
        else:
            out = self.deim.projector @ N[self.deim.indices]
        if self.linear_reduced is not None:
            out = out + self.linear_reduced @ xr
        return out

    def rhs_jacobian(self, xr) -> np.ndarray:
        xr = self._check(xr)
        Jn = self.full_model.nonlinear_jacobian(self.U @ xr)
        if self.deim is None:
            out = self.U.T @ Jn @ self.U
        else:
            out = self.deim.projector @ (Jn[self.deim.indices, :] @ self.U)
        if self.linear_reduced is not None:
            out = out + self.linear_reduced
        return out

    def nonlinear_projector(self) -> np.ndarray:
        """Full-space operator ``Pi`` such that the lifted reduced nonlinear
        term is ``U Pi N``: ``U^T`` for Galerkin, ``U^T V (P^T V)^{-1} P^T``
        with DEIM."""
        if self.deim is None:
            return self.U.T
        Pi = np.zeros((self.k, self.basis.dim))
        Pi[:, self.deim.indices] = self.deim.projector
        return Pi

    def project(self, x):
        return self.U.T @ np.asarray(x, dtype=float)

    def lift(self, xr):
        return self.U @ np.asarray(xr, dtype=float)


def rom_step_explicit(rom: ReducedModel, xr, h: float) -> np.ndarray:
    xr = rom._check(xr)
    if not h > 0:
        raise InvalidArgumentError("h must be positive")
    return xr + h * rom.rhs(xr)


def rom_step_implicit(rom: ReducedModel, xr, h: float, settings: NewtonSettings = NewtonSettings()) -> np.ndarray:
    """Solve ``y = x~ + h f~(y)`` with the reduced Newton matrix ``I - h J~``."""
    xr = rom._check(xr)
    if not h > 0:
        raise InvalidArgumentError("h must be positive")
    eye = np.eye(rom.k)
    return newton_solve(
        lambda y: y - xr - h * rom.rhs(y),
        lambda y: eye - h * rom.rhs_jacobian(y),
        xr,
        settings,
    ).x


def integrate_rom(
    rom: ReducedModel,
    xr0,
    grid: TimeGrid,
    scheme: str = "implicit",
    settings: NewtonSettings = NewtonSettings(),
) -> ReducedTrajectory:
    """Reduced trajectory from ``xr0`` (normally ``U^T x_0``)."""
    if scheme not in SCHEMES:
        raise InvalidArgumentError(f"unknown scheme {scheme!r}")
    xr = rom._check(xr0)
    states = np.empty((grid.num_steps + 1, rom.k))
    states[0] = xr
    h = grid.h
    for i in range(grid.num_steps):
        try:
            if scheme == "explicit":
                xr = rom_step_explicit(rom, xr, h)
                _check_finite(xr)
            else:
                xr = rom_step_implicit(rom, xr, h, settings)
        except ConvergenceError as err:
            err.step_index = i + 1
            raise
        states[i + 1] = xr
    return ReducedTrajectory(states, grid)


def lift_trajectory(rom_or_basis, rtraj: Trajectory) -> Trajectory:
    """Full-space trajectory ``x^_i = U x~_i``."""
    U = rom_or_basis.modes if isinstance(rom_or_basis, PodBasis) else rom_or_basis.U
    return Trajectory(rtraj.states @ U.T, rtraj.grid)
