"""A-posteriori estimates of the QoI error made by a reduced model.

Sign convention: the QoI error is ``eps = Q(x) - Q(x^)`` with ``x`` the
full-model trajectory and ``x^ = U x~`` the lifted reduced trajectory. With
``dx_i`` the one-step defects of the full model started from ``x^_{i-1}``,
``eps ~ -sum_i lambda_i . dx_i``. For Euler schemes ``dx_i = -phi_i``, so
the fast estimators read::

    explicit: eps ~ -(U l~_0).(x_0 - x^_0) + sum_{i>=1} (U l~_i).phi_i
    implicit: eps ~ -(U l~_0).(x_0 - x^_0)
                    + sum_{i>=0} phi_{i+1}.(U l~_i + dr_i/dx(x^_i))

Every report stores the per-step terms of these sums; index 0 is the
initial-projection term.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .adjoint import (
    QuantityOfInterest,
    full_adjoint,
    qoi_eval,
    reduced_adjoint,
)
from .errors import InvalidArgumentError
from .model import (
    SCHEMES,
    DiscreteModel,
    NewtonSettings,
    TimeGrid,
    Trajectory,
    integrate,
    step_explicit,
    step_implicit,
)
from .pod import left_singular_vectors
from .rom import ReducedModel, integrate_rom, lift_trajectory

__all__ = [
    "ResidualSeries",
    "DualWeightedResiduals",
    "ErrorReport",
    "residuals_explicit",
    "residuals_implicit",
    "residuals",
    "estimate_error_oracle",
    "estimate_error_fast_explicit",
    "estimate_error_fast_implicit",
    "estimate_error_fast",
    "dual_weighted_residuals",
    "dwr_basis",
    "true_error",
]


@dataclass
class ResidualSeries:
    """Slot 0: ``x_0 - x^_0``; slot ``i >= 1``: full-model residual ``phi_i``."""

    residuals: np.ndarray
    scheme: str

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.residuals, axis=1)


@dataclass
class DualWeightedResiduals:
    """Entry-wise products of lifted adjoints and residuals, one row per step."""

    z: np.ndarray
    scheme: str

    @property
    def matrix_form(self) -> np.ndarray:
        """``Z`` with one column per time step, ``(Ns, Nt+1)``."""
        return self.z.T

    def signed_sum(self) -> float:
        """Grand sum with the initial term negated; equals the fast estimate."""
        return float(-self.z[0].sum() + self.z[1:].sum())


@dataclass
class ErrorReport:
    true_error: float | None
    estimated_error: float
    per_step_contributions: np.ndarray
    k: int | None = None
    m: int | None = None
    viscosity: float | None = None
    scheme: str | None = None
    extras: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        """``estimate / true`` (nan when the true error is unknown or zero)."""
        if self.true_error is None or self.true_error == 0.0:
            return float("nan")
        return self.estimated_error / self.true_error

    @property
    def gap(self) -> float:
        if self.true_error is None:
            return float("nan")
        return abs(self.estimated_error - self.true_error)


def _lifted_states(lifted) -> np.ndarray:
    return lifted.states if isinstance(lifted, Trajectory) else np.asarray(lifted, dtype=float)


def residuals_explicit(lifted, model: DiscreteModel, h: float, x0_full) -> ResidualSeries:
    """``phi_{i+1} = x^_{i+1} - x^_i - h F(x^_i)``."""
    X = _lifted_states(lifted)
    if X.shape[1] != model.dim:
        raise InvalidArgumentError("lifted trajectory does not match the model dimension")
    R = np.empty_like(X)
    R[0] = np.asarray(x0_full, dtype=float) - X[0]
    for i in range(X.shape[0] - 1):
        R[i + 1] = X[i + 1] - X[i] - h * model.rhs(X[i])
    return ResidualSeries(R, "explicit")


def residuals_implicit(lifted, model: DiscreteModel, h: float, x0_full) -> ResidualSeries:
    """``phi_{i+1} = x^_{i+1} - x^_i - h F(x^_{i+1})``."""
    X = _lifted_states(lifted)
    if X.shape[1] != model.dim:
        raise InvalidArgumentError("lifted trajectory does not match the model dimension")
    R = np.empty_like(X)
    R[0] = np.asarray(x0_full, dtype=float) - X[0]
    for i in range(X.shape[0] - 1):
        R[i + 1] = X[i + 1] - X[i] - h * model.rhs(X[i + 1])
    return ResidualSeries(R, "implicit")


def residuals(lifted, model, h, x0_full, scheme: str) -> ResidualSeries:
    if scheme == "explicit":
        return residuals_explicit(lifted, model, h, x0_full)
    if scheme == "implicit":
        return residuals_implicit(lifted, model, h, x0_full)
    raise InvalidArgumentError(f"unknown scheme {scheme!r}")


def _report(contrib, rom, scheme, true_err=None, **extras) -> ErrorReport:
    return ErrorReport(
        true_error=true_err,
        estimated_error=float(np.sum(contrib)),
        per_step_contributions=np.asarray(contrib, dtype=float),
        k=rom.k if rom is not None else None,
        m=rom.m if rom is not None else None,
        viscosity=_viscosity(rom.full_model) if rom is not None else None,
        scheme=scheme,
        extras=extras,
    )


def _viscosity(model) -> float | None:
    mu = getattr(model, "viscosity", None)
    if mu is None and getattr(model, "params", None) is not None and np.size(model.params):
        mu = float(np.ravel(model.params)[0])
    return mu


def dual_weighted_residuals(
    rom: ReducedModel,
    rtraj: Trajectory,
    q: QuantityOfInterest,
    grid: TimeGrid,
    scheme: str,
    x0_full,
    radj=None,
) -> DualWeightedResiduals:
    """Dual-weighted residuals of a reduced trajectory.

    ``z_0 = (U l~_0) * (x_0 - x^_0)`` and, for ``i >= 1``,
    explicit ``z_i = (U l~_i) * phi_i`` or implicit
    ``z_i = phi_i * (U l~_{i-1} + dr_{i-1}/dx(x^_{i-1}))``.

    Parameters
    ----------
    radj : AdjointTrajectory, optional
        Precomputed reduced adjoint for ``rtraj``.
    """
    if scheme not in SCHEMES:
        raise InvalidArgumentError(f"unknown scheme {scheme!r}")
    lifted = lift_trajectory(rom, rtraj)
    res = residuals(lifted, rom.full_model, grid.h, x0_full, scheme)
    if radj is None:
        radj = reduced_adjoint(rom, rtraj, q, grid.h, scheme)
    L = radj.multipliers @ rom.U.T  # lifted adjoints, one per row
    X = lifted.states
    z = np.empty_like(X)
    z[0] = L[0] * res.residuals[0]
    if scheme == "explicit":
        z[1:] = L[1:] * res.residuals[1:]
    else:
        for i in range(1, X.shape[0]):
            z[i] = res.residuals[i] * (L[i - 1] + q.gradient(i - 1, X[i - 1]))
    return DualWeightedResiduals(z, scheme)


def estimate_error_fast(rom, rtraj, q, grid, x0_full, scheme: str, radj=None) -> ErrorReport:
    """Adjoint-weighted residual estimate from one reduced forward/adjoint pair."""
    dwr = dual_weighted_residuals(rom, rtraj, q, grid, scheme, x0_full, radj)
    contrib = dwr.z.sum(axis=1)
    contrib[0] = -contrib[0]
    return _report(contrib, rom, scheme)


def estimate_error_fast_explicit(rom, rtraj, q, grid, x0_full, radj=None) -> ErrorReport:
    return estimate_error_fast(rom, rtraj, q, grid, x0_full, "explicit", radj)


def estimate_error_fast_implicit(rom, rtraj, q, grid, x0_full, radj=None) -> ErrorReport:
    return estimate_error_fast(rom, rtraj, q, grid, x0_full, "implicit", radj)


def estimate_error_oracle(
    model: DiscreteModel,
    rom: ReducedModel,
    q: QuantityOfInterest,
    grid: TimeGrid,
    x0_full,
    scheme: str = "implicit",
    settings: NewtonSettings = NewtonSettings(),
    single_trajectory: bool = False,
    rtraj: Trajectory | None = None,
) -> ErrorReport:
    """Estimate built from full-model defects and full-model adjoints.

    ``dx_0 = x_0 - x^_0`` and ``dx_i`` is one full step from ``x^_{i-1}``
    minus ``x^_i``. The weight ``lambda_i`` is the gradient (times -1) of the
    tail QoI ``sum_{j>=i} r_j`` along the full trajectory restarted from
    ``x^_i``; ``lambda_Nt = -dr_Nt/dx(x^_Nt)``. With ``single_trajectory``
    all weights are instead read off one full adjoint along the full
    trajectory from ``x_0``.

    The report also carries the true error.
    """
    if scheme not in SCHEMES:
        raise InvalidArgumentError(f"unknown scheme {scheme!r}")
    x0 = np.asarray(x0_full, dtype=float)
    h = grid.h
    nt = grid.num_steps
    if rtraj is None:
        rtraj = integrate_rom(rom, rom.project(x0), grid, scheme, settings)
    Xh = lift_trajectory(rom, rtraj).states
    step = step_explicit if scheme == "explicit" else step_implicit
    kw = {} if scheme == "explicit" else {"settings": settings}

    dx = np.empty_like(Xh)
    dx[0] = x0 - Xh[0]
    for i in range(1, nt + 1):
        dx[i] = step(model, Xh[i - 1], h, **kw) - Xh[i]

    fom = integrate(model, x0, grid, scheme, settings)
    if single_trajectory:
        lam = full_adjoint(model, fom, q, h, scheme).multipliers
    else:
        lam = np.empty_like(Xh)
        lam[nt] = -q.gradient(nt, Xh[nt])
        for i in range(nt):
            tail_grid = TimeGrid(h * (nt - i), nt - i)
            partial = integrate(model, Xh[i], tail_grid, scheme, settings)
            lam[i] = full_adjoint(model, partial, q.shifted(i), h, scheme).multipliers[0]

    contrib = -np.einsum("ij,ij->i", lam, dx)
    eps = qoi_eval(q, fom) - qoi_eval(q, Xh)
    return _report(contrib, rom, scheme, true_err=eps, single_trajectory=single_trajectory)


def dwr_basis(Z, count: int) -> np.ndarray:
    """Leading ``count`` left singular vectors of the DWR matrix ``(Ns, Nt+1)``."""
    if isinstance(Z, DualWeightedResiduals):
        Z = Z.matrix_form
    Z = np.asarray(Z, dtype=float)
    if not 1 <= count <= min(Z.shape):
        raise InvalidArgumentError(f"count={count} outside [1, {min(Z.shape)}]")
    W, _ = left_singular_vectors(Z)
    return W[:, :count].copy()


def true_error(
    model: DiscreteModel,
    rom: ReducedModel,
    q: QuantityOfInterest,
    grid: TimeGrid,
    x0_full,
    scheme: str = "implicit",
    settings: NewtonSettings = NewtonSettings(),
) -> float:
    """``Q(x) - Q(U x~)`` with both models started from ``x_0`` / ``U^T x_0``."""
    x0 = np.asarray(x0_full, dtype=float)
    fom = integrate(model, x0, grid, scheme, settings)
    rtraj = integrate_rom(rom, rom.project(x0), grid, scheme, settings)
    return qoi_eval(q, fom) - qoi_eval(q, lift_trajectory(rom, rtraj))
