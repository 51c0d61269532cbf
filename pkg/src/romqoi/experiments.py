"""End-to-end Burgers study: offline bases, reduced models, error rows.

The offline stage runs the full model and its adjoint once at the training
viscosity. The state basis comes from forward states and adjoint
multipliers; the nonlinear basis from the advection term evaluated along
the forward trajectory. Reduced models for any ``(k, m)`` are then cheap
truncations of those two SVDs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .adjoint import AdjointTrajectory, burgers_qoi, full_adjoint, qoi_eval, reduced_adjoint
from .burgers import BurgersModel, build_burgers, initial_condition
from .config import ExperimentConfig
from .deim import (
    adaptive_deim_indices,
    build_deim_operator,
    deim_indices,
)
from .errors import ConvergenceError, InvalidArgumentError, LinearSolveError, SelectionError
from .estimation import (
    DualWeightedResiduals,
    ErrorReport,
    dual_weighted_residuals,
    dwr_basis,
    estimate_error_fast,
)
from .model import NewtonSettings, TimeGrid, Trajectory, integrate
from .pod import PodBasis, SnapshotMatrix, collect_snapshots, energy_dimension, pod_basis
from .rom import ReducedModel, integrate_rom, lift_trajectory

__all__ = ["OfflineData", "RomEvaluation", "BurgersStudy", "balanced_snapshots"]


def balanced_snapshots(fom: Trajectory, adj: AdjointTrajectory, mode: str = "norm") -> SnapshotMatrix:
    """Forward states ``x_0..x_Nt`` next to multipliers ``lambda_1..lambda_Nt``.

    ``lambda_0`` is left out: it is the QoI gradient, not a state along the
    adjoint sweep. With ``mode="norm"`` the adjoint block is rescaled to the
    Frobenius norm of the forward block so neither group dominates the SVD;
    ``mode="none"`` stacks them as they are.
    """
    X = fom.states
    L = adj.multipliers[1:]
    if mode == "norm":
        nl = np.linalg.norm(L)
        if nl > 0:
            L = L * (np.linalg.norm(X) / nl)
    elif mode != "none":
        raise InvalidArgumentError(f"unknown balance mode {mode!r}")
    return collect_snapshots([X, L], tags=["forward-state", "adjoint-state"])


@dataclass
class OfflineData:
    model: BurgersModel
    grid: TimeGrid
    x0: np.ndarray
    fom: Trajectory
    adjoint: AdjointTrajectory
    snapshots: SnapshotMatrix
    state_basis: PodBasis
    nonlinear_basis: PodBasis


@dataclass
class RomEvaluation:
    rom: ReducedModel
    rtraj: Trajectory
    report: ErrorReport
    qoi_full: float
    qoi_reduced: float
    dwr: DualWeightedResiduals | None = None


class BurgersStudy:
    """Pipeline driven by an :class:`ExperimentConfig`.

    Full-model truths are cached per viscosity so sweeps over ``k``, ``m``
    and ``alpha`` pay for each full solve once.
    """

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        mc, tc = cfg.model, cfg.time
        self.scheme = tc.scheme
        self.grid = TimeGrid(tc.t_final, tc.num_steps)
        self.settings = NewtonSettings(cfg.newton.tol, cfg.newton.max_iter)
        self.train_model = build_burgers(mc.n_grid, mc.length, mc.viscosity, mc.split_linear)
        self.x0 = initial_condition(self.train_model, mc.ic_coeff, mc.ic_roots)
        self.q = burgers_qoi(self.train_model, tc.num_steps, cfg.qoi.lower, cfg.qoi.upper)
        self._offline: OfflineData | None = None
        self._truth: dict[float, tuple[Trajectory, float]] = {}
        self.last_evaluation: RomEvaluation | None = None

    def model(self, mu: float | None = None) -> BurgersModel:
        if mu is None or mu == self.train_model.viscosity:
            return self.train_model
        return self.train_model.with_viscosity(mu)

    @property
    def offline(self) -> OfflineData:
        if self._offline is None:
            self._offline = self._build_offline()
        return self._offline

    def _build_offline(self) -> OfflineData:
        model = self.train_model
        fom = integrate(model, self.x0, self.grid, self.scheme, self.settings)
        adj = full_adjoint(model, fom, self.q, self.grid.h, self.scheme)
        return self.use_training_run(fom, adj)

    def use_training_run(self, fom: Trajectory, adj: AdjointTrajectory) -> OfflineData:
        """Build the bases from a stored forward/adjoint pair instead of solving."""
        model = self.train_model
        if fom.states.shape != (self.grid.num_steps + 1, model.dim):
            raise InvalidArgumentError("stored trajectory does not match the configuration")
        if adj.multipliers.shape != fom.states.shape:
            raise InvalidArgumentError("stored adjoint does not match the trajectory")
        self._truth.setdefault(model.viscosity, (fom, qoi_eval(self.q, fom)))
        snaps = balanced_snapshots(fom, adj, self.cfg.rom.snapshot_balance)
        state_basis = pod_basis(snaps, k=min(snaps.shape))
        nl = np.array([model.nonlinear(x) for x in fom.states[1:]])
        nonlinear_basis = pod_basis(collect_snapshots([nl], ["nonlinear-term"]), k=min(nl.shape))
        self._offline = OfflineData(model, self.grid, self.x0, fom, adj, snaps, state_basis, nonlinear_basis)
        return self._offline

    def pod_dim(self) -> int:
        """Configured ``k``, or the energy-criterion size when ``pod_dim`` is unset."""
        rc = self.cfg.rom
        if rc.pod_dim is not None:
            return rc.pod_dim
        return energy_dimension(self.offline.state_basis.singular_values, rc.energy)

    def basis(self, k: int) -> PodBasis:
        return self.offline.state_basis.truncate(k)

    def nonlinear_modes(self, m: int) -> np.ndarray:
        return self.offline.nonlinear_basis.truncate(m).modes

    def truth(self, mu: float | None = None) -> tuple[Trajectory, float]:
        model = self.model(mu)
        key = model.viscosity
        if key not in self._truth:
            fom = integrate(model, self.x0, self.grid, self.scheme, self.settings)
            self._truth[key] = (fom, qoi_eval(self.q, fom))
        return self._truth[key]

    def galerkin_rom(self, k: int, mu: float | None = None) -> ReducedModel:
        return ReducedModel(self.basis(k), self.model(mu))

    def standard_rom(self, k: int, m: int, mu: float | None = None) -> ReducedModel:
        V = self.nonlinear_modes(m)
        return ReducedModel(self.basis(k), self.model(mu), build_deim_operator(self.basis(k).modes, V, deim_indices(V)))

    def rom_with_indices(self, k: int, m: int, indices, mu: float | None = None) -> ReducedModel:
        V = self.nonlinear_modes(m)
        return ReducedModel(self.basis(k), self.model(mu), build_deim_operator(self.basis(k).modes, V, indices))

    def rom_from_arrays(self, U, V, indices, mu: float | None = None) -> ReducedModel:
        """Reduced model from stored basis, nonlinear modes and indices."""
        U = np.asarray(U, dtype=float)
        return ReducedModel(PodBasis(U, np.ones(U.shape[1])), self.model(mu), build_deim_operator(U, V, indices))

    def evaluate(self, rom: ReducedModel, mu: float | None = None, with_dwr: bool = False) -> RomEvaluation:
        """Reduced solve, fast estimate and true error for one reduced model."""
        _, q_full = self.truth(mu)
        rtraj = integrate_rom(rom, rom.project(self.x0), self.grid, self.scheme, self.settings)
        radj = reduced_adjoint(rom, rtraj, self.q, self.grid.h, self.scheme)
        dwr = dual_weighted_residuals(rom, rtraj, self.q, self.grid, self.scheme, self.x0, radj)
        report = estimate_error_fast(rom, rtraj, self.q, self.grid, self.x0, self.scheme, radj)
        q_red = qoi_eval(self.q, lift_trajectory(rom, rtraj))
        report.true_error = q_full - q_red
        return RomEvaluation(rom, rtraj, report, q_full, q_red, dwr if with_dwr else None)

    def dwr_modes(self, k: int, m: int, mu: float | None = None, count: int | None = None) -> np.ndarray:
        """DWR basis ``W`` from the standard-DEIM reduced model."""
        count = self.cfg.rom.dwr_modes if count is None else count
        ev = self.evaluate(self.standard_rom(k, m, mu), mu, with_dwr=True)
        Z = ev.dwr.matrix_form
        return dwr_basis(Z, min(count, m, min(Z.shape)))

    def adaptive_indices(self, k: int, m: int, alpha: float, mu: float | None = None, W=None) -> np.ndarray:
        if W is None:
            W = self.dwr_modes(k, m, mu)
        return adaptive_deim_indices(self.nonlinear_modes(m), W, alpha, self.cfg.rom.normalize_residuals)

    def adaptive_rom(self, k: int, m: int, alpha: float, mu: float | None = None, W=None) -> ReducedModel:
        return self.rom_with_indices(k, m, self.adaptive_indices(k, m, alpha, mu, W), mu)

    def row(self, k: int, m: int, alpha: float | None = None, mu: float | None = None, W=None) -> dict:
        """One CSV row for a standard (``alpha=None``) or adaptive reduced model."""
        if alpha is None:
            build = lambda: self.standard_rom(k, m, mu)  # noqa: E731
        else:
            build = lambda: self.adaptive_rom(k, m, alpha, mu, W)  # noqa: E731
        return self.evaluate_row(build, k, m, alpha, mu)

    def evaluate_row(
        self, build, k: int, m: int, alpha: float | None = None, mu: float | None = None, with_dwr: bool = False
    ) -> dict:
        """Build a reduced model with ``build()`` and report it as a CSV row.

        Solver and selection failures are caught and recorded in the
        ``status`` column so sweeps keep going. The full evaluation is kept
        in ``last_evaluation``.
        """
        mu = self.train_model.viscosity if mu is None else mu
        row = {"k": k, "m": m, "alpha": "standard" if alpha is None else alpha,
               "mu": mu, "scheme": self.scheme}
        t0 = time.perf_counter()
        try:
            rom = build()
            ev = self.evaluate(rom, mu, with_dwr)
        except (ConvergenceError, LinearSolveError, SelectionError, InvalidArgumentError) as err:
            row.update(status=f"failed: {type(err).__name__}: {err}".replace(",", ";"))
            for c in ("true_error", "estimated_error", "ratio", "cond_PtV", "qoi_value"):
                row[c] = float("nan")
            row["wall_ms"] = 0.0
            return row
        elapsed = (time.perf_counter() - t0) * 1e3
        self.last_evaluation = ev
        rep = ev.report
        row.update(
            true_error=rep.true_error,
            estimated_error=rep.estimated_error,
            ratio=rep.ratio,
            cond_PtV=rom.deim.condition_number,
            qoi_value=ev.qoi_reduced,
            # wall time breaks byte-identical reruns, so it is opt-in
            wall_ms=round(elapsed, 3) if self.cfg.output.timing else 0.0,
            status="ok",
        )
        return row

    def sweep(self, emit=None) -> list[dict]:
        """Rows over the configured ``k x m x alpha x mu`` grid, in that nesting order."""
        sc = self.cfg.sweep
        rows = []
        for mu in sc.viscosities:
            for k in sc.pod_dims:
                for m in sc.deim_points:
                    W = None
                    for alpha in sc.alphas:
                        if alpha is not None and W is None:
                            try:
                                W = self.dwr_modes(k, m, mu)
                            except (ConvergenceError, LinearSolveError, InvalidArgumentError):
                                W = None
                        row = self.row(k, m, alpha, mu, W)
                        rows.append(row)
                        if emit is not None:
                            emit(row)
        return rows
