import numpy as np
import pytest

from romqoi import FunctionModel, NewtonSettings, TimeGrid, integrate
from romqoi.adjoint import burgers_qoi, zero_qoi
from romqoi.burgers import build_burgers, initial_condition
from romqoi.deim import build_deim_operator
from romqoi.errors import InvalidArgumentError
from romqoi.estimation import (
    dual_weighted_residuals,
    dwr_basis,
    estimate_error_fast,
    estimate_error_fast_explicit,
    estimate_error_fast_implicit,
    estimate_error_oracle,
    residuals,
    residuals_explicit,
    residuals_implicit,
    true_error,
)
from romqoi.model import step_explicit
from romqoi.pod import PodBasis
from romqoi.rom import ReducedModel, integrate_rom, lift_trajectory

TIGHT = NewtonSettings(tol=1e-13)


def identity_rom(model):
    n = model.dim
    return ReducedModel(PodBasis(np.eye(n), np.ones(n)), model, build_deim_operator(np.eye(n), np.eye(n), np.arange(n)))


def reduced_run(study, k, m, scheme="implicit", grid=None):
    grid = study.grid if grid is None else grid
    rom = study.standard_rom(k, m)
    rt = integrate_rom(rom, rom.project(study.x0), grid, scheme, study.settings)
    return rom, rt, grid


def test_residuals_vanish_on_full_trajectories():
    model = build_burgers(30)
    x0 = initial_condition(model)
    ex = integrate(model, x0, TimeGrid(0.02, 20), "explicit")
    assert np.max(residuals_explicit(ex, model, 0.001, x0).norms) <= 1e-15
    im = integrate(model, x0, TimeGrid(1.0, 20), "implicit", TIGHT)
    assert np.max(residuals_implicit(im, model, 0.05, x0).norms) <= 1e-12


def test_residuals_of_constant_states_under_zero_field():
    X = np.tile([1.0, 2.0], (4, 1))
    for scheme in ("explicit", "implicit"):
        assert not np.any(residuals(X, FunctionModel.zero(2), 0.1, X[0], scheme).residuals)
    with pytest.raises(InvalidArgumentError):
        residuals(X, FunctionModel.zero(3), 0.1, X[0], "explicit")


def test_one_step_defect_identity(small_study):
    grid = TimeGrid(0.02, 20)
    rom, rt, _ = reduced_run(small_study, 6, 10, "explicit", grid)
    lifted = lift_trajectory(rom, rt)
    res = residuals_explicit(lifted, small_study.train_model, grid.h, small_study.x0)
    for i in range(grid.num_steps):
        stepped = step_explicit(small_study.train_model, lifted.states[i], grid.h)
        np.testing.assert_allclose(stepped - lifted.states[i + 1], -res.residuals[i + 1], atol=1e-14)


def test_initial_slot_orthogonal_to_basis(baseline):
    rom, rt, grid = reduced_run(baseline, 15, 40)
    res = residuals_implicit(lift_trajectory(rom, rt), baseline.train_model, grid.h, baseline.x0)
    assert np.max(np.abs(rom.U.T @ res.residuals[0])) <= 1e-10


def test_residual_norms_decay_with_k(baseline):
    totals = []
    for k in (15, 20, 25):
        rom, rt, grid = reduced_run(baseline, k, 40)
        totals.append(np.linalg.norm(residuals_implicit(lift_trajectory(rom, rt), baseline.train_model, grid.h, baseline.x0).residuals))
    assert all(b <= 2.0 * a for a, b in zip(totals, totals[1:]))
    assert totals[-1] < totals[0]


@pytest.mark.parametrize("scheme,nt", [("explicit", 300), ("implicit", 20)])
def test_exact_reduction_gives_zero(scheme, nt):
    model = build_burgers(30)
    x0 = initial_condition(model)
    grid = TimeGrid(0.5, nt)
    q = burgers_qoi(model, nt)
    rom = identity_rom(model)
    rt = integrate_rom(rom, x0, grid, scheme, TIGHT)
    assert abs(estimate_error_fast(rom, rt, q, grid, x0, scheme).estimated_error) <= 1e-8
    assert abs(true_error(model, rom, q, grid, x0, scheme, TIGHT)) <= 1e-9
    oracle = estimate_error_oracle(model, rom, q, grid, x0, scheme, TIGHT, rtraj=rt)
    assert abs(oracle.estimated_error) <= 1e-8 and abs(oracle.true_error) <= 1e-8


@pytest.mark.parametrize("scheme,grid", [("explicit", TimeGrid(0.02, 20)), ("implicit", None)])
def test_sum_identity_and_bookkeeping(small_study, scheme, grid):
    rom, rt, grid = reduced_run(small_study, 6, 10, scheme, grid)
    rep = estimate_error_fast(rom, rt, small_study.q, grid, small_study.x0, scheme)
    dwr = dual_weighted_residuals(rom, rt, small_study.q, grid, scheme, small_study.x0)
    assert dwr.signed_sum() == pytest.approx(rep.estimated_error, rel=1e-12)
    assert np.sum(rep.per_step_contributions) == pytest.approx(rep.estimated_error, rel=1e-12)
    assert dwr.matrix_form.shape == (small_study.train_model.dim, grid.num_steps + 1)
    wrapper = estimate_error_fast_explicit if scheme == "explicit" else estimate_error_fast_implicit
    assert wrapper(rom, rt, small_study.q, grid, small_study.x0).estimated_error == rep.estimated_error


def test_implicit_estimate_by_direct_formula(small_study):
    rom, rt, grid = reduced_run(small_study, 6, 10)
    from romqoi.adjoint import reduced_adjoint

    lam = reduced_adjoint(rom, rt, small_study.q, grid.h, "implicit").multipliers
    X = lift_trajectory(rom, rt).states
    F = small_study.train_model.rhs
    x0 = small_study.x0
    total = -(rom.U @ lam[0]) @ (x0 - X[0])
    for i in range(grid.num_steps):
        phi = X[i + 1] - X[i] - grid.h * F(X[i + 1])
        total += phi @ (rom.U @ lam[i] + small_study.q.gradient(i, X[i]))
    rep = estimate_error_fast_implicit(rom, rt, small_study.q, grid, x0)
    assert rep.estimated_error == pytest.approx(total, rel=1e-12)


def test_zero_qoi_gives_zero_dwr(small_study):
    rom, rt, grid = reduced_run(small_study, 6, 10)
    dwr = dual_weighted_residuals(rom, rt, zero_qoi(grid.num_steps), grid, "implicit", small_study.x0)
    assert not np.any(dwr.z)


def test_true_error_sign_and_recomputation(small_study):
    model, x0, grid, q = small_study.train_model, small_study.x0, small_study.grid, small_study.q
    rom = small_study.galerkin_rom(1)
    eps = true_error(model, rom, q, grid, x0, "implicit", small_study.settings)
    fom = integrate(model, x0, grid, "implicit", small_study.settings)
    rt = integrate_rom(rom, rom.project(x0), grid, "implicit", small_study.settings)
    idx = q.index_set
    direct = np.sum(fom.final[idx] ** 2) - np.sum((rom.U @ rt.final)[idx] ** 2)
    assert eps == pytest.approx(direct, rel=1e-12)
    assert abs(eps) > 1e-3
    assert true_error(model, rom, q.scaled(-1.0), grid, x0, "implicit", small_study.settings) == pytest.approx(-eps, rel=1e-12)


def test_oracle_variants_on_small_instance():
    from tests.conftest import baseline_config
    from romqoi.experiments import BurgersStudy

    study = BurgersStudy(baseline_config(**{"model.n_grid": 30, "time.num_steps": 10}))
    rom = study.standard_rom(6, 10)
    args = (study.train_model, rom, study.q, study.grid, study.x0, "implicit", study.settings)
    full = estimate_error_oracle(*args)
    single = estimate_error_oracle(*args, single_trajectory=True)
    assert abs(full.estimated_error - full.true_error) <= 0.2 * abs(full.true_error)
    assert abs(single.estimated_error - full.estimated_error) <= 0.1 * abs(full.estimated_error)


def test_dwr_concentrates_near_qoi_support(baseline):
    rom, rt, grid = reduced_run(baseline, 15, 40)
    z = dual_weighted_residuals(rom, rt, baseline.q, grid, "implicit", baseline.x0).z[-1]
    top = np.argsort(np.abs(z))[-len(z) // 10:]
    x = baseline.train_model.x
    assert np.all(np.abs(x[top] - 0.075) < 0.2)


def test_dwr_basis_simple_cases():
    u = np.array([3.0, 4.0, 0.0])
    Z = np.outer(u, [1.0, -2.0, 0.5])
    W = dwr_basis(Z, 1)
    np.testing.assert_allclose(W[:, 0], u / 5.0)
    Z = np.array([[0.0, 2.0], [1.0, 0.0], [0.0, 0.0]])
    np.testing.assert_allclose(dwr_basis(Z, 2), [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(InvalidArgumentError):
        dwr_basis(Z, 3)


def test_dwr_basis_baseline_orthonormal(baseline):
    rom, rt, grid = reduced_run(baseline, 15, 40)
    dwr = dual_weighted_residuals(rom, rt, baseline.q, grid, "implicit", baseline.x0)
    W = dwr_basis(dwr, 15)
    assert np.max(np.abs(W.T @ W - np.eye(15))) <= 1e-10


def test_estimate_is_not_blind(baseline):
    rows = [baseline.row(k, 40) for k in (10, 15)]
    assert all(r["true_error"] != 0 and r["estimated_error"] != 0 for r in rows)


def test_explicit_scheme_estimate():
    from tests.conftest import baseline_config
    from romqoi.experiments import BurgersStudy

    # h = 4e-4 is below dx^2 / (2 mu) = 5e-4 for n = 101
    study = BurgersStudy(baseline_config(**{"model.n_grid": 101, "time.num_steps": 2500, "time.scheme": "explicit"}))
    row = study.row(20, 40)
    assert row["status"] == "ok"
    assert 0.5 <= row["ratio"] <= 2.0


def test_parametric_extrapolation(baseline):
    for k in range(17, 31):
        row = baseline.row(k, 40, mu=0.07)
        assert 0.3 <= row["ratio"] <= 3.0, row
