import numpy as np
import pytest

from romqoi import FunctionModel, NewtonSettings, TimeGrid, integrate
from romqoi.burgers import build_burgers, initial_condition
from romqoi.deim import build_deim_operator, deim_indices
from romqoi.errors import InvalidArgumentError
from romqoi.model import step_explicit
from romqoi.pod import PodBasis
from romqoi.rom import ReducedModel, integrate_rom, lift_trajectory, rom_step_explicit, rom_step_implicit

TIGHT = NewtonSettings(tol=1e-12)


def identity_rom(model, with_deim=True):
    n = model.dim
    basis = PodBasis(np.eye(n), np.ones(n))
    deim = build_deim_operator(np.eye(n), np.eye(n), np.arange(n)) if with_deim else None
    return ReducedModel(basis, model, deim)


def test_zero_dynamics():
    model = FunctionModel.zero(4)
    rom = ReducedModel(PodBasis(np.eye(4)[:, :2], np.ones(4)), model)
    xr = np.array([1.0, -1.0])
    np.testing.assert_array_equal(rom_step_explicit(rom, xr, 0.1), xr)
    np.testing.assert_array_equal(rom_step_implicit(rom, xr, 0.1), xr)
    traj = integrate_rom(rom, xr, TimeGrid(1.0, 4))
    np.testing.assert_array_equal(traj.states, np.tile(xr, (5, 1)))


def test_identity_reduction_explicit_step():
    model = build_burgers(20, 1.0, 0.1)
    x = initial_condition(model)
    np.testing.assert_allclose(rom_step_explicit(identity_rom(model), x, 1e-3), step_explicit(model, x, 1e-3), atol=1e-14)


def test_identity_reduction_linear_implicit(rng):
    A = -np.eye(5) + 0.1 * rng.standard_normal((5, 5))
    rom = identity_rom(FunctionModel.linear(A))
    x = rng.standard_normal(5)
    np.testing.assert_allclose(rom_step_implicit(rom, x, 0.1, TIGHT), np.linalg.solve(np.eye(5) - 0.1 * A, x), atol=1e-12)


def test_deim_step_matches_dense_formula(baseline):
    rom = baseline.standard_rom(15, 40)
    model = baseline.train_model
    xr = rom.project(baseline.x0)
    U, V, idx = rom.U, rom.deim.nonlinear_modes, rom.deim.indices
    P = np.zeros((model.dim, 40))
    P[idx, np.arange(40)] = 1.0
    x = U @ xr
    h = baseline.grid.h
    dense = xr + h * (U.T @ V @ np.linalg.solve(P.T @ V, P.T @ model.advection(x)) + U.T @ model.diffusion @ x)
    np.testing.assert_allclose(rom_step_explicit(rom, xr, h), dense, rtol=1e-11, atol=1e-13)


def test_implicit_step_residual(baseline):
    rom = baseline.standard_rom(15, 40)
    xr = rom.project(baseline.x0)
    h = baseline.grid.h
    y = rom_step_implicit(rom, xr, h, NewtonSettings())
    assert np.linalg.norm(y - xr - h * rom.rhs(y)) <= 1e-10


def test_reduced_jacobian_matches_finite_differences(baseline, rng):
    rom = baseline.standard_rom(10, 20)
    xr = rom.project(baseline.x0)
    d = rng.standard_normal(10)
    eps = 1e-6
    fd = (rom.rhs(xr + eps * d) - rom.rhs(xr - eps * d)) / (2 * eps)
    np.testing.assert_allclose(rom.rhs_jacobian(xr) @ d, fd, rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("scheme,nt", [("implicit", 30), ("explicit", 400)])
def test_exact_reduction_reproduces_full_trajectory(scheme, nt):
    model = build_burgers(30, 1.0, 0.1)
    x0 = initial_condition(model)
    grid = TimeGrid(0.5, nt)
    fom = integrate(model, x0, grid, scheme, TIGHT)
    for rom in (identity_rom(model), identity_rom(model, with_deim=False)):
        rt = integrate_rom(rom, rom.project(x0), grid, scheme, TIGHT)
        np.testing.assert_allclose(lift_trajectory(rom, rt).states, fom.states, atol=1e-9)


def test_final_state_accuracy_k25(baseline):
    rom = baseline.standard_rom(25, 40)
    rt = integrate_rom(rom, rom.project(baseline.x0), baseline.grid, "implicit", baseline.settings)
    fom, _ = baseline.truth()
    xhat = rom.lift(rt.final)
    assert np.linalg.norm(xhat - fom.final) <= 1e-4 * np.linalg.norm(fom.final)


def test_final_error_shrinks_with_k(baseline):
    fom, _ = baseline.truth()
    errs = []
    for k in (5, 10, 15, 20, 25, 30):
        rom = baseline.standard_rom(k, 40)
        rt = integrate_rom(rom, rom.project(baseline.x0), baseline.grid, "implicit", baseline.settings)
        errs.append(np.linalg.norm(rom.lift(rt.final) - fom.final))
    assert all(b <= 2.0 * a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-3 * errs[0]


def test_shape_checks(baseline):
    rom = baseline.standard_rom(5, 10)
    with pytest.raises(InvalidArgumentError):
        rom.rhs(np.ones(4))
    with pytest.raises(InvalidArgumentError):
        ReducedModel(PodBasis(np.eye(3), np.ones(3)), build_burgers(10))
    with pytest.raises(InvalidArgumentError):
        rom_step_explicit(rom, np.zeros(5), 0.0)
