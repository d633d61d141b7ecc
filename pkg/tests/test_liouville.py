import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from photonstats.correlations import g2_zero, mean_photon
from photonstats.errors import ConvergenceError, NonHermitianError, NonUniqueSteadyStateError, ParameterError
from photonstats.hilbert import SpaceSpec, adjoint, annihilation, mode_operators
from photonstats.liouville import (
    MODELS,
    DensityMatrix,
    build_liouvillian,
    collapse_operators,
    propagate,
    smallest_eigenvalues,
    steady_state_residual,
    steadystate,
    system_hamiltonian,
    system_liouvillian,
    unvec,
    vec,
)
from photonstats.models import ModelParams

JC = SpaceSpec(3, 0)
COM = SpaceSpec(3, 3)


def random_density(rng, n):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


def direct_rhs(h, collapse, rho):
    out = -1j * (h @ rho - rho @ h)
    for r, d in collapse:
        dd = adjoint(d) @ d
        out = out + r * (2 * d @ rho @ adjoint(d) - dd @ rho - rho @ dd)
    return out


def cavity_only(cutoff=4, omega=0.0, delta=0.0):
    a = annihilation(cutoff)
    h = delta * adjoint(a) @ a + omega * (a + adjoint(a))
    return build_liouvillian(h, [(1.0, a)]), a


def test_dissipator_convention_on_one_photon():
    l, a = cavity_only(2)
    rho = np.diag([0, 1, 0]).astype(complex)
    np.testing.assert_allclose(l.apply(rho), np.diag([2, -2, 0]), atol=1e-15)


def test_vec_is_column_stacking():
    m = np.arange(6).reshape(2, 3)
    np.testing.assert_array_equal(vec(m), [0, 3, 1, 4, 2, 5])
    np.testing.assert_array_equal(unvec(vec(np.eye(3) * 2), 3), np.eye(3) * 2)


@given(st.integers(0, 2**32 - 1))
def test_superoperator_matches_direct_evaluation(seed):
    rng = np.random.default_rng(seed)
    p = ModelParams.com(rng.uniform(-100, 0), rng.uniform(0, 200), g=rng.uniform(0, 60),
                        omega=rng.uniform(0, 2), gamma=rng.uniform(0, 10), Gamma=rng.uniform(0, 2))
    s = SpaceSpec(2, 1)
    h = system_hamiltonian("com-effective", p, s)
    col = collapse_operators(p, s)
    rho = random_density(rng, s.dim)
    l = build_liouvillian(h, col)
    np.testing.assert_allclose(l.apply(rho), direct_rhs(h, col, rho), atol=1e-10)
    # the cached assembly agrees with the generic builder
    np.testing.assert_allclose(system_liouvillian("com-effective", p, s).dense(), l.dense(), atol=1e-12)


def test_trace_preservation_left_null_vector(fig1_params):
    l = system_liouvillian("jc", fig1_params, JC)
    identity = vec(np.eye(JC.dim))
    assert np.max(np.abs(l.matrix.conj().T @ identity)) <= 1e-12


def test_unitary_evolution_keeps_trace(rng):
    h = system_hamiltonian("jc", ModelParams.jc(1.0, 2.0, g=3.0, omega=0.5), JC)
    l = build_liouvillian(h)
    rho = random_density(rng, JC.dim)
    assert abs(np.trace(l.apply(rho))) < 1e-12


def test_input_validation():
    with pytest.raises(NonHermitianError):
        build_liouvillian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ParameterError):
        build_liouvillian(np.zeros((2, 2)), [(-1.0, np.eye(2))])
    with pytest.raises(ParameterError):
        system_hamiltonian("other", ModelParams(), JC)


def test_single_zero_eigenvalue_at_figure_point(fig1_params):
    p = fig1_params.replace(delta_c=25.0, delta_a=75.0)
    w = np.linalg.eigvals(system_liouvillian("jc", p, SpaceSpec(2, 0)).dense())
    w = w[np.argsort(np.abs(w))]
    assert abs(w[0]) < 1e-10
    assert np.all(w[1:].real < 0)


def test_smallest_eigenvalues_sparse_branch(fig2_params):
    l = system_liouvillian("com-effective", fig2_params.replace(nu=50.0, delta_c=-50.0), SpaceSpec(2, 2))
    w = smallest_eigenvalues(l, 2)
    assert abs(w[0]) < 1e-9
    assert w[1].real < -1e-3


def test_empty_cavity_steady_state():
    p = ModelParams.com(-50.0, 20.0, g=0.0, omega=0.0, gamma=1.0, Gamma=0.1)
    rho = steadystate(system_liouvillian("com-effective", p, SpaceSpec(2, 1))).matrix
    target = np.zeros_like(rho)
    target[0, 0] = 1
    np.testing.assert_allclose(rho, target, atol=1e-12)


@pytest.mark.parametrize("delta", [0.0, 0.7, -3.0])
def test_coherent_steady_state(delta):
    l, a = cavity_only(6, omega=0.1, delta=delta)
    rho = steadystate(l)
    assert mean_photon(rho, a) == pytest.approx(0.01 / (1 + delta**2), abs=1e-10)
    assert g2_zero(rho, a) == pytest.approx(1.0, abs=1e-6)


def test_degenerate_zero_mode_detected():
    # no dissipation: every diagonal state is stationary
    l = build_liouvillian(np.diag([0.0, 1.0, 3.0]))
    with pytest.raises(NonUniqueSteadyStateError):
        steadystate(l)


def test_atom_trapped_without_decay_is_reported():
    # gamma = 0 and no coupling: the atomic populations do not relax
    p = ModelParams.jc(0.0, 0.0, g=0.0, omega=0.1, gamma=0.0)
    with pytest.raises(NonUniqueSteadyStateError):
        steadystate(system_liouvillian("jc", p, JC))


@given(st.floats(-100, 100), st.floats(0.5, 10), st.floats(0.01, 1.0))
def test_steady_state_properties(dc, gamma, omega):
    p = ModelParams.jc(dc, 50.0, g=50.0, omega=omega, gamma=gamma)
    l = system_liouvillian("jc", p, JC)
    rho = steadystate(l, check_unique=False)
    rho.check(herm_tol=1e-10, trace_tol=1e-10, pos_tol=1e-8)
    assert steady_state_residual(l, rho) <= 1e-10


def test_density_matrix_check_rejects():
    with pytest.raises(ConvergenceError):
        DensityMatrix(np.diag([1.5, -0.5]).astype(complex)).check()
    with pytest.raises(ConvergenceError):
        DensityMatrix(np.diag([0.5, 0.2]).astype(complex)).check()


@pytest.mark.parametrize("method", ["expm", "rk"])
def test_photon_decay_rate_two_kappa(method):
    l, a = cavity_only(3)
    rho0 = np.diag([0, 1, 0, 0]).astype(complex)
    t = np.linspace(0, 3, 31)
    n = [np.trace(r @ adjoint(a) @ a).real for r in propagate(l, rho0, t, method=method)]
    np.testing.assert_allclose(n, np.exp(-2 * t), atol=1e-9)


@pytest.mark.parametrize("method", ["expm", "rk"])
def test_t_zero_returns_initial_state(method, rng):
    l, _ = cavity_only(3, omega=0.3)
    rho0 = random_density(rng, 4)
    out = propagate(l, rho0, [0.0, 0.5], method=method)
    np.testing.assert_array_equal(out[0], rho0)


@pytest.mark.parametrize("method", ["expm", "rk"])
@pytest.mark.parametrize("grid", [np.linspace(0, 5, 11), [0.0, 0.1, 1.3, 4.0], [0.5, 2.0]])
def test_trace_and_backends(method, grid, fig1_params, rng):
    l = system_liouvillian("jc", fig1_params.replace(omega=1.0), JC)
    rho0 = random_density(rng, JC.dim)
    out = propagate(l, rho0, grid, method=method)
    for r in out:
        assert abs(np.trace(r) - 1) <= 1e-9
    ref = propagate(l, rho0, grid, method="expm" if method == "rk" else "rk")
    assert max(np.max(np.abs(x - y)) for x, y in zip(out, ref)) < 1e-8


def test_propagation_grid_validation():
    l, _ = cavity_only(2)
    rho = np.eye(3) / 3
    for bad in ([1.0, 0.5], [-1.0, 0.0], []):
        with pytest.raises(ParameterError):
            propagate(l, rho, bad)
    with pytest.raises(ParameterError):
        propagate(l, np.eye(2), [0.0])
    with pytest.raises(ParameterError):
        propagate(l, rho, [0.0], method="euler")


def test_long_time_propagation_reaches_steady_state(fig1_params):
    """Figure point Delta = -50: vacuum propagated to t = 50 matches the solve."""
    p = fig1_params.replace(delta_c=-50.0, delta_a=0.0)
    l = system_liouvillian("jc", p, JC)
    rho_s = steadystate(l).matrix
    vac = np.zeros((JC.dim, JC.dim), dtype=complex)
    vac[0, 0] = 1
    rho_t = propagate(l, vac, [0.0, 50.0])[-1]
    assert np.max(np.abs(rho_t - rho_s)) <= 1e-8
    a = mode_operators(JC).a
    assert mean_photon(rho_t, a) == pytest.approx(mean_photon(rho_s, a), abs=1e-8)
    assert g2_zero(rho_t, a) == pytest.approx(g2_zero(rho_s, a), rel=1e-6)


@pytest.mark.parametrize("model,space", [("jc", JC), ("com-effective", COM), ("com-full", SpaceSpec(3, 2))])
def test_spectral_gap(model, space, fig2_params):
    p = fig2_params.replace(nu=50.0, delta_c=-50.0)
    if model == "jc":
        p = ModelParams.jc(25.0, 50.0, g=50.0, omega=0.1, gamma=1.0)
    w = np.linalg.eigvals(system_liouvillian(model, p, space).dense())
    w = w[np.argsort(np.abs(w))]
    assert abs(w[0]) < 1e-9
    assert np.all(w[1:].real < -1e-6)


def test_models_tuple():
    assert set(MODELS) == {"jc", "com-effective", "com-full"}
    assert math.isclose(system_liouvillian("jc", ModelParams(gamma=1.0), JC).dim, JC.dim)
