import numpy as np
import pytest

from nlqm.density import (
    density,
    expectation,
    purity,
    purity_predicted,
    rho_dot_residual,
    rho_rhs,
)
from nlqm.errors import InsufficientDataError, InvalidInputError, NonHermitianError
from nlqm.params import ModelParams, equations_of_motion
from nlqm.statevec_simple import StateVectorPair, solve_simple


@pytest.fixture
def solution(worked_params, energies):
    return solve_simple(worked_params, energies, seed=5)


def test_trace_and_hermiticity(solution, worked_params):
    for t in np.linspace(0.0, 10.0, 11):
        dm = density(solution.state(t), worked_params.n_norm)
        assert dm.trace == pytest.approx(1.0, abs=1e-12)
        assert dm.hermiticity_residual <= 1e-15
        assert dm.rank() == 2


def test_purity_matches_schwarz_formula(solution, worked_params):
    predicted = purity_predicted(solution.fixed.delta0, solution.fixed.c, -1.0, worked_params.n_norm)
    for t in np.linspace(0.0, 10.0, 11):
        assert purity(density(solution.state(t), worked_params.n_norm)) == pytest.approx(predicted, abs=1e-9)


def test_worked_fixed_point_purity():
    # b=1, mu=-1/2, N=2: delta0 = 1/2, c = 1
    assert purity_predicted(0.5, 1.0, -1.0, 2.0) == pytest.approx(0.75, abs=1e-12)


def test_expectation_requires_hermitian_operator(solution, worked_params):
    dm = density(solution.state(0.3), worked_params.n_norm)
    X = np.diag([1.0, -1.0, 0.5, 2.0])
    assert expectation(dm, np.eye(4)) == pytest.approx(1.0)
    assert isinstance(expectation(dm, X), float)
    with pytest.raises(NonHermitianError):
        expectation(dm, 1j * np.eye(4))


def test_rho_rhs_matches_state_equations():
    rng = np.random.default_rng(11)
    psi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    phi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    n = np.vdot(psi, psi).real + np.vdot(phi, phi).real
    params = ModelParams(a=0.3, b=0.8, mu=-0.4, lam=0.6, alpha1=0.2, beta1=-0.1, n_norm=n)
    energies = np.array([0.0, 0.5, 1.5])
    dpsi, dphi = equations_of_motion(params, energies, psi, phi)
    rho_dot = (
        np.outer(dpsi, psi.conj()) + np.outer(psi, dpsi.conj()) + np.outer(dphi, phi.conj()) + np.outer(phi, dphi.conj())
    ) / n
    np.testing.assert_allclose(rho_rhs(psi, phi, params, energies), 1j * rho_dot, atol=1e-12)


def test_tau_zero_form_agrees_on_balanced_norms(solution, worked_params, energies):
    state = solution.state(0.8)
    full = rho_rhs(state.psi, state.phi, worked_params, energies)
    reduced = rho_rhs(state.psi, state.phi, worked_params, energies, tau_zero=True)
    np.testing.assert_allclose(full, reduced, atol=1e-12)


def test_rho_dot_residual_is_second_order(solution, worked_params, energies):
    def residual(h):
        series = [solution.state(1.3 + k * h) for k in range(-1, 2)]
        return rho_dot_residual(series, worked_params, energies)[0]

    assert residual(1e-2) / residual(5e-3) == pytest.approx(4.0, rel=0.1)


def test_rho_dot_residual_input_checks(solution, worked_params, energies):
    with pytest.raises(InsufficientDataError):
        rho_dot_residual([solution.state(0.0), solution.state(0.1)], worked_params, energies)
    uneven = [solution.state(t) for t in (0.0, 0.1, 0.3)]
    with pytest.raises(InvalidInputError):
        rho_dot_residual(uneven, worked_params, energies)


def test_density_of_pure_pair():
    sv = StateVectorPair(psi=np.array([1.0, 0.0]), phi=np.array([1.0, 0.0]), t=0.0)
    dm = density(sv, 2.0)
    assert purity(dm) == pytest.approx(1.0)
    assert dm.rank() == 1
