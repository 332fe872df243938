import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from nlqm.errors import InvalidInputError, InvalidNormError, UnsupportedReparameterizationError
from nlqm.params import (
    ModelParams,
    coupling_matrix,
    derive,
    equations_of_motion,
    tau_delta_rhs,
    validate,
)

finite = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)


def test_from_mapping_uses_json_keys():
    params = ModelParams.from_mapping({"a": 1, "b": 2, "lambda": 0.5, "N": 3})
    assert params.lam == 0.5
    assert params.n_norm == 3.0
    assert params.to_mapping()["lambda"] == 0.5


def test_from_mapping_rejects_unknown_keys():
    with pytest.raises(InvalidInputError):
        ModelParams.from_mapping({"a": 1, "gamma": 2})


def test_validate_flags():
    vp = validate(ModelParams(b=1.0, mu=-0.5, n_norm=2.0))
    assert vp.bounded
    assert not vp.original_model
    assert not vp.case2
    assert validate(ModelParams(b=1.0, mu=0.0)).original_model
    assert validate(ModelParams(b=1.0, mu=-1.0)).case2
    assert not validate(ModelParams(b=1.0, mu=-1.5)).bounded


@pytest.mark.parametrize("bad", [{"a": float("nan")}, {"b": float("inf")}])
def test_validate_rejects_non_finite(bad):
    with pytest.raises(InvalidInputError):
        validate(ModelParams(**bad))


@pytest.mark.parametrize("n", [0.0, -1.0])
def test_validate_rejects_non_positive_norm(n):
    with pytest.raises(InvalidNormError):
        validate(ModelParams(b=1.0, n_norm=n))


def test_validate_warns_on_non_positive_b(caplog):
    validate(ModelParams(b=-1.0))
    assert "outside the analyzed range" in caplog.text


def test_derive_worked_example():
    dp = derive(ModelParams(a=1.0, b=1.0, mu=-0.5, n_norm=2.0))
    assert dp.p == pytest.approx(-1.0)
    assert dp.s_slope == pytest.approx(-0.5)
    assert dp.t_of_s(dp.s_of_t(3.0)) == pytest.approx(3.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.05, max_value=3.0), st.floats(min_value=-9.0, max_value=3.0))
def test_bounded_iff_p_negative(b, mu):
    vp = validate(ModelParams(b=b, mu=mu))
    assume(not vp.case2)
    assert vp.bounded == (derive(vp).p < 0)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(min_value=0.05, max_value=3.0),
    st.floats(min_value=-0.95, max_value=2.0),
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
)
def test_time_reparameterization_round_trip(b, mu_ratio, t):
    dp = derive(ModelParams(b=b, mu=mu_ratio * b))
    assert abs(dp.t_of_s(dp.s_of_t(t)) - t) <= 4e-16 * max(1.0, abs(t))
    np.testing.assert_allclose(dp.s_of_t(np.array([t, -t])), [dp.s_slope * t, -dp.s_slope * t])


def test_derive_refuses_case2():
    with pytest.raises(UnsupportedReparameterizationError):
        derive(ModelParams(b=1.0, mu=-1.0))


def test_coupling_matrix_is_hermitian_without_gain():
    params = ModelParams(a=0.4, b=0.0, mu=0.0, lam=0.7, alpha1=0.2, alpha2=0.1, beta1=0.3, beta2=-0.2)
    rng = np.random.default_rng(3)
    psi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    phi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    m = coupling_matrix(params, psi, phi)
    assert m[0, 0].imag == pytest.approx(0.0)
    assert m[1, 1].imag == pytest.approx(0.0)


@settings(max_examples=50, deadline=None)
@given(a=finite, b=finite, mu=finite, lam=finite, seed=st.integers(0, 2**16))
def test_equations_of_motion_close_on_tau_delta(a, b, mu, lam, seed):
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    phi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    n = np.vdot(psi, psi).real + np.vdot(phi, phi).real
    params = ModelParams(a=a, b=b, mu=mu, lam=lam, alpha1=0.3, beta2=-0.4, n_norm=n)
    energies = rng.standard_normal(4)
    dpsi, dphi = equations_of_motion(params, energies, psi, phi)

    gamma = np.vdot(phi, psi)
    tau = np.vdot(psi, psi).real - np.vdot(phi, phi).real
    delta = abs(gamma) ** 2
    dtau = 2.0 * np.vdot(psi, dpsi).real - 2.0 * np.vdot(phi, dphi).real
    ddelta = 2.0 * (gamma.conjugate() * (np.vdot(dphi, psi) + np.vdot(phi, dpsi))).real
    expected_dtau, expected_ddelta = tau_delta_rhs(params, tau, delta)

    scale = 1.0 + n * n * (1.0 + abs(a) + abs(b) + abs(mu) + abs(lam))
    assert math.isclose(dtau, expected_dtau, abs_tol=1e-10 * scale)
    assert math.isclose(ddelta, expected_ddelta, abs_tol=1e-10 * scale * n)
    # N is conserved
    dn = 2.0 * np.vdot(psi, dpsi).real + 2.0 * np.vdot(phi, dphi).real
    assert abs(dn) <= 1e-10 * scale
