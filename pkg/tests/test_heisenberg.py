import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laserchan.channel import LaserParams, evolve_auto, evolve_fock
from laserchan.errors import DivergenceError, DomainError, RegimeError, UndefinedObservableError
from laserchan.fock import coherent_state, expect_a2dag_a2, expect_n, number_state
from laserchan.heisenberg import (
    evolved_exp_lambda_n,
    evolved_normal_moment,
    expected_n,
    g2,
    g2_infinity,
    moment_coefficients,
    moment_growth_rate,
)

REGIMES = [LaserParams(1, 2), LaserParams(2, 1), LaserParams(1, 1), LaserParams(0, 1), LaserParams(0.5, 0)]


def random_state(rng, dim):
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


@pytest.mark.parametrize("params", REGIMES)
@pytest.mark.parametrize("t", [0.0, 0.3, 2.0])
def test_lambda_zero_gives_identity(params, t):
    op = evolved_exp_lambda_n(params, t, 0.0)
    assert op.prefactor == pytest.approx(1, abs=1e-12)
    assert op.exponent_coeff == pytest.approx(1, abs=1e-12)


def test_generating_function_duality():
    params, t, lam = LaserParams(1, 2), 0.5, 0.1
    op = evolved_exp_lambda_n(params, t, lam)
    rng = np.random.default_rng(1)
    for _ in range(5):
        rho0 = random_state(rng, 6)
        rho_t = evolve_fock(rho0, params, t, 64)
        direct = float(np.dot(np.exp(lam * np.arange(64)), np.real(np.diagonal(rho_t))))
        assert op.expect(rho0) == pytest.approx(direct, abs=1e-9)


def test_generating_function_divergence():
    with pytest.raises(DivergenceError):
        evolved_exp_lambda_n(LaserParams(1, 2), math.inf, math.log(2))
    evolved_exp_lambda_n(LaserParams(1, 2), 50.0, math.log(2) - 1e-6)


def test_first_moment_examples():
    assert evolved_normal_moment(LaserParams(2, 1), 0.0, 1) == (1.0, 0.0)
    for t in (0.1, 0.7, 3.0):
        alpha, beta = evolved_normal_moment(LaserParams(1, 2), t, 1)
        assert alpha == pytest.approx(math.exp(-2 * t), rel=1e-14)
        assert beta == pytest.approx(1 - math.exp(-2 * t), rel=1e-13)


def test_first_moment_against_evolved_diagonal():
    params, t = LaserParams(1, 2), 0.7
    rho = evolve_fock(number_state(3, 4), params, t, 64)
    alpha, beta = evolved_normal_moment(params, t, 1)
    assert expect_n(rho) == pytest.approx(3 * alpha + beta, abs=1e-12)


def test_second_moment_duality():
    params, t = LaserParams(2, 1), 0.3
    c0, c1, c2 = evolved_normal_moment(params, t, 2)
    rng = np.random.default_rng(2)
    for _ in range(5):
        rho0 = random_state(rng, 6)
        rho_t = evolve_fock(rho0, params, t, 160)
        lhs = c0 + c1 * expect_n(rho0) + c2 * expect_a2dag_a2(rho0)
        assert lhs == pytest.approx(expect_a2dag_a2(rho_t), abs=1e-8)


def test_unsupported_order():
    with pytest.raises(NotImplementedError):
        evolved_normal_moment(LaserParams(1, 2), 0.5, 3)


def test_moment_coefficients_at_zero():
    mc = moment_coefficients(LaserParams(1, 3), 0.0)
    assert (mc.alpha, mc.beta, mc.c0, mc.c1, mc.c2) == (1, 0, 0, 0, 1)


@pytest.mark.parametrize("params", REGIMES)
@pytest.mark.parametrize("t", [0.2, 1.1])
def test_moment_coefficients_match_generating_function_derivative(params, t):
    # eigenvalue on |n> is prefactor * coeff^n; at lambda = 0 its slope is n * coeff' + prefactor'
    h = 1e-5
    plus = evolved_exp_lambda_n(params, t, h)
    minus = evolved_exp_lambda_n(params, t, -h)
    alpha, beta = evolved_normal_moment(params, t, 1)
    assert (plus.exponent_coeff - minus.exponent_coeff) / (2 * h) == pytest.approx(alpha, abs=1e-6)
    assert (plus.prefactor - minus.prefactor) / (2 * h) == pytest.approx(beta, abs=1e-6)


def test_expected_n_examples():
    assert expected_n(LaserParams(2, 1), 0.0, 3.5) == 3.5
    assert expected_n(LaserParams(1, 2), math.inf, 7.0) == pytest.approx(1.0, abs=1e-15)
    assert expected_n(LaserParams(2, 1), 0.5, 1.0) == pytest.approx(3 * math.e - 2, rel=1e-14)
    assert 3 * math.e - 2 == pytest.approx(6.154845, abs=1e-6)
    rho = evolve_fock(number_state(1, 2), LaserParams(2, 1), 0.5, 128)
    assert expect_n(rho) == pytest.approx(3 * math.e - 2, rel=1e-10)


def test_expected_n_balanced_limit():
    for t in (0.0, 0.4, 2.0):
        assert expected_n(LaserParams(1.5, 1.5), t, 2.0) == pytest.approx(2.0 + 3.0 * t, rel=1e-14)


def test_g2_examples():
    assert g2(LaserParams(2, 1), 0.8, 3.0, 2.0) == 2.0
    assert g2(LaserParams(1, 2), math.inf, 3.0, 1.0) == 2.0
    assert g2(LaserParams(1, 2), 20.0, 3.0, 1.0) == pytest.approx(2.0, abs=1e-12)
    late = g2(LaserParams(2, 1), 30.0, 4.0, 1.0)
    assert late == pytest.approx(2 - 1 / 1.5**2, abs=1e-12)


def test_g2_matches_evolved_coherent_state():
    params = LaserParams(2, 1)
    rho0 = coherent_state(2, 40)
    for t in (0.2, 0.6):
        rho, _ = evolve_auto(evolve_fock, rho0, params, t, 64)
        numeric = expect_a2dag_a2(rho) / expect_n(rho) ** 2
        assert g2(params, t, expect_n(rho0), expect_a2dag_a2(rho0) / expect_n(rho0) ** 2) == pytest.approx(numeric, abs=1e-8)


def test_g2_errors():
    with pytest.raises(UndefinedObservableError):
        g2(LaserParams(1, 2), 1.0, 0.0, 2.0)
    with pytest.raises(DomainError):
        g2(LaserParams(1, 2), 1.0, 2.0, 0.2)


def test_g2_infinity():
    assert g2_infinity(LaserParams(2, 1), 4.0, 1.0) == pytest.approx(1.555556, abs=1e-6)
    assert g2_infinity(LaserParams(2, 1), 4.0, 2.0) == 2.0
    with pytest.raises(RegimeError):
        g2_infinity(LaserParams(1, 2), 4.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(g=st.floats(0.01, 5), excess=st.floats(0.01, 5), n0=st.floats(1e-3, 100), spread=st.floats(0, 5))
def test_g2_infinity_is_bunched(g, excess, n0, spread):
    params = LaserParams(g + excess, g)
    g2_0 = 1 - 1 / n0 + spread
    assert g2_infinity(params, n0, g2_0) > 1


@settings(max_examples=200, deadline=None)
@given(g=st.floats(0, 3), kappa=st.floats(0.01, 3), t=st.floats(0, 3), n0=st.floats(0.01, 50), spread=st.floats(0, 3))
def test_g2_closed_form_equals_moment_ratio(g, kappa, t, n0, spread):
    params = LaserParams(g, kappa)
    g2_0 = 1 - 1 / n0 + spread
    mc = moment_coefficients(params, t)
    ratio = mc.normal2(n0, g2_0 * n0**2) / mc.mean(n0) ** 2
    assert g2(params, t, n0, g2_0) == pytest.approx(ratio, rel=1e-10, abs=1e-10)


def test_moment_growth_rate():
    assert moment_growth_rate(LaserParams(2, 1), 1) == 2
    assert moment_growth_rate(LaserParams(2, 1), 2) == 4
    with pytest.raises(RegimeError):
        moment_growth_rate(LaserParams(1, 2), 1)
