import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laserchan.errors import PositivityError, StateValidationError, TruncationError
from laserchan.fock import (
    FockBasis,
    coherent_mixture,
    coherent_required_dim,
    coherent_state,
    diagonal_to_matrix,
    expect_a2dag_a2,
    expect_n,
    expect_n2,
    number_state,
    thermal_state,
    validate_density_matrix,
    von_neumann_entropy,
)


def test_basis_ladder_relations():
    a = FockBasis(6).annihilation()
    for m in range(1, 6):
        ket = np.zeros(6)
        ket[m] = 1
        assert np.allclose(a @ ket, math.sqrt(m) * np.eye(6)[m - 1])
    with pytest.raises(StateValidationError):
        FockBasis(0)


@pytest.mark.parametrize("n, expected", [(0, [1, 0, 0, 0]), (2, [0, 0, 1, 0])])
def test_number_state(n, expected):
    assert np.array_equal(number_state(n, 4), np.diag(expected).astype(complex))


def test_number_state_out_of_basis():
    with pytest.raises(StateValidationError):
        number_state(5, 4)


def test_coherent_vacuum():
    assert np.array_equal(coherent_state(0, 8), number_state(0, 8))


def test_coherent_z1_elements_match_high_precision():
    mp.mp.dps = 40
    # rho_mn = e^{-|z|^2} z^m conj(z)^n / sqrt(m! n!)
    exact = [[mp.e ** -1 / mp.sqrt(mp.factorial(m) * mp.factorial(n)) for n in range(3)] for m in range(3)]
    rho = coherent_state(1.0, 32)
    for m in range(3):
        for n in range(3):
            assert abs(rho[m, n] - float(exact[m][n])) < 1e-15
    assert rho[0, 0].real == pytest.approx(0.367879441171442, abs=1e-15)


def test_coherent_truncation_error_carries_required_dim():
    mp.mp.dps = 40
    tail = 1 - mp.fsum(mp.e ** -16 * mp.mpf(16) ** k / mp.factorial(k) for k in range(8))
    assert tail > 1e-10
    with pytest.raises(TruncationError) as info:
        coherent_state(4, 8)
    need = info.value.required_dim
    brute = 1 - mp.fsum(mp.e ** -16 * mp.mpf(16) ** k / mp.factorial(k) for k in range(need))
    assert brute <= 1e-10
    coherent_state(4, need)


def test_thermal_examples():
    assert np.array_equal(thermal_state(0, 4), [1, 0, 0, 0])
    p = thermal_state(1, 64)
    assert p[:3] == pytest.approx([0.5, 0.25, 0.125], abs=1e-15)
    with pytest.raises(TruncationError):
        thermal_state(1, 2)


def test_mixture_examples():
    assert np.allclose(coherent_mixture([1], [0], 4), number_state(0, 4))
    rho = coherent_mixture([0.5, 0.5], [1, -1], 32)
    assert np.trace(rho).real == pytest.approx(1, abs=1e-14)
    assert expect_n(rho) == pytest.approx(1, abs=1e-12)
    with pytest.raises(StateValidationError):
        coherent_mixture([0.7, 0.4], [1, -1], 32)
    with pytest.raises(StateValidationError):
        coherent_mixture([1.5, -0.5], [1, -1], 32)


def test_moments():
    assert (expect_n(number_state(0, 4)), expect_n2(number_state(0, 4)), expect_a2dag_a2(number_state(0, 4))) == (0, 0, 0)
    r2 = number_state(2, 4)
    assert (expect_n(r2), expect_n2(r2), expect_a2dag_a2(r2)) == (2, 4, 2)
    rho = coherent_state(1.0, 32)
    # Poisson(1) moments by brute-force summation in high precision
    mp.mp.dps = 40
    pk = [mp.e ** -1 / mp.factorial(k) for k in range(60)]
    n1 = float(mp.fsum(k * p for k, p in enumerate(pk)))
    n2 = float(mp.fsum(k * k * p for k, p in enumerate(pk)))
    assert (n1, n2) == pytest.approx((1, 2), abs=1e-15)
    assert expect_n(rho) == pytest.approx(n1, abs=1e-12)
    assert expect_n2(rho) == pytest.approx(n2, abs=1e-12)
    assert expect_a2dag_a2(rho) == pytest.approx(n2 - n1, abs=1e-12)


def test_entropy_examples():
    for n in range(4):
        assert von_neumann_entropy(number_state(n, 4)) == 0
    assert von_neumann_entropy(np.diag([0.5, 0.5])) == pytest.approx(math.log(2), abs=1e-15)
    mp.mp.dps = 40
    brute = -mp.fsum(mp.mpf(2) ** -(j + 1) * mp.log(mp.mpf(2) ** -(j + 1)) for j in range(400))
    assert float(brute) == pytest.approx(1.386294361119891, abs=1e-15)
    assert von_neumann_entropy(thermal_state(1, 64)) == pytest.approx(float(brute), abs=1e-9)
    assert von_neumann_entropy(diagonal_to_matrix(thermal_state(1, 64))) == pytest.approx(float(brute), abs=1e-9)


def test_entropy_uses_eigenvalues_for_coherences():
    psi = np.array([1, 1j]) / math.sqrt(2)
    pure = np.outer(psi, psi.conj())
    assert von_neumann_entropy(pure) == pytest.approx(0, abs=1e-12)


def test_entropy_rejects_negative_eigenvalues():
    with pytest.raises(PositivityError):
        von_neumann_entropy(np.diag([1.1, -0.1]))


def test_validate_density_matrix_rejects_bad_input():
    with pytest.raises(StateValidationError):
        validate_density_matrix(np.array([[0.5, 0.1], [0.2, 0.5]]))
    with pytest.raises(StateValidationError):
        validate_density_matrix(np.diag([0.5, 0.6]))
    with pytest.raises(PositivityError):
        validate_density_matrix(np.diag([1.2, -0.2]))


amplitudes = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(z=amplitudes)
def test_coherent_state_is_valid_and_has_mean_abs_z_squared(z):
    rho = coherent_state(z, coherent_required_dim(z))
    validate_density_matrix(rho)
    assert expect_n(rho) == pytest.approx(abs(z) ** 2, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(nbar=st.floats(0, 5), n=st.integers(0, 20))
def test_constructors_are_valid(nbar, n):
    p = thermal_state(nbar, 300)
    validate_density_matrix(diagonal_to_matrix(p))
    validate_density_matrix(number_state(n, n + 1))


@settings(max_examples=30, deadline=None)
@given(p=st.lists(st.floats(0, 1), min_size=2, max_size=12).filter(lambda v: sum(v) > 1e-3), seed=st.integers(0, 2**31))
def test_entropy_invariant_under_relabelling(p, seed):
    p = np.array(p) / sum(p)
    perm = np.random.default_rng(seed).permutation(p.size)
    assert von_neumann_entropy(diagonal_to_matrix(p[perm])) == pytest.approx(von_neumann_entropy(p), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(
    w=st.lists(st.floats(0.05, 1), min_size=2, max_size=4),
    zs=st.lists(amplitudes, min_size=4, max_size=4),
    thermal=st.floats(0, 2),
)
def test_entropy_concavity(w, zs, thermal):
    w = np.array(w) / sum(w)
    dim = 128
    # mix displaced-looking components: coherent states and one thermal state
    comps = [coherent_state(z, dim) for z in zs[: len(w) - 1]] + [diagonal_to_matrix(thermal_state(thermal, dim))]
    rho = sum(wk * c for wk, c in zip(w, comps))
    lhs = von_neumann_entropy(rho)
    rhs = sum(wk * von_neumann_entropy(c) for wk, c in zip(w, comps))
    assert lhs >= rhs - 1e-10
