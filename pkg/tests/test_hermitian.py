import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lazyens.errors import Degenerate, NotHermitian, NotPositive, NotSquare, NotUnitary, NotUnitTrace
from lazyens.hermitian import conjugate, eigh, random_density, random_unitary, validate_density
from oracles import hermitian_eigenvalues_small


def random_hermitian(n, rng, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (a + a.conj().T) / 2


def test_validate_maximally_mixed():
    rho = validate_density(np.eye(2) / 2)
    assert rho.min_eigenvalue == pytest.approx(0.5, abs=1e-15)


def test_validate_rejects_zero_eigenvalue():
    with pytest.raises(Degenerate):
        validate_density(np.diag([1.0, 0.0]))


def test_validate_rejects_bad_trace():
    with pytest.raises(NotUnitTrace):
        validate_density(np.diag([0.7, 0.4]))


def test_validate_rejects_non_hermitian():
    m = np.array([[0.5, 0.1], [0.2, 0.5]])
    with pytest.raises(NotHermitian):
        validate_density(m)


def test_validate_rejects_negative():
    with pytest.raises(NotPositive):
        validate_density(np.diag([1.2, -0.2]))


def test_validate_rejects_non_square():
    with pytest.raises(NotSquare):
        validate_density(np.ones((2, 3)) / 3)


def test_validate_symmetrizes_within_tolerance():
    m = np.array([[0.5, 0.1 + 1e-13], [0.1, 0.5]])
    rho = validate_density(m)
    assert np.array_equal(rho.matrix, rho.matrix.conj().T)


def test_validate_tolerance_is_a_parameter():
    m = np.diag([0.999, 0.001])
    validate_density(m)
    with pytest.raises(Degenerate):
        validate_density(m, tol=0.01)


@given(
    n=st.integers(1, 6),
    lam_min=st.floats(1e-6, 0.1),
    seed=st.integers(0, 2**32 - 1),
)
def test_validate_accepts_constructed_states(n, lam_min, seed):
    rng = np.random.default_rng(seed)
    lam_min = min(lam_min, 0.9 / n)
    rho = random_density(n, rng, lam_min)
    out = validate_density(rho)
    assert out.min_eigenvalue >= lam_min - 1e-12


@given(
    n=st.integers(2, 6),
    neg=st.floats(1e-8, 0.5),
    seed=st.integers(0, 2**32 - 1),
)
def test_validate_rejects_constructed_negative(n, neg, seed):
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(n - 1)) * (1 + neg)
    lam = np.concatenate([[-neg], w])
    u = random_unitary(n, rng)
    m = (u * lam) @ u.conj().T
    with pytest.raises(NotPositive):
        validate_density(m)


@given(
    n=st.integers(1, 6),
    delta=st.floats(1e-9, 0.5),
    sign=st.sampled_from([-1, 1]),
    seed=st.integers(0, 2**32 - 1),
)
def test_validate_rejects_constructed_trace(n, delta, sign, seed):
    rng = np.random.default_rng(seed)
    m = random_density(n, rng, 0.01 / n) * (1 + sign * delta)
    with pytest.raises(NotUnitTrace):
        validate_density(m)


def test_eigh_diagonal_swaps():
    sd = eigh(np.diag([3.0, 1.0]))
    np.testing.assert_allclose(sd.eigenvalues, [1.0, 3.0])
    np.testing.assert_allclose(np.abs(sd.eigenvectors), [[0, 1], [1, 0]])


@pytest.mark.parametrize("n", [1, 2, 4, 7])
def test_eigh_identity(n):
    sd = eigh(np.eye(n))
    np.testing.assert_allclose(sd.eigenvalues, np.ones(n))
    assert np.linalg.norm(sd.reconstruct() - np.eye(n)) <= 1e-10


@pytest.mark.parametrize("n", [1, 2, 3])
def test_eigh_matches_characteristic_polynomial(n, rng):
    for _ in range(20):
        a = random_hermitian(n, rng)
        np.testing.assert_allclose(eigh(a).eigenvalues, hermitian_eigenvalues_small(a), atol=1e-10)


@given(n=st.integers(1, 9), scale=st.floats(1e-3, 1e3), seed=st.integers(0, 2**32 - 1))
def test_eigh_reconstruction_and_unitarity(n, scale, seed):
    a = random_hermitian(n, np.random.default_rng(seed), scale)
    sd = eigh(a)
    assert np.all(np.diff(sd.eigenvalues) >= 0)
    assert np.linalg.norm(sd.reconstruct() - a) <= 1e-10 * max(1.0, np.linalg.norm(a))
    u = sd.eigenvectors
    assert np.linalg.norm(u.conj().T @ u - np.eye(n)) <= 1e-10


def test_eigh_random_five(rng):
    a = random_hermitian(5, rng)
    sd = eigh(a)
    assert np.linalg.norm(sd.reconstruct() - a) <= 1e-10


def test_eigh_degenerate_block(rng):
    u = random_unitary(4, rng)
    a = (u * np.array([1.0, 1.0, 1.0, 2.0])) @ u.conj().T
    sd = eigh(a)
    np.testing.assert_allclose(sd.eigenvalues, [1, 1, 1, 2], atol=1e-12)


def test_conjugate_identity(rng):
    b = random_hermitian(3, rng)
    np.testing.assert_allclose(conjugate(b, np.eye(3)), b, atol=1e-15)


def test_conjugate_permutation():
    swap = np.array([[0, 1], [1, 0]])
    np.testing.assert_allclose(conjugate(np.diag([2.0, 5.0]), swap), np.diag([5.0, 2.0]))


def test_conjugate_rejects_nonunitary():
    with pytest.raises(NotUnitary):
        conjugate(np.eye(2), np.array([[1.0, 0.1], [0.0, 1.0]]))


@given(seed=st.integers(0, 2**32 - 1))
def test_conjugate_preserves_spectrum(seed):
    rng = np.random.default_rng(seed)
    b = random_hermitian(4, rng)
    c = conjugate(b, random_unitary(4, rng))
    assert np.allclose(c, c.conj().T, atol=0)
    np.testing.assert_allclose(eigh(c).eigenvalues, eigh(b).eigenvalues, atol=1e-9)


def test_spectral_data_is_read_only():
    sd = eigh(np.diag([1.0, 2.0]))
    with pytest.raises(ValueError):
        sd.eigenvalues[0] = 5.0
