import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptstar.cryptoherm import build_h4, solve_metric_space
from ptstar.errors import DimensionError
from ptstar.linalg import eigenvalues, is_positive_definite, lu_determinant, real_null_space

from .conftest import charpoly_roots


def test_determinant_examples():
    assert lu_determinant(np.eye(3)) == pytest.approx(1.0)
    assert lu_determinant(np.diag([2.0, 3.0, 4.0])) == pytest.approx(24.0)
    assert lu_determinant([[0, 1], [1, 0]]) == pytest.approx(-1.0)


def test_determinant_rejects_non_square():
    with pytest.raises(DimensionError):
        lu_determinant(np.ones((2, 3)))


def test_eigenvalue_examples():
    np.testing.assert_allclose(eigenvalues(np.diag([5.0, 1.0])), [1, 5])
    np.testing.assert_allclose(eigenvalues([[0, 1], [-1, 0]]), [-1j, 1j], atol=1e-14)


def test_h4_at_zero_matches_characteristic_polynomial():
    h = build_h4(0.0).matrix
    oracle = charpoly_roots(h)
    np.testing.assert_allclose(oracle.real, [0.381966, 1.381966, 2.618034, 3.618034], atol=1e-6)
    np.testing.assert_allclose(eigenvalues(h), oracle, atol=1e-12)
    closed = 2 - 2 * np.cos(np.arange(1, 5) * np.pi / 5)
    np.testing.assert_allclose(np.sort(closed), oracle.real, atol=1e-12)


def test_eigenvalue_cap():
    with pytest.raises(DimensionError):
        eigenvalues(np.eye(5), cap=4)


def test_positive_definite_examples():
    assert is_positive_definite(np.diag([0.5, 0.5, 1.5, 1.5]))
    ex = is_positive_definite(np.fliplr(np.eye(4)))
    assert not ex
    assert ex.min_eigenvalue == pytest.approx(-1.0)
    assert not is_positive_definite(np.zeros((3, 3)))


def test_non_hermitian_is_not_positive():
    res = is_positive_definite(np.array([[2.0, 1.0], [0.0, 2.0]]))
    assert not res and res.hermiticity_defect == 1.0


def test_null_space_examples():
    assert real_null_space(np.eye(2)).shape == (2, 0)
    v = real_null_space(np.array([[1.0, -1.0]]))
    assert v.shape == (2, 1)
    np.testing.assert_allclose(np.abs(v[:, 0]), [2**-0.5, 2**-0.5])


def test_sylvester_kernel_dimension_four():
    assert solve_metric_space(build_h4(0.5)).dimension == 4


def _cmat(rng, n):
    r = rng.uniform(0, 1, (n, n)) * np.exp(2j * np.pi * rng.uniform(0, 1, (n, n)))
    return r


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_determinant_is_multiplicative(seed):
    rng = np.random.default_rng(seed)
    a, b = _cmat(rng, 5), _cmat(rng, 5)
    dab = lu_determinant(a @ b)
    assert abs(dab - lu_determinant(a) * lu_determinant(b)) <= 1e-10 * max(abs(dab), 1e-300) + 1e-14


@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
@settings(max_examples=40, deadline=None)
def test_trace_equals_eigenvalue_sum(seed, n):
    m = _cmat(np.random.default_rng(seed), n)
    assert abs(eigenvalues(m).sum() - np.trace(m)) <= 1e-10 * max(np.linalg.norm(m), 1.0)


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(2, 8))
@settings(max_examples=40, deadline=None)
def test_null_space_vectors_are_annihilated(seed, rank, cols):
    rng = np.random.default_rng(seed)
    rank = min(rank, cols)
    a = rng.normal(size=(7, rank)) @ rng.normal(size=(rank, cols))
    v = real_null_space(a)
    assert v.shape[1] == cols - rank
    np.testing.assert_allclose(v.T @ v, np.eye(v.shape[1]), atol=1e-12)
    for col in v.T:
        assert np.linalg.norm(a @ col) <= 10 * 1e-9 * np.linalg.norm(a, 2)


@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
@settings(max_examples=30, deadline=None)
def test_positive_definite_agrees_with_quadratic_form_probe(seed, n):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = x @ x.conj().T - rng.uniform(0, 2) * np.eye(n) * np.trace(x @ x.conj().T).real / n
    h = 0.5 * (h + h.conj().T)
    verdict = is_positive_definite(h)
    probes = rng.normal(size=(1000, n)) + 1j * rng.normal(size=(1000, n))
    probes /= np.linalg.norm(probes, axis=1, keepdims=True)
    forms = np.einsum("ij,jk,ik->i", probes.conj(), h, probes).real
    if verdict:
        assert np.all(forms > 0)
    assert (verdict.min_eigenvalue > 0) == bool(verdict)
    if np.any(forms <= 0):
        assert not verdict
