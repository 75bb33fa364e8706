import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmontyhall import qlinalg as ql
from qmontyhall.protocol import discard_effects, prepare_psi0

A, B, C = (ql.basis_ket(i, 3) for i in range(3))


def test_inner_basis_and_psi0():
    assert ql.inner(A, A) == pytest.approx(1)
    assert ql.inner(A, B) == 0
    assert ql.inner(A, prepare_psi0()).real == pytest.approx(0.5773502692, abs=1e-10)


def test_inner_conjugates_first_argument():
    a = np.array([1j, 0])
    b = np.array([1, 0])
    assert ql.inner(a, b) == pytest.approx(-1j)


def test_inner_dimension_mismatch():
    with pytest.raises(ql.DimensionError):
        ql.inner(A, ql.basis_ket(0, 2))


def test_apply_examples():
    psi0 = prepare_psi0()
    f1, _ = discard_effects()
    np.testing.assert_allclose(ql.apply(np.eye(3), psi0), psi0)
    np.testing.assert_allclose(ql.apply(f1, psi0), (A + C) / (2 * np.sqrt(3)), atol=1e-15)
    np.testing.assert_allclose(ql.apply(ql.outer(A), B), np.zeros(3))
    with pytest.raises(ql.DimensionError):
        ql.apply(np.eye(2), psi0)


def test_positive_semidefinite_examples():
    f1, f2 = discard_effects()
    assert ql.is_positive_semidefinite(f1)
    assert ql.is_positive_semidefinite(f2)
    assert not ql.is_positive_semidefinite(-np.eye(3))
    # |A><B| + |B><A| restricted to span{A,B} is [[0,1],[1,0]]: eigenvalues +1 and -1
    assert not ql.is_positive_semidefinite(ql.outer(A, B) + ql.outer(B, A))
    assert not ql.is_positive_semidefinite(np.array([[1, 1], [0, 1]]))  # not Hermitian


def test_is_unitary_examples():
    assert ql.is_unitary(np.eye(6))
    assert not ql.is_unitary(2 * np.eye(6))
    assert not ql.is_unitary(np.ones((2, 3)))


def test_complete_isometry_single_column():
    w = ql.complete_isometry([ql.basis_ket(0, 2)], 2)
    assert ql.is_unitary(w)
    np.testing.assert_allclose(w[:, 0], [1, 0])


def test_complete_isometry_rejects_duplicates():
    with pytest.raises(ql.NotOrthonormalError) as info:
        ql.complete_isometry([A, A], 3)
    assert info.value.deviation == pytest.approx(1.0)


def test_complete_isometry_is_deterministic():
    cols = [prepare_psi0()]
    np.testing.assert_array_equal(ql.complete_isometry(cols, 3), ql.complete_isometry(cols, 3))


def test_complete_isometry_from_kraus_columns():
    # Kraus completeness K1^dag K1 + K2^dag K2 = I makes these columns orthonormal
    from qmontyhall.protocol import canonical_model, dilation_isometry

    iso = dilation_isometry(canonical_model().kraus)
    assert ql.gram_deviation(iso) < 1e-12
    w = ql.complete_isometry(list(iso.T), 6)
    assert ql.is_unitary(w)
    np.testing.assert_allclose(w[:, :3], iso, atol=1e-15)


def _random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 9), data=st.data())
def test_complete_isometry_property(seed, d, data):
    k = data.draw(st.integers(0, d))
    rng = np.random.default_rng(seed)
    cols = list(_random_unitary(rng, d)[:, :k].T)
    w = ql.complete_isometry(cols, d)
    assert np.max(np.abs(ql.dagger(w) @ w - np.eye(d))) <= 1e-10
    if k:
        np.testing.assert_allclose(w[:, :k], np.stack(cols, axis=1), atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 9))
def test_apply_associativity(seed, d):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    b = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    v = ql.normalize(rng.normal(size=d) + 1j * rng.normal(size=d))
    assert ql.is_normalized(v)
    scale = max(1.0, float(np.max(np.abs(a @ b))))
    np.testing.assert_allclose(ql.apply(a @ b, v), ql.apply(a, ql.apply(b, v)), atol=1e-12 * scale)


def test_global_phase_helpers():
    v = np.array([0.6, 0.8j])
    assert ql.equal_up_to_phase(v, np.exp(0.7j) * v)
    assert not ql.equal_up_to_phase(v, np.array([0.8, 0.6]))
