import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigenpool.linalg import ShapeError, matmul, symmetric_eigh

SQRT5 = math.sqrt(5.0)


def test_matmul_identity():
    out = matmul([[1, 0], [0, 1]], [[3], [4]])
    assert out.tolist() == [[3], [4]]


def test_matmul_dot_product():
    out = matmul([[1, 2]], [[1], [2]])
    assert out.tolist() == [[5]]


def test_matmul_column_swap():
    out = matmul([[1, 2], [3, 4]], [[0, 1], [1, 0]])
    assert out.tolist() == [[2, 1], [4, 3]]


def test_matmul_shape_mismatch():
    with pytest.raises(ShapeError):
        matmul([[1, 2]], [[1, 2]])


def test_matmul_rejects_non_finite():
    with pytest.raises(ValueError):
        matmul([[np.nan, 1]], [[1], [1]])


def test_eigh_identity_is_degenerate_subspace():
    values, vectors = symmetric_eigh(np.eye(2))
    assert np.allclose(values, [1.0, 1.0])
    # any orthonormal pair is fine; compare spanned subspaces via projectors
    assert np.allclose(vectors @ vectors.T, np.eye(2), atol=1e-12)


def test_eigh_rank_one_hand_decomposition():
    # characteristic polynomial of [[1,2],[2,4]] is l^2 - 5l = 0
    values, vectors = symmetric_eigh([[1, 2], [2, 4]])
    assert np.allclose(values, [5.0, 0.0], atol=1e-12)
    assert np.allclose(vectors[:, 0], [1.0 / SQRT5, 2.0 / SQRT5], atol=1e-12)


def test_eigh_diagonal():
    values, vectors = symmetric_eigh([[2, 0], [0, 3]])
    assert np.allclose(values, [3.0, 2.0], atol=1e-12)
    assert np.allclose(vectors[:, 0], [0.0, 1.0], atol=1e-12)
    assert np.allclose(vectors[:, 1], [1.0, 0.0], atol=1e-12)


def test_eigh_sign_ties_take_earliest_index():
    # eigenvectors of [[0,1],[1,0]] have equal-magnitude entries; the
    # earliest index decides the sign
    values, vectors = symmetric_eigh([[0, 1], [1, 0]])
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    assert np.allclose(values, [1.0, -1.0], atol=1e-12)
    assert np.allclose(vectors[:, 0], [inv_sqrt2, inv_sqrt2], atol=1e-12)
    assert np.allclose(vectors[:, 1], [inv_sqrt2, -inv_sqrt2], atol=1e-12)


def test_eigh_rejects_non_square():
    with pytest.raises(ShapeError):
        symmetric_eigh(np.zeros((2, 3)))


def test_eigh_rejects_non_finite():
    with pytest.raises(ValueError):
        symmetric_eigh([[np.inf, 0], [0, 1]])


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=32), st.integers(min_value=0, max_value=2**31 - 1))
def test_eigh_reconstruction_and_orthonormality(size, seed):
    rng = np.random.default_rng(seed)
    m = rng.uniform(-1.0, 1.0, (size, size))
    m = 0.5 * (m + m.T)
    values, vectors = symmetric_eigh(m)
    rebuilt = (vectors * values) @ vectors.T
    assert np.max(np.abs(rebuilt - m)) <= 1e-7
    gram = vectors.T @ vectors
    assert np.max(np.abs(gram - np.eye(size))) <= 1e-9
    assert np.all(np.diff(values) <= 1e-12)  # descending


def test_eigh_trace_matches_eigenvalue_sum():
    rng = np.random.default_rng(11)
    for size in (2, 5, 17, 32):
        m = rng.uniform(-1.0, 1.0, (size, size))
        m = 0.5 * (m + m.T)
        values, _ = symmetric_eigh(m)
        trace = float(np.trace(m))
        assert abs(trace - float(np.sum(values))) <= 1e-8 * max(1.0, abs(trace))


def test_eigh_psd_eigenvalues_nonnegative():
    rng = np.random.default_rng(12)
    for size in (2, 8, 24):
        a = rng.uniform(-1.0, 1.0, (size, size))
        values, _ = symmetric_eigh(a.T @ a)
        assert np.min(values) >= -1e-9


def test_eigh_symmetrizes_slightly_asymmetric_input():
    m = np.array([[1.0, 2.0 + 5e-10], [2.0 - 5e-10, 4.0]])
    values, _ = symmetric_eigh(m)
    assert np.allclose(values, [5.0, 0.0], atol=1e-9)
