import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigenpool.basis import (BasisSet, TimeCovariance, accumulate, dct_basis,
                             fit_eigen, mean_weights, rank_weights, take_basis)
from eigenpool.linalg import ShapeError
from eigenpool.pooling import (FeatureSequence, concat, iter_windows,
                               l2_normalize, local_pool, pool, pool_max,
                               pool_mean, reconstruct, reconstruction_error,
                               sample_regular, window_starts)

SQRT5 = math.sqrt(5.0)


def _seq(values):
    return FeatureSequence(np.asarray(values, dtype=float))


def _fit_basis(seq, count):
    cov = accumulate(TimeCovariance.empty(seq.length), seq)
    return take_basis(fit_eigen(cov), count)


# -- sample_regular ---------------------------------------------------------------

def test_sample_regular_50_to_25_index_formula():
    seq = _seq(np.arange(50.0).reshape(1, 50))
    out = sample_regular(seq, 25)
    expected = [math.floor(l * 49 / 24 + 0.5) for l in range(25)]
    assert out.values.ravel().tolist() == [float(i) for i in expected]


def test_sample_regular_identity():
    seq = _seq(np.random.default_rng(0).normal(size=(3, 7)))
    out = sample_regular(seq, 7)
    assert np.array_equal(out.values, seq.values)


def test_sample_regular_upsamples_by_duplication():
    seq = _seq([[10.0, 20.0, 30.0]])
    out = sample_regular(seq, 5)
    assert out.values.ravel().tolist() == [10.0, 20.0, 20.0, 30.0, 30.0]


def test_sample_regular_single_takes_middle():
    seq = _seq([[1.0, 2.0, 3.0]])
    assert sample_regular(seq, 1).values.ravel().tolist() == [2.0]


# -- pool --------------------------------------------------------------------------

def test_pool_with_mean_weights():
    desc = pool(_seq([[1, 2], [3, 4]]), mean_weights(2), 1)
    assert desc.values.tolist() == [1.5, 3.5]
    assert desc.provenance == "mean:1"


def test_pool_constant_sequence_dct_high_index_is_zero():
    seq = _seq(np.full((3, 6), 7.0))
    basis = dct_basis(6, 4)
    for index in (2, 3, 4):
        desc = pool(seq, basis, index)
        assert np.max(np.abs(desc.values)) <= 1e-9


def test_pool_with_fitted_rank_one_basis():
    seq = _seq([[1.0, 2.0]])
    basis = _fit_basis(seq, 1)
    desc = pool(seq, basis, 1)
    assert abs(desc.values[0] - SQRT5) <= 1e-12
    assert desc.provenance == "eigen:1"


def test_pool_length_mismatch():
    with pytest.raises(ShapeError):
        pool(_seq([[1.0, 2.0, 3.0]]), mean_weights(2), 1)


def test_pool_index_out_of_range():
    with pytest.raises(ValueError):
        pool(_seq([[1.0, 2.0]]), mean_weights(2), 2)


def test_pool_max_examples():
    desc = pool_max(_seq([[1, 3, 2], [0, -1, 5]]))
    assert desc.values.tolist() == [3.0, 5.0]
    assert desc.provenance == "max"
    constant = _seq(np.full((2, 4), 1.25))
    assert pool_max(constant).values.tolist() == [1.25, 1.25]
    single = _seq([[4.0], [5.0]])
    assert pool_max(single).values.tolist() == [4.0, 5.0]


def test_pool_mean_examples():
    assert pool_mean(_seq([[1, 3], [0, 4]])).values.tolist() == [2.0, 2.0]
    rng = np.random.default_rng(1)
    seq = _seq(rng.normal(size=(3, 9)))
    via_pool = pool(seq, mean_weights(9), 1)
    assert np.array_equal(pool_mean(seq).values, via_pool.values)
    permuted = _seq(seq.values[:, rng.permutation(9)])
    assert np.array_equal(pool_mean(permuted).values, pool_mean(seq).values)


# -- reconstruct -------------------------------------------------------------------

def test_reconstruct_complete_basis_is_identity():
    rng = np.random.default_rng(2)
    seq = _seq(rng.normal(size=(4, 6)))
    basis = dct_basis(6, 6)
    assert np.max(np.abs(reconstruct(seq, basis).values - seq.values)) <= 1e-9


def test_reconstruct_rank_one_data_with_own_basis():
    seq = _seq([[1.0, 2.0]])
    basis = _fit_basis(seq, 1)
    assert np.max(np.abs(reconstruct(seq, basis).values - seq.values)) <= 1e-9


def test_reconstruct_orthogonal_rows_vanish():
    # constant rows are orthogonal to the antisymmetric length-2 column
    seq = _seq(np.full((3, 2), 4.0))
    only_second = BasisSet(2, dct_basis(2, 2).vectors[:, 1:2], "dct")
    rebuilt = reconstruct(seq, only_second)
    assert np.max(np.abs(rebuilt.values)) <= 1e-12


def test_reconstruct_rejects_non_orthonormal_sources():
    seq = _seq([[1.0, 2.0]])
    with pytest.raises(ValueError):
        reconstruct(seq, rank_weights(2))
    with pytest.raises(ValueError):
        reconstruct(seq, mean_weights(2))


def test_reconstruction_error_complete_basis_zero():
    rng = np.random.default_rng(3)
    seq = _seq(rng.normal(size=(3, 5)))
    assert reconstruction_error(seq, dct_basis(5, 5)) <= 1e-12


def test_reconstruction_error_rank_one_zero():
    seq = _seq([[1.0, 2.0]])
    assert reconstruction_error(seq, _fit_basis(seq, 1)) <= 1e-12


def test_reconstruction_error_matches_eigenvalue_tail():
    rng = np.random.default_rng(4)
    length = 8
    corpus = [FeatureSequence(rng.normal(size=(3, length))) for _ in range(10)]
    cov = TimeCovariance.empty(length)
    for seq in corpus:
        cov = accumulate(cov, seq)
    spectrum = fit_eigen(cov)
    for count in (1, 3, 5):
        basis = take_basis(spectrum, count)
        error = math.fsum(reconstruction_error(s, basis) for s in corpus)
        tail = float(np.sum(spectrum.eigenvalues[count:]))
        assert abs(error - tail) <= 1e-6 * tail


# -- windows -----------------------------------------------------------------------

def test_window_starts_spec_cases():
    assert window_starts(16, 16, 8) == [0]
    assert window_starts(32, 16, 8) == [0, 8, 16]
    assert window_starts(10, 16, 8) == [0]
    assert window_starts(25, 16, 8) == [0, 8, 9]


def test_local_pool_counts_and_spans():
    rng = np.random.default_rng(5)
    seq = _seq(rng.normal(size=(2, 32)))
    basis = dct_basis(16, 2)
    descs = local_pool(seq, basis, window=16, stride=8)
    assert len(descs) == 3 * 2
    assert descs[0].provenance == "dct:1@0:16"
    assert descs[-1].provenance == "dct:2@16:32"


def test_local_pool_short_sequence_duplicates():
    seq = _seq(np.arange(10.0).reshape(1, 10))
    basis = mean_weights(16)
    descs = local_pool(seq, basis, window=16, stride=8)
    assert len(descs) == 1
    expanded = sample_regular(seq, 16)
    assert abs(descs[0].values[0] - float(np.mean(expanded.values))) <= 1e-12
    assert descs[0].provenance == "mean:1@0:10"


def test_local_pool_rejects_mismatched_basis():
    seq = _seq(np.zeros((1, 20)))
    with pytest.raises(ShapeError):
        local_pool(seq, dct_basis(8, 2), window=16, stride=8)


def test_iter_windows_parameter_validation():
    seq = _seq(np.zeros((1, 20)))
    with pytest.raises(ValueError):
        iter_windows(seq, 1, 8)
    with pytest.raises(ValueError):
        iter_windows(seq, 16, 0)


# -- normalize / concat -------------------------------------------------------------

def test_l2_normalize_three_four_five():
    desc = l2_normalize(pool_max(_seq([[3.0], [4.0]])))
    assert np.allclose(desc.values, [0.6, 0.8], atol=1e-15)


def test_l2_normalize_zero_vector_unchanged():
    desc = l2_normalize(pool_max(_seq([[0.0], [0.0]])))
    assert desc.values.tolist() == [0.0, 0.0]


def test_l2_normalize_idempotent_on_unit_vectors():
    desc = l2_normalize(pool_max(_seq([[3.0], [4.0]])))
    again = l2_normalize(desc)
    assert np.max(np.abs(again.values - desc.values)) <= 1e-12


def test_concat_examples():
    a = pool_max(_seq([[1.0], [2.0]]))
    assert concat([a]).values.tolist() == [1.0, 2.0]
    b = pool_max(_seq([[3.0]]))
    joined = concat([a, b])
    assert joined.values.tolist() == [1.0, 2.0, 3.0]
    assert joined.provenance == "max+max"
    with pytest.raises(ValueError):
        concat([])


def test_concat_three_bases_triples_dimension():
    rng = np.random.default_rng(6)
    seq = _seq(rng.normal(size=(5, 8)))
    basis = dct_basis(8, 3)
    joined = concat([pool(seq, basis, j) for j in (1, 2, 3)])
    assert joined.dim == 15
    assert joined.provenance == "dct:1+dct:2+dct:3"


# -- invariants ----------------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1),
       st.integers(min_value=1, max_value=6),
       st.integers(min_value=2, max_value=20))
def test_pool_linearity(seed, dim, length):
    rng = np.random.default_rng(seed)
    first = rng.normal(size=(dim, length))
    second = rng.normal(size=(dim, length))
    alpha, beta = rng.normal(size=2)
    basis = dct_basis(length, min(3, length))
    for index in range(1, basis.count + 1):
        mixed = pool(_seq(alpha * first + beta * second), basis, index).values
        separate = (alpha * pool(_seq(first), basis, index).values
                    + beta * pool(_seq(second), basis, index).values)
        assert np.max(np.abs(mixed - separate)) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_feature_permutation_equivariance(seed):
    rng = np.random.default_rng(seed)
    seq = rng.normal(size=(6, 9))
    perm = rng.permutation(6)
    basis = dct_basis(9, 3)
    for index in (1, 2, 3):
        direct = pool(_seq(seq), basis, index).values[perm]
        permuted = pool(_seq(seq[perm]), basis, index).values
        assert np.array_equal(direct, permuted)
    assert np.array_equal(pool_max(_seq(seq)).values[perm],
                          pool_max(_seq(seq[perm])).values)
    assert np.array_equal(pool_mean(_seq(seq)).values[perm],
                          pool_mean(_seq(seq[perm])).values)


def test_dct_time_reversal_parity():
    # reversing time negates odd-frequency coefficients (even 1-based
    # indices 2, 4, ...) and preserves even-frequency ones
    rng = np.random.default_rng(7)
    seq = rng.normal(size=(4, 12))
    basis = dct_basis(12, 6)
    for index in range(1, 7):
        forward = pool(_seq(seq), basis, index).values
        reverse = pool(_seq(seq[:, ::-1]), basis, index).values
        frequency = index - 1
        expected = -forward if frequency % 2 == 1 else forward
        assert np.max(np.abs(reverse - expected)) <= 1e-9


def test_max_pool_invariant_under_column_permutation():
    rng = np.random.default_rng(8)
    seq = rng.normal(size=(3, 10))
    shuffled = seq[:, rng.permutation(10)]
    assert np.array_equal(pool_max(_seq(seq)).values,
                          pool_max(_seq(shuffled)).values)


def test_order_sensitive_poolings_change_under_reversal():
    ramp = np.arange(8.0).reshape(1, 8)
    reversed_ramp = ramp[:, ::-1]
    rank_fwd = pool(_seq(ramp), rank_weights(8), 1).values
    rank_rev = pool(_seq(reversed_ramp), rank_weights(8), 1).values
    assert np.max(np.abs(rank_fwd - rank_rev)) > 1e-6
    basis = dct_basis(8, 2)
    dct_fwd = pool(_seq(ramp), basis, 2).values
    dct_rev = pool(_seq(reversed_ramp), basis, 2).values
    assert np.max(np.abs(dct_fwd - dct_rev)) > 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1),
       st.integers(min_value=1, max_value=5),
       st.integers(min_value=1, max_value=16))
def test_parseval_energy_identity(seed, dim, length):
    rng = np.random.default_rng(seed)
    seq = _seq(rng.normal(size=(dim, length)))
    frob = float(np.sum(seq.values ** 2))
    for basis in (dct_basis(length, length),
                  _fit_basis(seq, length)):
        energy = math.fsum(float(np.sum(pool(seq, basis, j).values ** 2))
                           for j in range(1, length + 1))
        assert abs(energy - frob) <= 1e-8 * max(frob, 1e-12)
