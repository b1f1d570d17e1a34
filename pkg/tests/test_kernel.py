import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semblance import (DataError, build_feature_index, semblance_cross_gram,
                       semblance_feature_similarity, semblance_gram, semblance_gram_naive)
from semblance.kernel import SemblanceKernel

from conftest import brute_force_gram, random_dataset


class TestFeatureIndex:
    def test_binary_column_counts(self):
        ix = build_feature_index([0, 0, 1, 1, 1])
        assert (ix.below_count(0), ix.above_count(0)) == (0, 3)
        assert (ix.below_count(1), ix.above_count(1)) == (2, 0)

    def test_constant_column(self):
        ix = build_feature_index([7.0, 7.0, 7.0])
        assert ix.below_count(7.0) == 0
        assert ix.above_count(7.0) == 0

    def test_distinct_column(self):
        ix = build_feature_index([0.1, 0.2, 0.3, 0.4, 0.5])
        assert ix.below_count(0.3) == 2
        assert ix.above_count(0.3) == 2

    def test_counts_partition_n(self, rng):
        col = rng.integers(0, 5, size=40).astype(float)
        ix = build_feature_index(col)
        for v in np.unique(col):
            assert ix.below_count(v) + ix.above_count(v) + np.sum(col == v) == col.size
        below = ix.below_count(ix.sorted_values)
        above = ix.above_count(ix.sorted_values)
        assert np.all(np.diff(below) >= 0)
        assert np.all(np.diff(above) <= 0)

    def test_non_finite_rejected(self):
        with pytest.raises(DataError, match="row 2"):
            build_feature_index([1.0, 2.0, np.nan])

    def test_is_read_only(self):
        ix = build_feature_index([3.0, 1.0, 2.0])
        with pytest.raises(ValueError):
            ix.sorted_values[0] = 10


class TestFeatureSimilarity:
    def test_interval_pair(self):
        ix = build_feature_index([0.1, 0.2, 0.3, 0.4, 0.5])
        assert semblance_feature_similarity(ix, 0.2, 0.4) == 2 / 5
        assert semblance_feature_similarity(ix, 0.4, 0.2) == 2 / 5

    def test_self_similarity_distinct(self):
        n = 9
        ix = build_feature_index(np.arange(n, dtype=float))
        for x in range(n):
            assert semblance_feature_similarity(ix, x, x) == (n - 1) / n

    def test_rare_value_scores_higher(self):
        ix = build_feature_index([0, 0, 1, 1, 1])
        assert semblance_feature_similarity(ix, 0, 0) == 3 / 5
        assert semblance_feature_similarity(ix, 1, 1) == 2 / 5

    def test_constant_column_gives_zero(self):
        ix = build_feature_index([2.5, 2.5, 2.5])
        assert semblance_feature_similarity(ix, 2.5, 2.5) == 0.0

    def test_self_similarity_is_one_minus_mass(self, rng):
        col = rng.integers(0, 4, size=25).astype(float)
        ix = build_feature_index(col)
        for v in np.unique(col):
            assert semblance_feature_similarity(ix, v, v) == pytest.approx(1 - np.mean(col == v), abs=1e-15)


class TestGram:
    def test_two_objects(self):
        K = semblance_gram([[3.0], [8.0]]).entries
        np.testing.assert_array_equal(K, [[0.5, 0.0], [0.0, 0.5]])

    def test_three_by_two(self):
        X = np.array([[1, 0], [2, 0], [3, 1]], float)
        K = semblance_gram(X).entries
        assert K[0, 1] == pytest.approx(1 / 3, abs=1e-15)
        np.testing.assert_allclose(K, brute_force_gram(X), rtol=0, atol=1e-15)

    def test_constant_feature_appended(self, rng):
        X = rng.normal(size=(12, 4))
        K_old = semblance_gram(X).entries
        K_new = semblance_gram(np.hstack([X, np.full((12, 1), 3.0)])).entries
        np.testing.assert_allclose(K_new, 4 * K_old / 5, rtol=1e-15, atol=0)

    def test_single_object(self):
        np.testing.assert_array_equal(semblance_gram([[4.2]]).entries, [[0.0]])
        np.testing.assert_array_equal(semblance_gram_naive([[4.2]]).entries, [[0.0]])

    @pytest.mark.parametrize("kind", ["continuous", "discrete", "mixed"])
    def test_against_python_loops(self, rng, kind):
        X = random_dataset(rng, 11, 4, kind)
        np.testing.assert_allclose(semblance_gram(X).entries, brute_force_gram(X), rtol=0, atol=1e-15)

    def test_weighted_against_python_loops(self, rng):
        X = random_dataset(rng, 10, 5, "mixed")
        w = rng.random(5)
        np.testing.assert_allclose(semblance_gram(X, w).entries, brute_force_gram(X, w),
                                   rtol=0, atol=1e-14)

    def test_oracle_equivalence_random_with_ties(self):
        rng = np.random.default_rng(7)
        for trial in range(200):
            X = random_dataset(rng, 20, 5, ("continuous", "discrete", "mixed")[trial % 3])
            np.testing.assert_array_equal(semblance_gram(X).entries, semblance_gram_naive(X).entries)

    def test_oracle_equivalence_weighted(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            X = random_dataset(rng, 15, 6, "mixed")
            w = rng.random(6)
            w[0] = 0.0
            np.testing.assert_array_equal(semblance_gram(X, w).entries,
                                          semblance_gram_naive(X, w).entries)

    def test_unit_weights_match_unweighted(self, rng):
        X = random_dataset(rng, 14, 3, "mixed")
        np.testing.assert_array_equal(semblance_gram(X, np.ones(3)).entries, semblance_gram(X).entries)

    def test_range_symmetry_and_diagonal_maximality(self, rng):
        X = random_dataset(rng, 25, 6, "mixed")
        K = semblance_gram(X).entries
        n = X.shape[0]
        np.testing.assert_array_equal(K, K.T)
        assert K.min() >= 0 and K.max() <= (n - 1) / n
        assert np.all(np.diag(K)[:, None] >= K)

    @pytest.mark.parametrize("threads", [2, 3, 8])
    def test_threads_bit_identical(self, rng, threads):
        X = random_dataset(rng, 37, 9, "mixed")
        ref = semblance_gram(X, threads=1).entries
        np.testing.assert_array_equal(semblance_gram(X, threads=threads).entries, ref)
        w = rng.random(9)
        np.testing.assert_array_equal(semblance_gram(X, w, threads=threads).entries,
                                      semblance_gram(X, w, threads=1).entries)

    def test_weight_errors(self):
        X = np.arange(6.0).reshape(3, 2)
        with pytest.raises(DataError, match="length"):
            semblance_gram(X, [1.0])
        with pytest.raises(DataError, match="all zero"):
            semblance_gram(X, [0.0, 0.0])
        with pytest.raises(DataError):
            semblance_gram(X, [1.0, -1.0])

    def test_non_finite_data_rejected(self):
        with pytest.raises(DataError, match="row 1, feature 0"):
            semblance_gram([[1.0], [np.inf]])


class TestStructure:
    def test_rank_identity_tie_free(self, rng):
        n = 30
        col = rng.normal(size=n)
        ranks = np.argsort(np.argsort(col)) + 1
        K = semblance_gram(col[:, None]).entries
        expected = (n - np.abs(ranks[:, None] - ranks[None, :]) - 1) / n
        np.testing.assert_array_equal(K, expected)

    def test_hook_decomposition_exact(self, rng):
        n = 20
        col = np.sort(rng.normal(size=n))
        K = semblance_gram(col[:, None]).entries
        i = np.arange(1, n + 1)
        # integer numerators of a_i = (i-1)/n and b_j = (n-j)/n
        a = i - 1
        b = n - i
        M = a[np.minimum.outer(i, i) - 1]
        N = b[np.maximum.outer(i, i) - 1]
        np.testing.assert_array_equal(K, (M + N) / n)
        np.testing.assert_allclose(K - M / n - N / n, 0.0, rtol=0, atol=1e-15)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1),
           transform=st.sampled_from([np.exp, np.arctan, lambda x: x**3 + 2 * x, lambda x: 5 * x - 1]))
    def test_monotone_transform_invariance(self, seed, transform):
        rng = np.random.default_rng(seed)
        X = random_dataset(rng, 15, 4, "mixed")
        Y = transform(X)
        np.testing.assert_array_equal(semblance_gram(Y).entries, semblance_gram(X).entries)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_permutation_equivariance(self, seed):
        rng = np.random.default_rng(seed)
        X = random_dataset(rng, 18, 5, "mixed")
        perm = rng.permutation(18)
        K = semblance_gram(X).entries
        np.testing.assert_array_equal(semblance_gram(X[perm]).entries, K[np.ix_(perm, perm)])


class TestCrossGram:
    def test_training_rows_reproduce_gram(self, rng):
        X = random_dataset(rng, 16, 5, "mixed")
        K = semblance_gram(X).entries
        np.testing.assert_array_equal(semblance_cross_gram(X, X[[3, 7]]), K[[3, 7]])

    def test_query_below_all_training_values(self):
        train = np.array([[1.0], [2.0], [3.0], [4.0]])
        C = semblance_cross_gram(train, [[0.0]])
        # interval [0, 1] leaves 2, 3, 4 outside
        assert C[0, 0] == 3 / 4
        ix = build_feature_index(train[:, 0])
        assert C[0, 0] == (ix.below_count(0.0) + ix.above_count(1.0)) / 4

    def test_unseen_values_match_count_definition(self, rng):
        train = random_dataset(rng, 12, 3, "discrete")
        queries = rng.normal(size=(5, 3)) + 1
        C = semblance_cross_gram(train, queries)
        for i in range(5):
            for j in range(12):
                exp = np.mean([sum(1 for v in train[:, g]
                                   if v < min(queries[i, g], train[j, g]) or v > max(queries[i, g], train[j, g]))
                               for g in range(3)]) / 12
                assert C[i, j] == pytest.approx(exp, abs=1e-15)

    def test_empty_queries(self, rng):
        X = rng.normal(size=(6, 2))
        assert semblance_cross_gram(X, np.empty((0, 2))).shape == (0, 6)

    def test_column_mismatch(self, rng):
        with pytest.raises(DataError, match="columns"):
            SemblanceKernel(rng.normal(size=(6, 2))).cross(rng.normal(size=(2, 3)))
