import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bansa.attention import is_row_stochastic, permutation_map, uniform_map
from bansa.errors import InvalidInput, ShapeError
from bansa.masking import AttentionEnsemble, apply_mask, make_ensemble, sample_mask, sample_masks
from bansa.rng import Stream

from conftest import random_map


class TestSampleMask:
    def test_zero_drop_keeps_all(self):
        assert sample_mask(9, 0.0, 1).all()

    def test_full_drop_drops_all(self):
        assert not sample_mask(9, 1.0, 1).any()

    def test_binary_uint8(self):
        m = sample_mask(16, 0.3, 2)
        assert m.dtype == np.uint8
        assert set(np.unique(m)) <= {0, 1}

    def test_keep_fraction(self):
        # 64 x 64 = 4096 bits; a few more masks push past 10^4 bits
        bits = sample_masks(64, 3, 0.2, Stream.from_seed(11))
        assert bits.size >= 10_000
        assert 0.75 <= bits.mean() <= 0.85

    @pytest.mark.parametrize("p", [-0.1, 1.5])
    def test_rejects_bad_probability(self, p):
        with pytest.raises(InvalidInput):
            sample_mask(4, p, 0)

    def test_masks_use_substreams(self):
        s = Stream.from_seed(3)
        masks = sample_masks(5, 4, 0.5, s)
        for i in range(4):
            np.testing.assert_array_equal(masks[i], sample_mask(5, 0.5, s.child(i)))


class TestApplyMask:
    def test_all_ones_is_identity(self, rng):
        a = random_map(rng, 6)
        out = apply_mask(a, np.ones((6, 6), dtype=np.uint8))
        np.testing.assert_array_equal(out, a)

    def test_single_survivor(self):
        out = apply_mask([[0.5, 0.5], [0.3, 0.7]], [[1, 0], [1, 1]])
        np.testing.assert_array_equal(out[0], [1.0, 0.0])
        np.testing.assert_array_equal(out[1], [0.3, 0.7])

    def test_keep_only_column_j(self, rng):
        a = random_map(rng, 5)
        m = np.zeros((5, 5), dtype=np.uint8)
        m[2, 3] = 1
        out = apply_mask(a, m)
        np.testing.assert_array_equal(out[2], np.eye(5)[3])

    def test_dead_row_falls_back(self):
        a = np.array([[0.0, 1.0], [0.5, 0.5]])
        out = apply_mask(a, [[1, 0], [0, 0]])
        np.testing.assert_array_equal(out, a)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            apply_mask(np.eye(3), np.ones((2, 2)))

    @given(st.integers(1, 12), st.floats(0, 1), st.integers(0, 2**32 - 1))
    def test_row_stochastic_and_zeros_stay_zero(self, n, p, seed):
        g = np.random.default_rng(seed)
        a = random_map(g, n)
        a[g.random((n, n)) < 0.3] = 0.0
        a[a.sum(axis=1) == 0, 0] = 1.0
        a /= a.sum(axis=1, keepdims=True)
        out = apply_mask(a, sample_mask(n, p, seed))
        assert is_row_stochastic(out)
        assert np.all(out[a == 0] == 0)


class TestMakeEnsemble:
    def test_zero_drop_copies(self, rng):
        a = random_map(rng, 6)
        ens = make_ensemble(a, 4, 0.0, 1)
        for s in ens.samples:
            np.testing.assert_array_equal(s, a)

    def test_deterministic(self, rng):
        a = random_map(rng, 8)
        e1 = make_ensemble(a, 10, 0.2, Stream.from_seed(5))
        e2 = make_ensemble(a, 10, 0.2, Stream.from_seed(5))
        np.testing.assert_array_equal(e1.samples, e2.samples)
        assert e1.k == 10 and e1.n == 8

    def test_metadata(self):
        ens = make_ensemble(uniform_map(4), 2, 0.5, 0, source_layer=3, seed_id=7)
        assert (ens.source_layer, ens.seed_id) == (3, 7)

    def test_permutation_map_is_immune(self):
        a = permutation_map([2, 0, 1, 3])
        ens = make_ensemble(a, 10, 0.7, 4)
        for s in ens.samples:
            np.testing.assert_array_equal(s, a)

    def test_rejects_bad_k(self):
        with pytest.raises(InvalidInput):
            make_ensemble(np.eye(2), 0, 0.2, 0)

    def test_ensemble_shape_check(self):
        with pytest.raises(ShapeError):
            AttentionEnsemble(np.zeros((3, 3)))
        with pytest.raises(ShapeError):
            AttentionEnsemble(np.zeros((0, 3, 3)))

    def test_single_row_samples(self):
        ens = AttentionEnsemble(np.array([[[0.2, 0.8]], [[0.6, 0.4]]]))
        assert (ens.k, ens.n) == (2, 2)
