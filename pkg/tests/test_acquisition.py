import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bansa import oracle
from bansa.acquisition import (
    AcquisitionScore,
    bald_reference,
    bansa,
    bansa_d,
    bansa_e,
    bansa_e_masked,
    entropy_masked,
    jitter_ensemble,
    predictive_entropy_score,
    random_score,
)
from bansa.attention import entropy, permutation_map, uniform_map
from bansa.errors import InvalidInput, ShapeError
from bansa.masking import AttentionEnsemble, make_ensemble, sample_masks
from bansa.rng import Stream

from conftest import random_map

ANTI = np.array([[0.0, 1.0], [1.0, 0.0]])


def ensemble(maps):
    return AttentionEnsemble(np.array(maps, dtype=np.float64))


class TestBaldReference:
    def test_identical(self):
        assert bald_reference([[0.3, 0.7]] * 4).value == pytest.approx(0.0, abs=1e-15)

    def test_opposite_one_hots(self):
        assert bald_reference([[1, 0], [0, 1]]).value == pytest.approx(math.log(2), abs=1e-15)

    def test_hand_value(self):
        v = bald_reference([[0.9, 0.1], [0.1, 0.9]]).value
        # H(0.5, 0.5) - H(0.9, 0.1) = 0.368064...
        assert v == pytest.approx(0.3680642071684971, abs=1e-15)
        assert abs(v - 0.3680) < 1e-4

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            bald_reference([[0.5, 0.5], [1.0, 0.0, 0.0]])

    def test_kind(self):
        s = bald_reference([[0.5, 0.5]])
        assert (s.kind, s.k_used) == ("bald_reference", 1)


class TestBansa:
    def test_identical_samples_zero(self, rng):
        a = random_map(rng, 5)
        assert bansa(ensemble([a, a, a])).value == 0.0

    def test_identity_vs_anti_identity(self):
        assert bansa(ensemble([np.eye(2), ANTI])).value == pytest.approx(math.log(2), abs=1e-15)

    def test_matches_two_pass_oracle(self, rng):
        maps = [random_map(rng, 4) for _ in range(3)]
        assert bansa(ensemble(maps)).value == pytest.approx(oracle.bansa([m.tolist() for m in maps]), abs=1e-12)

    def test_score_metadata(self, rng):
        ens = AttentionEnsemble(np.stack([random_map(rng, 3)] * 2), source_layer=4)
        s = bansa(ens)
        assert (s.kind, s.k_used, s.layer) == ("bansa", 2, 4)
        assert float(s) == s.value

    @given(st.integers(1, 16), st.integers(1, 16), st.integers(0, 2**32 - 1))
    def test_bounds(self, n, k, seed):
        g = np.random.default_rng(seed)
        ens = ensemble([random_map(g, n, spread=3.0) for _ in range(k)])
        b = bansa(ens).value
        h = predictive_entropy_score(ens).value
        assert -1e-12 <= b <= h + 1e-12
        assert h <= math.log(n) + 1e-12

    @given(st.integers(2, 10), st.integers(2, 6), st.integers(0, 2**32 - 1))
    def test_permutation_equivariance(self, n, k, seed):
        g = np.random.default_rng(seed)
        maps = [random_map(g, n) for _ in range(k)]
        p = permutation_map(g.permutation(n))
        permuted = [p @ m @ p.T for m in maps]
        assert bansa(ensemble(permuted)).value == pytest.approx(bansa(ensemble(maps)).value, abs=1e-12)

    @given(st.integers(1, 12), st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_single_row_matches_bald(self, width, k, seed):
        dists = np.random.default_rng(seed).dirichlet(np.ones(width), size=k)
        assert bansa(ensemble(dists[:, None, :])).value == pytest.approx(bald_reference(dists).value, abs=1e-12)

    def test_perturbation_breaks_zero(self, rng):
        a = random_map(rng, 6)
        b = a.copy()
        b[0, 0] += 1e-3
        b[0] /= b[0].sum()
        assert bansa(ensemble([a, a, b])).value > 0


class TestPredictiveEntropy:
    def test_identical_one_hots(self):
        p = permutation_map([1, 2, 0])
        assert predictive_entropy_score(ensemble([p, p])).value == 0.0

    def test_mixed(self):
        assert predictive_entropy_score(ensemble([np.eye(2), ANTI])).value == pytest.approx(math.log(2))

    def test_kind(self):
        assert predictive_entropy_score(ensemble([np.eye(2)])).kind == "entropy"


class TestBansaE:
    def test_zero_drop(self, rng):
        for n in (1, 3, 8):
            assert bansa_e(random_map(rng, n), 10, 0.0, 3).value == 0.0

    @pytest.mark.parametrize("p", [0.2, 0.5, 0.9, 1.0])
    def test_one_hot_rows(self, p):
        assert bansa_e(permutation_map([3, 1, 0, 2]), 10, p, 1).value == 0.0

    def test_uniform_positive_and_reproducible(self):
        a = uniform_map(8)
        v1 = bansa_e(a, 10, 0.2, Stream.from_seed(42)).value
        v2 = bansa_e(a, 10, 0.2, Stream.from_seed(42)).value
        assert v1 > 0
        assert v1 == v2

    def test_matches_oracle(self):
        a = uniform_map(8)
        masks = sample_masks(8, 10, 0.2, Stream.from_seed(42))
        got = bansa_e(a, 10, 0.2, Stream.from_seed(42)).value
        assert got == pytest.approx(oracle.bansa_masked(a.tolist(), masks.tolist()), abs=1e-12)

    def test_equals_bansa_of_ensemble(self, rng):
        a = random_map(rng, 7)
        s = Stream.from_seed(8)
        assert bansa_e(a, 6, 0.4, s).value == pytest.approx(bansa(make_ensemble(a, 6, 0.4, s)).value, abs=1e-13)

    def test_masked_variants(self, rng):
        a = random_map(rng, 6)
        masks = sample_masks(6, 5, 0.3, 2)
        assert bansa_e_masked(a, masks, layer=2).layer == 2
        e = entropy_masked(a, masks)
        assert e.kind == "entropy"
        assert e.value >= bansa_e_masked(a, masks).value

    def test_propagates_errors(self):
        with pytest.raises(InvalidInput):
            bansa_e(np.eye(3), 4, 1.2, 0)
        with pytest.raises(InvalidInput):
            bansa_e(np.eye(3), 0, 0.2, 0)


class TestJitterVariant:
    def test_zero_noise_is_zero(self, rng):
        assert bansa_d(rng.normal(size=(5, 5)), 6, 0.0, 1).value == 0.0

    def test_positive_with_noise(self, rng):
        s = bansa_d(rng.normal(size=(5, 5)), 6, 1.0, 1)
        assert s.value > 0 and s.kind == "bansa_d"

    def test_rejects_negative_scale(self):
        with pytest.raises(InvalidInput):
            jitter_ensemble(np.zeros((2, 2)), 2, -1.0, 0)

    def test_random_score(self):
        s = random_score(Stream.from_seed(1))
        assert 0 <= s.value < 1 and s.kind == "random"
        assert random_score(Stream.from_seed(1)).value == s.value


class TestEnsembleSizeStability:
    """More masked copies give a steadier score across mask RNG seeds."""

    @staticmethod
    def spread(a, k, reps=100):
        return np.std([bansa_e(a, k, 0.2, Stream.from_seed(r)).value for r in range(reps)])

    def test_k1_is_identically_zero(self, rng):
        a = random_map(rng, 8)
        assert all(bansa_e(a, 1, 0.2, r).value == 0.0 for r in range(20))

    def test_spread_shrinks_from_k2_to_k10(self, rng):
        for _ in range(5):
            a = random_map(rng, 16, spread=1.0)
            assert self.spread(a, 10) < self.spread(a, 2)


class TestSmallDisagreement:
    def test_quadratic_in_perturbation(self, rng):
        # BANSA is second order in the disagreement between samples
        a = random_map(rng, 6, spread=0.5)
        values = []
        for eps in (1e-2, 1e-3, 1e-4):
            b = a.copy()
            b[0, 0] -= eps
            b[0, 1] += eps
            values.append(bansa(ensemble([a, b])).value)
        ratios = np.array(values[:-1]) / np.array(values[1:])
        np.testing.assert_allclose(ratios, 100.0, rtol=0.05)


def test_score_is_frozen():
    s = AcquisitionScore(0.1, "bansa", 3)
    with pytest.raises(AttributeError):
        s.value = 0.2
