"""Compiled and numpy kernels must agree."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bansa import _kernels_py, kernels
from bansa.masking import sample_masks

from conftest import random_map

BACKENDS = kernels.available_backends()
compiled = pytest.mark.skipif("compiled" not in BACKENDS, reason="extension not built")


def _case(seed, n, k, p):
    g = np.random.default_rng(seed)
    a = random_map(g, n, spread=3.0)
    a[g.random((n, n)) < 0.2] = 0.0
    a[a.sum(axis=1) == 0, 0] = 1.0
    a /= a.sum(axis=1, keepdims=True)
    return a, sample_masks(n, k, p, seed)


class TestDispatch:
    def test_python_always_available(self):
        assert "python" in BACKENDS

    def test_switch_and_restore(self):
        before = kernels.backend_name()
        with kernels.backend("python"):
            assert kernels.backend_name() == "python"
        assert kernels.backend_name() == before

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            kernels.use_backend("fortran")

    @compiled
    def test_compiled_is_default(self):
        assert kernels.backend_name() == "compiled"


@compiled
class TestParity:
    from bansa import _ckernels as c

    @given(st.integers(0, 2**32 - 1), st.integers(1, 16), st.integers(1, 12), st.sampled_from([0.0, 0.2, 0.5, 0.9, 1.0]))
    def test_masked_samples(self, seed, n, k, p):
        a, masks = _case(seed, n, k, p)
        np.testing.assert_allclose(self.c.masked_samples(a, masks), _kernels_py.masked_samples(a, masks), atol=1e-15)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 16), st.integers(1, 12), st.sampled_from([0.0, 0.2, 0.5, 0.9]))
    def test_masked_terms(self, seed, n, k, p):
        a, masks = _case(seed, n, k, p)
        np.testing.assert_allclose(self.c.masked_terms(a, masks), _kernels_py.masked_terms(a, masks), atol=1e-12)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 16), st.integers(1, 12))
    def test_ensemble_terms(self, seed, n, k):
        g = np.random.default_rng(seed)
        s = np.stack([random_map(g, n) for _ in range(k)])
        np.testing.assert_allclose(self.c.ensemble_terms(s), _kernels_py.ensemble_terms(s), atol=1e-12)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 16))
    def test_row_entropy(self, seed, n):
        a = random_map(np.random.default_rng(seed), n)
        assert self.c.row_entropy(a) == pytest.approx(_kernels_py.row_entropy(a), abs=1e-12)

    def test_rectangular_stack(self):
        s = np.array([[[0.2, 0.8]], [[0.6, 0.4]]])
        np.testing.assert_allclose(self.c.ensemble_terms(s), _kernels_py.ensemble_terms(s), atol=1e-15)

    def test_end_to_end_scores(self):
        from bansa.selector import run_pipeline
        from bansa.config import RunConfig

        with kernels.backend("python"):
            py = run_pipeline(RunConfig()).report.scores
        with kernels.backend("compiled"):
            cc = run_pipeline(RunConfig()).report.scores
        np.testing.assert_allclose(cc, py, atol=1e-12)


class TestExactZero:
    @pytest.mark.parametrize("name", BACKENDS)
    def test_identical_samples_give_exact_zero(self, name):
        a = random_map(np.random.default_rng(0), 9)
        with kernels.backend(name):
            h_mean, h_each = kernels.ensemble_terms(np.stack([a] * 7))
            assert h_mean - h_each == 0.0
            m_mean, m_each = kernels.masked_terms(a, np.ones((5, 9, 9), dtype=np.uint8))
            assert m_mean - m_each == 0.0
