import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


def random_map(rng, n, spread=2.0):
    """Dense row-stochastic map from Gaussian logits."""
    x = rng.normal(0.0, spread, size=(n, n))
    e = np.exp(x - x.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
