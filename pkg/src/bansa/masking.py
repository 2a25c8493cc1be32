"""Bernoulli masking of attention maps.

``drop_prob`` is the probability that an entry is *dropped* (mask bit 0), so
``drop_prob=0`` disables masking.  Masked rows are renormalized; a row whose
surviving mass is (numerically) zero falls back to the unmasked row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidInput, ShapeError
from .rng import Stream, as_stream


@dataclass(frozen=True)
class AttentionEnsemble:
    """K stochastic attention samples of one (seed, prompt, layer, timestep).

    Samples are normally square N x N maps; R x N row-stochastic stacks are
    accepted too, so single-row ensembles line up with plain distributions.
    """

    samples: np.ndarray
    source_layer: int = 0
    seed_id: int | str | None = None

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 3 or min(s.shape) < 1:
            raise ShapeError(f"ensemble must have shape (K, N, N) with K >= 1, got {s.shape}")
        object.__setattr__(self, "samples", s)

    @property
    def k(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[2]


def _check_prob(drop_prob: float) -> float:
    drop_prob = float(drop_prob)
    if not 0.0 <= drop_prob <= 1.0:
        raise InvalidInput(f"drop_prob must lie in [0, 1], got {drop_prob}")
    return drop_prob


def sample_mask(n: int, drop_prob: float, stream: Stream | int) -> np.ndarray:
    """Draw an ``(n, n)`` uint8 mask; each bit is 0 with probability ``drop_prob``."""
    drop_prob = _check_prob(drop_prob)
    u = as_stream(stream).generator().random((n, n))
    return (u >= drop_prob).astype(np.uint8)


def sample_masks(n: int, k: int, drop_prob: float, stream: Stream | int) -> np.ndarray:
    """``(k, n, n)`` masks; mask ``i`` comes from sub-stream ``i``."""
    if k < 1:
        raise InvalidInput(f"ensemble size must be >= 1, got {k}")
    stream = as_stream(stream)
    return np.stack([sample_mask(n, drop_prob, stream.child(i)) for i in range(k)])


def apply_mask(a, m) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    m = np.asarray(m)
    if a.shape != m.shape:
        raise ShapeError(f"map shape {a.shape} does not match mask shape {m.shape}")
    return kernels.masked_samples(a, m[None])[0]


def make_ensemble(a, k: int, drop_prob: float, stream: Stream | int,
                  source_layer: int = 0, seed_id=None) -> AttentionEnsemble:
    a = np.asarray(a, dtype=np.float64)
    masks = sample_masks(a.shape[0], k, drop_prob, stream)
    return AttentionEnsemble(kernels.masked_samples(a, masks), source_layer, seed_id)
