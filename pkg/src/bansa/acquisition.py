"""Acquisition scores over attention ensembles.

``bansa`` is the entropy of the mean attention map minus the mean entropy of
the individual maps, i.e. a Jensen-Shannon style disagreement that is zero
exactly when all samples coincide.  ``bansa_e`` builds the ensemble from one
map by Bernoulli masking.  ``bald_reference`` is the classic BALD estimator on
plain discrete distributions, kept as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .attention import softmax_rows
from .errors import InvalidInput, ShapeError
from .masking import AttentionEnsemble, sample_masks
from .rng import Stream, as_stream

KINDS = ("entropy", "bansa", "bansa_e", "bansa_d", "bald_reference", "random")


@dataclass(frozen=True)
class AcquisitionScore:
    value: float
    kind: str
    k_used: int
    layer: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInput(f"unknown score kind {self.kind!r}")

    def __float__(self):
        return float(self.value)


def _shannon(p) -> float:
    h = 0.0
    for x in p:
        if x > 0.0:
            h -= x * math.log(x)
    return h


def bald_reference(dists) -> AcquisitionScore:
    """BALD from K stochastic predictive distributions.

    ``H(mean_k p_k) - mean_k H(p_k)``, computed with plain Python loops so it
    shares no code with the attention kernels it is used to check.
    """
    dists = [list(map(float, d)) for d in dists]
    if not dists:
        raise InvalidInput("need at least one distribution")
    width = len(dists[0])
    if any(len(d) != width for d in dists):
        raise ShapeError("all distributions must have the same length")
    k = len(dists)
    mean = [sum(d[j] for d in dists) / k for j in range(width)]
    value = _shannon(mean) - sum(_shannon(d) for d in dists) / k
    return AcquisitionScore(value, "bald_reference", k)


def bansa(ensemble: AttentionEnsemble) -> AcquisitionScore:
    h_mean, h_each = kernels.ensemble_terms(ensemble.samples)
    return AcquisitionScore(h_mean - h_each, "bansa", ensemble.k, ensemble.source_layer)


def predictive_entropy_score(ensemble: AttentionEnsemble) -> AcquisitionScore:
    """Entropy of the mean map alone (the first BANSA term)."""
    h_mean, _ = kernels.ensemble_terms(ensemble.samples)
    return AcquisitionScore(h_mean, "entropy", ensemble.k, ensemble.source_layer)


def bansa_e(a, k: int, drop_prob: float, stream: Stream | int, layer: int = 0) -> AcquisitionScore:
    """BANSA over ``k`` Bernoulli-masked copies of the single map ``a``.

    Identical in value to ``bansa(make_ensemble(a, k, drop_prob, stream))``
    but computed by the fused kernel without materializing the samples.
    """
    a = np.asarray(a, dtype=np.float64)
    masks = sample_masks(a.shape[0], k, drop_prob, stream)
    h_mean, h_each = kernels.masked_terms(a, masks)
    return AcquisitionScore(h_mean - h_each, "bansa_e", k, layer)


def bansa_e_masked(a, masks, layer: int = 0) -> AcquisitionScore:
    """BANSA-E of ``a`` against pre-drawn ``(K, N, N)`` masks.

    Lets a caller reuse one mask set for every pool member and layer.
    """
    h_mean, h_each = kernels.masked_terms(np.asarray(a, dtype=np.float64), masks)
    return AcquisitionScore(h_mean - h_each, "bansa_e", int(np.shape(masks)[0]), layer)


def entropy_masked(a, masks, layer: int = 0) -> AcquisitionScore:
    """Predictive entropy of the mean of the masked copies of ``a``."""
    h_mean, _ = kernels.masked_terms(np.asarray(a, dtype=np.float64), masks)
    return AcquisitionScore(h_mean, "entropy", int(np.shape(masks)[0]), layer)


def jitter_ensemble(logits, k: int, noise_scale: float, stream: Stream | int,
                    source_layer: int = 0) -> AttentionEnsemble:
    """Ensemble from Gaussian jitter on pre-softmax logits.

    Comparison hook standing in for dropout-style stochasticity; it makes no
    claim of matching real network dropout.
    """
    if k < 1:
        raise InvalidInput(f"ensemble size must be >= 1, got {k}")
    if noise_scale < 0:
        raise InvalidInput(f"noise_scale must be non-negative, got {noise_scale}")
    logits = np.asarray(logits, dtype=np.float64)
    stream = as_stream(stream)
    samples = [
        softmax_rows(logits + noise_scale * stream.child(i).generator().standard_normal(logits.shape))
        for i in range(k)
    ]
    return AttentionEnsemble(np.stack(samples), source_layer)


def bansa_d(logits, k: int, noise_scale: float, stream: Stream | int, layer: int = 0) -> AcquisitionScore:
    ens = jitter_ensemble(logits, k, noise_scale, stream, layer)
    h_mean, h_each = kernels.ensemble_terms(ens.samples)
    return AcquisitionScore(h_mean - h_each, "bansa_d", k, layer)


def random_score(stream: Stream | int, layer: int = 0) -> AcquisitionScore:
    """Uniform random score; the random-selection baseline."""
    return AcquisitionScore(float(as_stream(stream).generator().random()), "random", 0, layer)
