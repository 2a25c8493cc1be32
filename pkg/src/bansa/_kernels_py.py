"""Pure numpy versions of the hot kernels.

These mirror ``_ckernels.pyx`` function for function and are used whenever the
compiled module is unavailable.
"""

import numpy as np
from scipy.special import entr

# masked row mass below this falls back to the unmasked row
ZERO_ROW_MASS = 1e-12


def row_entropy(a):
    """Mean Shannon entropy (nats) of the rows of a 2-d probability array."""
    return float(entr(a).sum() / a.shape[0])


def ensemble_terms(samples):
    """Return ``(H(mean map), mean of H(sample))`` for a ``(K, N, N)`` stack."""
    k, n = samples.shape[0], samples.shape[1]
    mean_map = samples.sum(axis=0) / k
    h_mean = entr(mean_map).sum() / n
    h_each = entr(samples).sum(axis=(1, 2)) / n
    return float(h_mean), float(h_each.sum() / k)


def masked_samples(a, masks):
    kept = a[None, :, :] * masks
    mass = kept.sum(axis=2, keepdims=True)
    dead = mass < ZERO_ROW_MASS
    full = masks.all(axis=2, keepdims=True)
    safe = np.where(dead, 1.0, mass)
    out = np.where(dead | full, a[None, :, :], kept / safe)
    return out


def masked_terms(a, masks):
    return ensemble_terms(masked_samples(a, masks))
