"""Attention maps: construction from queries and keys, validation, entropy.

An attention map is a plain ``(N, N)`` float64 array whose rows are
probability distributions.  Nothing here wraps it in a class; use
:func:`as_attention_map` at trust boundaries (files, user input).
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import InvalidInput, ShapeError

ROW_SUM_TOL = 1e-9
RENORM_TOL = 1e-6


def softmax_rows(scores) -> np.ndarray:
    """Row-wise softmax with max subtraction.

    Parameters
    ----------
    scores : array_like, shape (N, M)
        Finite logits.

    Returns
    -------
    ndarray
        Row-stochastic array of the same shape.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2:
        raise ShapeError(f"expected a 2-d score matrix, got shape {scores.shape}")
    if not np.all(np.isfinite(scores)):
        raise InvalidInput("softmax input contains non-finite entries")
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def attention_from_qk(q, k, scale: float | None = None) -> np.ndarray:
    """``softmax_rows(scale * q @ k.T)``; ``scale`` defaults to ``1/sqrt(d)``.

    ``scale=1`` gives the unscaled dot-product form.
    """
    q = np.asarray(q, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    if q.ndim != 2 or k.ndim != 2:
        raise ShapeError("queries and keys must be 2-d token matrices")
    if q.shape != k.shape:
        raise ShapeError(f"query shape {q.shape} does not match key shape {k.shape}")
    if q.shape[0] < 1 or q.shape[1] < 1:
        raise ShapeError("token matrices need at least one row and one column")
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(k))):
        raise InvalidInput("token matrices contain non-finite entries")
    if scale is None:
        scale = 1.0 / np.sqrt(q.shape[1])
    return softmax_rows(scale * (q @ k.T))


def entropy(a) -> float:
    """Mean row Shannon entropy in nats, with ``0 log 0 = 0``.

    Lies in ``[0, ln N]``: 0 for one-hot rows, ``ln N`` for uniform rows.
    """
    return kernels.row_entropy(a)


def is_row_stochastic(a, tol: float = ROW_SUM_TOL) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        return False
    if not np.all(np.isfinite(a)) or np.any(a < 0) or np.any(a > 1):
        return False
    return bool(np.all(np.abs(a.sum(axis=1) - 1.0) <= tol))


def as_attention_map(x, tol: float = RENORM_TOL) -> np.ndarray:
    """Validate ``x`` as an attention map, renormalizing small row-sum drift.

    Rows whose sums are off by more than ``tol`` are rejected rather than
    silently rescaled.
    """
    a = np.array(x, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ShapeError(f"attention map must be square N x N with N >= 1, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput("attention map contains non-finite entries")
    if np.any(a < 0):
        raise InvalidInput("attention map has negative entries")
    sums = a.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if bad.size:
        raise InvalidInput(
            f"rows {bad[:5].tolist()} are not stochastic (sums {sums[bad[:5]].tolist()}, tolerance {tol})"
        )
    return a / sums[:, None]


def uniform_map(n: int) -> np.ndarray:
    return np.full((n, n), 1.0 / n)


def permutation_map(perm) -> np.ndarray:
    perm = np.asarray(perm)
    a = np.zeros((perm.size, perm.size))
    a[np.arange(perm.size), perm] = 1.0
    return a
