"""Attention and latent-trajectory analysis metrics."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.signal import butter, lfilter, lfilter_zi

from .errors import InvalidInput, ShapeError

FILTER_ORDER = 2
DEFAULT_CUTOFF = 0.25


def _stack(items, what):
    arrs = [np.asarray(getattr(x, "data", x), dtype=np.float64) for x in items]
    if len({a.shape for a in arrs}) > 1:
        raise ShapeError(f"all {what} must share one shape")
    return np.stack(arrs)


def pairwise_attention_distance(maps) -> float:
    """Mean Frobenius distance over all unordered pairs of maps."""
    maps = list(maps)
    if len(maps) < 2:
        raise InvalidInput("need at least two maps for pairwise distances")
    x = _stack(maps, "maps").reshape(len(maps), -1)
    dists = [np.linalg.norm(x[i] - x[j]) for i, j in combinations(range(len(x)), 2)]
    return float(np.mean(dists))


def cross_distance(a_maps, b_maps) -> float:
    a = _stack(list(a_maps), "maps")
    b = _stack(list(b_maps), "maps")
    if a.shape[1:] != b.shape[1:]:
        raise ShapeError("groups hold maps of different shapes")
    a = a.reshape(len(a), -1)
    b = b.reshape(len(b), -1)
    return float(np.mean([np.linalg.norm(x - y) for x in a for y in b]))


@dataclass(frozen=True)
class GroupDistanceSummary:
    intra_low: float
    intra_high: float
    cross: float

    def as_dict(self) -> dict:
        return {"intra_low": self.intra_low, "intra_high": self.intra_high, "cross": self.cross}


def group_summary(low_group, high_group) -> GroupDistanceSummary:
    return GroupDistanceSummary(
        intra_low=pairwise_attention_distance(low_group),
        intra_high=pairwise_attention_distance(high_group),
        cross=cross_distance(low_group, high_group),
    )


def lowpass(x, cutoff: float = DEFAULT_CUTOFF, axis: int = 0) -> np.ndarray:
    """Second-order Butterworth low-pass along ``axis``.

    ``cutoff`` is in cycles per step (Nyquist is 0.5).  The filter starts in
    its steady state for the first sample, so a constant input passes through
    unchanged instead of ringing up from zero.
    """
    if not 0.0 < cutoff < 0.5:
        raise InvalidInput(f"cutoff must lie in (0, 0.5) cycles per step, got {cutoff}")
    x = np.asarray(x, dtype=np.float64)
    b, a = butter(FILTER_ORDER, cutoff / 0.5, btype="low")
    x = np.moveaxis(x, axis, 0)
    zi = lfilter_zi(b, a).reshape((-1,) + (1,) * (x.ndim - 1)) * x[:1]
    y, _ = lfilter(b, a, x, axis=0, zi=zi)
    return np.moveaxis(y, 0, axis)


def trajectory_variation(traj, cutoff: float = DEFAULT_CUTOFF) -> float:
    """Mean squared step-to-step change of the low-passed trajectory.

    ``traj`` is a sequence of latent states (or arrays), ordered along the
    denoising direction.  Lower means smoother.
    """
    states = _stack(list(traj), "states")
    if states.shape[0] < 3:
        raise InvalidInput("trajectory needs at least three states")
    # translation invariance: the filter is linear with unit DC gain
    centered = states - states[0]
    smooth = lowpass(centered, cutoff)
    return float(np.mean(np.diff(smooth, axis=0) ** 2))


def intra_frame_variance(state) -> float:
    """Sample variance of each token row's entries, averaged over rows."""
    z = np.asarray(getattr(state, "data", state), dtype=np.float64)
    if z.ndim != 2:
        raise ShapeError(f"expected an N x d state, got shape {z.shape}")
    if z.shape[1] < 2:
        return 0.0
    return float(np.var(z, axis=1, ddof=1).mean())
