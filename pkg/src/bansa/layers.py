"""Per-layer scores, cumulative layer averages and truncation depth search.

Depths are 0-based here.  Reports add one when printing them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCorrelation, InsufficientPool, InvalidInput

DEFAULT_TAU = 0.7


@dataclass(frozen=True)
class ScoreTable:
    """Scores of M pool members (rows) at L layers (columns)."""

    rows: np.ndarray
    seed_ids: list = field(default_factory=list)

    def __post_init__(self):
        r = np.array(self.rows, dtype=np.float64)
        if r.ndim != 2 or r.shape[0] < 1 or r.shape[1] < 1:
            raise InvalidInput(f"score table must be a non-empty M x L matrix, got shape {r.shape}")
        if not np.all(np.isfinite(r)):
            raise InvalidInput("score table contains non-finite values")
        ids = list(self.seed_ids) if self.seed_ids else list(range(r.shape[0]))
        if len(ids) != r.shape[0]:
            raise InvalidInput(f"{len(ids)} seed ids for {r.shape[0]} rows")
        r.setflags(write=False)
        object.__setattr__(self, "rows", r)
        object.__setattr__(self, "seed_ids", ids)

    @property
    def m(self) -> int:
        return self.rows.shape[0]

    @property
    def layers(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class LayerProfile:
    per_layer: list
    cumulative: list
    corr_curve: list
    d_star: int
    tau: float

    def as_dict(self) -> dict:
        return {
            "per_layer": list(self.per_layer),
            "cumulative": list(self.cumulative),
            "corr_curve": [None if np.isnan(c) else c for c in self.corr_curve],
            "d_star": self.d_star + 1,
            "tau": self.tau,
        }


def cumulative_scores(table: ScoreTable) -> np.ndarray:
    """Entry ``(i, d)`` is the mean of ``table.rows[i, :d+1]``."""
    if not isinstance(table, ScoreTable):
        table = ScoreTable(table)
    return np.cumsum(table.rows, axis=1) / np.arange(1, table.layers + 1)


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidInput("pearson needs two 1-d sequences of equal length")
    if x.size < 2:
        raise InvalidInput("pearson needs at least two points")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = xc @ xc
    syy = yc @ yc
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateCorrelation("correlation is undefined for a constant sequence")
    r = (xc @ yc) / np.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


def correlation_curve(table: ScoreTable) -> np.ndarray:
    """Pearson r of each cumulative column against the full-depth column.

    Constant (uninformative) columns get NaN.  A constant full-depth column
    leaves nothing to correlate against and raises.
    """
    cum = cumulative_scores(table)
    full = cum[:, -1]
    curve = np.empty(table.layers)
    for d in range(table.layers):
        try:
            curve[d] = pearson(cum[:, d], full)
        except DegenerateCorrelation:
            if d == table.layers - 1:
                raise
            curve[d] = np.nan
    return curve


def select_depth(table: ScoreTable, tau: float = DEFAULT_TAU) -> LayerProfile:
    """Smallest depth whose cumulative score correlates with the full score at ``tau`` or more."""
    if not isinstance(table, ScoreTable):
        table = ScoreTable(table)
    if table.m < 2:
        raise InsufficientPool(f"depth selection needs at least 2 pool members, got {table.m}")
    if table.layers == 1:
        curve = np.array([1.0])
    else:
        curve = correlation_curve(table)
    hits = np.flatnonzero(~np.isnan(curve) & (curve >= tau))
    d_star = int(hits[0]) if hits.size else table.layers - 1
    per_layer = table.rows.mean(axis=0)
    return LayerProfile(
        per_layer=per_layer.tolist(),
        cumulative=(np.cumsum(per_layer) / np.arange(1, table.layers + 1)).tolist(),
        corr_curve=curve.tolist(),
        d_star=d_star,
        tau=float(tau),
    )


def truncated_pool_scores(table: ScoreTable, d_star: int) -> np.ndarray:
    if not isinstance(table, ScoreTable):
        table = ScoreTable(table)
    if not 0 <= d_star < table.layers:
        raise InvalidInput(f"depth {d_star} outside 0..{table.layers - 1}")
    return cumulative_scores(table)[:, d_star]


def group_means(table: ScoreTable, groups) -> ScoreTable:
    """Average rows sharing a group label (e.g. all seeds of one prompt).

    Used for the seed-averaged depth search, where correlation runs across
    prompts instead of across the whole pool.
    """
    groups = list(groups)
    if len(groups) != table.m:
        raise InvalidInput(f"{len(groups)} group labels for {table.m} rows")
    labels = list(dict.fromkeys(groups))
    index = {g: i for i, g in enumerate(labels)}
    sums = np.zeros((len(labels), table.layers))
    counts = np.zeros(len(labels))
    for row, g in zip(table.rows, groups):
        sums[index[g]] += row
        counts[index[g]] += 1
    return ScoreTable(sums / counts[:, None], labels)
