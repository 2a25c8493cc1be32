"""Brute-force reference implementations and a self-check suite.

Everything here is written with plain Python loops over lists so that it
shares no code path with the vectorized or compiled implementations it is
used to check.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from . import acquisition, kernels, layers, metrics
from .attention import softmax_rows
from .masking import sample_masks
from .rng import Stream


def softmax(row):
    top = max(row)
    ex = [math.exp(v - top) for v in row]
    s = sum(ex)
    return [e / s for e in ex]


def xlogx(v):
    return v * math.log(v) if v > 0 else 0.0


def entropy(rows):
    """Mean row Shannon entropy in nats."""
    return sum(-sum(xlogx(v) for v in row) for row in rows) / len(rows)


def mean_map(maps):
    k = len(maps)
    return [[sum(maps[s][i][j] for s in range(k)) / k for j in range(len(row))]
            for i, row in enumerate(maps[0])]


def bansa(maps):
    return entropy(mean_map(maps)) - sum(entropy(m) for m in maps) / len(maps)


def masked(a, mask, floor=1e-12):
    """Apply an entrywise 0/1 mask and renormalize each row."""
    out = []
    for i, arow in enumerate(a):
        row = [arow[j] * mask[i][j] for j in range(len(arow))]
        mass = sum(row)
        keep = all(mask[i]) or mass < floor
        out.append(list(arow) if keep else [v / mass for v in row])
    return out


def bansa_masked(a, masks):
    return bansa([masked(a, m) for m in masks])


def pearson(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((x[i] - mx) * (y[i] - my) for i in range(n))
    sxx = sum((v - mx) ** 2 for v in x)
    syy = sum((v - my) ** 2 for v in y)
    if sxx == 0 or syy == 0:
        return float("nan")
    return sxy / math.sqrt(sxx * syy)


def depth_scan(rows, tau):
    """First 0-based depth whose cumulative column correlates with the full one at >= tau."""
    n_layers = len(rows[0])
    cum = []
    for r in rows:
        acc, c = 0.0, []
        for d in range(n_layers):
            acc += r[d]
            c.append(acc / (d + 1))
        cum.append(c)
    full = [c[-1] for c in cum]
    curve = [pearson([c[d] for c in cum], full) for d in range(n_layers)]
    for d, r in enumerate(curve):
        if r == r and r >= tau:
            return d, curve
    return n_layers - 1, curve


def pairwise_distance(maps):
    total, count = 0.0, 0
    for i in range(len(maps)):
        for j in range(i + 1, len(maps)):
            sq = sum((maps[i][r][c] - maps[j][r][c]) ** 2
                     for r in range(len(maps[i])) for c in range(len(maps[i][r])))
            total += math.sqrt(sq)
            count += 1
    return total / count


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _random_map(rng, n):
    return [softmax([rng.gauss(0, 2) for _ in range(n)]) for _ in range(n)]


def run_all(seed: int = 0, cases: int = 20, tol: float = 1e-9) -> list[Check]:
    """Compare the library against the brute-force references on random inputs."""
    rng = random.Random(seed)
    results = []

    def record(name, errs):
        worst = float(max(errs)) if errs else 0.0
        results.append(Check(name, bool(worst <= tol), f"max abs error {worst:.3e} over {len(errs)} cases"))

    errs = []
    for _ in range(cases):
        n = rng.randint(1, 9)
        rows = [[rng.gauss(0, 3) for _ in range(n)] for _ in range(n)]
        got = softmax_rows(np.array(rows))
        errs.append(max(abs(got[i][j] - softmax(rows[i])[j]) for i in range(n) for j in range(n)))
    record("softmax", errs)

    errs = []
    for _ in range(cases):
        a = _random_map(rng, rng.randint(1, 9))
        errs.append(abs(kernels.row_entropy(np.array(a)) - entropy(a)))
    record("entropy", errs)

    errs = []
    for _ in range(cases):
        n, k = rng.randint(1, 7), rng.randint(1, 6)
        maps = [_random_map(rng, n) for _ in range(k)]
        ens = acquisition.AttentionEnsemble(np.array(maps))
        errs.append(abs(acquisition.bansa(ens).value - bansa(maps)))
    record("bansa", errs)

    errs = []
    for i in range(cases):
        n, k = rng.randint(1, 7), rng.randint(1, 6)
        a = _random_map(rng, n)
        masks = sample_masks(n, k, rng.choice([0.0, 0.2, 0.5, 0.9]), Stream.from_seed(seed).child(i))
        got = acquisition.bansa_e_masked(np.array(a), masks).value
        errs.append(abs(got - bansa_masked(a, masks.tolist())))
    record("bansa_e", errs)

    errs = []
    for _ in range(cases):
        k, c = rng.randint(1, 5), rng.randint(2, 5)
        dists = [softmax([rng.gauss(0, 2) for _ in range(c)]) for _ in range(k)]
        errs.append(abs(acquisition.bald_reference(dists).value - bansa([[d] for d in dists])))
    record("bald", errs)

    errs, mismatches = [], 0
    for _ in range(cases):
        m, n_layers = rng.randint(3, 12), rng.randint(1, 6)
        rows = [[rng.gauss(0, 1) for _ in range(n_layers)] for _ in range(m)]
        tau = rng.choice([0.0, 0.5, 0.7, 0.9])
        d_ref, curve_ref = depth_scan(rows, tau)
        prof = layers.select_depth(layers.ScoreTable(np.array(rows)), tau)
        mismatches += prof.d_star != d_ref
        errs.extend(abs(a - b) for a, b in zip(prof.corr_curve, curve_ref) if a == a)
    record("correlation_curve", errs)
    results.append(Check("depth_selection", mismatches == 0, f"{mismatches} mismatched depths over {cases} cases"))

    errs = []
    for _ in range(cases):
        n, k = rng.randint(1, 5), rng.randint(2, 5)
        maps = [_random_map(rng, n) for _ in range(k)]
        errs.append(abs(metrics.pairwise_attention_distance(np.array(maps)) - pairwise_distance(maps)))
    record("pairwise_distance", errs)
    return results
