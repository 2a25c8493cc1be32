"""Compare the compiled and numpy kernel backends.

Usage::

    python benchmarks/bench_kernels.py [--repeat 7] [--json out.json]

Times the raw kernels on desk-scale and larger inputs, then one full default
selection run under each backend.
"""

import argparse
import json
import sys
import timeit

import numpy as np

from bansa import _kernels_py, kernels
from bansa.config import RunConfig
from bansa.masking import sample_masks
from bansa.selector import run_pipeline


def _map(n, seed=0):
    x = np.random.default_rng(seed).normal(size=(n, n))
    e = np.exp(x - x.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def _best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def bench_kernels(repeat):
    mods = {"python": _kernels_py}
    if "compiled" in kernels.available_backends():
        from bansa import _ckernels
        mods["compiled"] = _ckernels
    rows = []
    for n, k in ((16, 10), (64, 10), (256, 16)):
        a = _map(n)
        masks = sample_masks(n, k, 0.2, 0)
        samples = _kernels_py.masked_samples(a, masks)
        number = max(1, 20000 // (n * n * k // 64 + 1))
        for name, mod in mods.items():
            rows.append({
                "kernel": "masked_terms", "n": n, "k": k, "backend": name,
                "seconds": _best(lambda: mod.masked_terms(a, masks), repeat, number),
            })
            rows.append({
                "kernel": "ensemble_terms", "n": n, "k": k, "backend": name,
                "seconds": _best(lambda: mod.ensemble_terms(samples), repeat, number),
            })
    return rows


def bench_pipeline(repeat):
    out = []
    for name in kernels.available_backends():
        with kernels.backend(name):
            run_pipeline(RunConfig())
            score = min(run_pipeline(RunConfig()).timings["score"] for _ in range(repeat))
        out.append({"kernel": "pipeline.score", "n": 16, "k": 10, "backend": name, "seconds": score})
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=7)
    ap.add_argument("--json", help="also write results to this file")
    args = ap.parse_args(argv)

    rows = bench_kernels(args.repeat) + bench_pipeline(args.repeat)
    by_case = {}
    for r in rows:
        by_case.setdefault((r["kernel"], r["n"], r["k"]), {})[r["backend"]] = r["seconds"]
    print(f"{'kernel':<16}{'N':>5}{'K':>4}{'python us':>12}{'compiled us':>13}{'speedup':>9}")
    for (kernel, n, k), t in by_case.items():
        py, cc = t.get("python"), t.get("compiled")
        speed = f"{py / cc:8.1f}x" if py and cc else "      -"
        cc_s = f"{cc * 1e6:13.1f}" if cc else f"{'-':>13}"
        print(f"{kernel:<16}{n:>5}{k:>4}{py * 1e6:12.1f}{cc_s}{speed}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
