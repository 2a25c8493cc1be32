"""Command-line entry point: ``bansa {score,select,probe-layers,analyze,oracle}``.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 internal error.
Verbosity comes from the ``BANSA_VERBOSITY`` environment variable
(0 warnings only, 1 info, 2 debug).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from . import config as config_mod
from . import oracle, report, tensorio
from .acquisition import bansa_e
from .attention import as_attention_map
from .errors import BansaError, InvalidInput, ShapeError, TensorFormatError
from .metrics import (
    group_summary,
    intra_frame_variance,
    pairwise_attention_distance,
    trajectory_variation,
)
from .rng import Stream
from .selector import build_model, build_pool, probe_layers, run_pipeline, score_pool, scoring_stream, select

log = logging.getLogger("bansa")

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3


def _setup_logging() -> None:
    raw = os.environ.get("BANSA_VERBOSITY", "0")
    try:
        level = int(raw)
    except ValueError:
        level = 0
    logging.basicConfig(
        level={0: logging.WARNING, 1: logging.INFO}.get(level, logging.DEBUG),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _read_tensor(path) -> np.ndarray:
    try:
        return tensorio.read_tensor(path)
    except TensorFormatError as exc:
        raise TensorFormatError(f"{path}: {exc}") from None


def _load_config(path, overrides: dict):
    """Config from a JSON config file or from the config echoed in a report."""
    if path is None:
        cfg = config_mod.RunConfig()
    else:
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise config_mod.ConfigError([f"{path}: not valid JSON ({exc})"]) from None
        if isinstance(data, dict) and "schema_version" in data and "payload" in data:
            data = data["payload"].get("config", {})
        cfg = config_mod.from_dict(data)
    changes = {k: v for k, v in overrides.items() if v is not None}
    return config_mod.validate(cfg.replace(**changes)) if changes else cfg


def _emit_line(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, allow_nan=False, separators=(",", ":")) + "\n")


def _stem(path: str) -> str:
    base = os.path.basename(path)
    return base[:-5] if base.endswith(".json") else base


def cmd_score(args) -> int:
    raw = _read_tensor(args.attention_file)
    if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
        raise ShapeError(f"{args.attention_file}: expected a square N x N map, got shape {raw.shape}")
    a = as_attention_map(raw)
    score = bansa_e(a, args.k, args.p, Stream.from_seed(args.seed))
    _emit_line({
        "schema_version": report.SCHEMA_VERSION,
        "kind": score.kind,
        "value": score.value,
        "k": score.k_used,
        "p": args.p,
        "seed": args.seed,
        "n": int(a.shape[0]),
        "file": os.path.basename(args.attention_file),
    })
    return EXIT_OK


def cmd_select(args) -> int:
    cfg = _load_config(args.config, {
        "criterion": args.criterion, "m": args.m, "prompt_id": args.prompt_id,
        "base_seed": args.base_seed, "d_star": args.d_star, "workers": args.workers,
    })
    result = run_pipeline(cfg)
    out = args.output
    stem = _stem(out)
    artifacts = {"chosen_latent": f"{stem}.latent.atns", "trajectory": f"{stem}.trajectory.atns"}
    doc = report.document(report.selection_payload(result, cfg, artifacts), result.timings)
    chosen = result.report.pool[result.report.chosen]
    t0 = time.perf_counter()
    tensorio.write_tensor(report.artifact_path(out, artifacts["chosen_latent"]), chosen.latent.data)
    tensorio.write_tensor(report.artifact_path(out, artifacts["trajectory"]),
                          np.stack([s.data for s in result.trajectory]))
    doc["timings"]["write"] = time.perf_counter() - t0
    report.write(doc, out)
    print(out)
    return EXIT_OK


def cmd_probe_layers(args) -> int:
    cfg = _load_config(args.config, {"tau": args.tau, "probe_prompts": args.prompts,
                                     "workers": args.workers})
    t0 = time.perf_counter()
    probe = probe_layers(cfg, averaged=args.averaged)
    elapsed = time.perf_counter() - t0
    out = args.output
    curve_file = f"{_stem(out)}.curve.tsv"
    doc = report.document(report.profile_payload(probe, cfg, curve_file), {"probe": elapsed})
    with open(report.artifact_path(out, curve_file), "w", encoding="utf-8") as fh:
        fh.write(report.curve_table(probe.profile))
    report.write(doc, out)
    print(out)
    print(f"d_star={probe.profile.d_star + 1}")
    return EXIT_OK


def _maps_from(paths) -> list:
    maps = []
    for path in paths:
        arr = _read_tensor(path)
        if arr.ndim == 2:
            arr = arr[None]
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ShapeError(f"{path}: expected an N x N map or a K x N x N stack, got shape {arr.shape}")
        maps.extend(as_attention_map(m) for m in arr)
    return maps


def _transfer(doc, prompt_id: int) -> dict:
    cfg = report.config_from_report(doc)
    tcfg = cfg.replace(prompt_id=prompt_id)
    denoiser, sched, prompt = build_model(tcfg)
    mc = tcfg.model
    pool = build_pool(tcfg.m, tcfg.base_seed, mc.n_tokens, mc.dim, sched.t_count)
    _, scores = score_pool(pool, denoiser, prompt, tcfg.timesteps(), tcfg.depth_index(), tcfg.k, tcfg.p,
                           scoring_stream(tcfg), sched, method=tcfg.method, jitter_scale=tcfg.jitter_scale,
                           workers=tcfg.workers, convention=mc.ddim_convention)
    chosen = doc["payload"]["selection"]["chosen_seed_id"]
    order = np.argsort(scores, kind="stable")
    if tcfg.criterion == "argmax":
        order = order[::-1]
    return {
        "source_prompt_id": cfg.prompt_id,
        "target_prompt_id": prompt_id,
        "chosen_seed_id": chosen,
        "score_under_target": float(scores[chosen]),
        "rank_under_target": int(np.flatnonzero(order == chosen)[0]) + 1,
        "target_choice": select(scores, tcfg.criterion),
        "pool_size": len(pool),
    }


def cmd_analyze(args) -> int:
    if not (args.trajectory or args.report or args.low or args.high):
        raise InvalidInput("nothing to analyze: give --trajectory, --report, or --low/--high")
    if bool(args.low) != bool(args.high):
        raise InvalidInput("--low and --high must be given together")
    if args.transfer_prompt is not None and not args.report:
        raise InvalidInput("--transfer-prompt needs --report")
    payload = {"kind": "analysis", "cutoff": args.cutoff}

    trajectories = []
    for path in args.trajectory or []:
        arr = _read_tensor(path)
        if arr.ndim != 3:
            raise ShapeError(f"{path}: expected a steps x N x d trajectory, got shape {arr.shape}")
        trajectories.append((os.path.basename(path), arr))
    reports = []
    for path in args.report or []:
        doc = report.load(path)
        reports.append((path, doc))
        name = doc["payload"].get("artifacts", {}).get("trajectory")
        if name:
            trajectories.append((name, _read_tensor(report.artifact_path(path, name))))

    if trajectories:
        payload["trajectories"] = [{
            "file": name,
            "steps": int(arr.shape[0]) - 1,
            "trajectory_variation": trajectory_variation(arr, args.cutoff),
            "final_intra_frame_variance": intra_frame_variance(arr[-1]),
        } for name, arr in trajectories]
        if len(trajectories) >= 2:
            if len({arr.shape for _, arr in trajectories}) > 1:
                raise ShapeError("trajectories have different shapes")
            payload["trajectory_pairwise_distance"] = pairwise_attention_distance(
                [arr for _, arr in trajectories])
    if args.low:
        payload["attention_groups"] = group_summary(_maps_from(args.low), _maps_from(args.high)).as_dict()
    if args.transfer_prompt is not None:
        payload["transfer"] = [_transfer(doc, args.transfer_prompt) for _, doc in reports]

    doc = report.document(payload)
    if args.output:
        report.write(doc, args.output)
        print(args.output)
    else:
        sys.stdout.write(report.dumps(doc))
    return EXIT_OK


def cmd_oracle(args) -> int:
    checks = oracle.run_all(seed=args.seed, cases=args.cases)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bansa", description="Attention-uncertainty noise seed selection.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="BANSA-E of one attention map file")
    p.add_argument("attention_file")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--p", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("select", help="score a noise pool, pick a seed, roll it out")
    p.add_argument("config", nargs="?", help="config JSON, or a previous report to replay")
    p.add_argument("-o", "--output", default="report.json")
    p.add_argument("--criterion", choices=config_mod.CRITERIA)
    p.add_argument("--m", type=int)
    p.add_argument("--prompt-id", type=int)
    p.add_argument("--base-seed", type=int)
    p.add_argument("--d-star", type=int, help="1-based truncation depth")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("probe-layers", help="per-layer scores, correlation curve and d*")
    p.add_argument("config", nargs="?")
    p.add_argument("-o", "--output", default="profile.json")
    p.add_argument("--prompts", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--averaged", action="store_true", help="average seeds per prompt before correlating")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_probe_layers)

    p = sub.add_parser("analyze", help="trajectory and attention-distance metrics")
    p.add_argument("--trajectory", action="append", metavar="FILE")
    p.add_argument("--report", action="append", metavar="FILE")
    p.add_argument("--low", action="append", metavar="FILE", help="low-score attention maps")
    p.add_argument("--high", action="append", metavar="FILE", help="high-score attention maps")
    p.add_argument("--cutoff", type=float, default=0.25)
    p.add_argument("--transfer-prompt", type=int, help="re-score each report's pool under this prompt")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("oracle", help="run the brute-force verification suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=50)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BansaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        name = exc.filename if exc.filename is not None else ""
        print(f"error: cannot access {name}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
