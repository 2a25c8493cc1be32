"""Report documents.

A report is a JSON object with a deterministic ``payload`` and, kept apart
from it, wall-clock ``timings`` and ``environment`` details.  Two runs with
the same inputs must produce byte-identical ``payload_bytes``.
"""

from __future__ import annotations

import json
import os

from . import kernels
from .config import from_dict
from .errors import InvalidInput
from .metrics import intra_frame_variance, trajectory_variation

SCHEMA_VERSION = 1


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, ensure_ascii=False) + "\n"


def payload_bytes(doc: dict) -> bytes:
    return dumps(doc["payload"]).encode("utf-8")


def document(payload: dict, timings: dict | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "payload": payload,
        "timings": dict(timings or {}),
        "environment": {"kernel_backend": kernels.backend_name()},
    }


def write(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))


def load(path) -> dict:
    """Read a report; fields this version does not know about are ignored."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("schema_version")
    if not isinstance(version, int) or version > SCHEMA_VERSION or "payload" not in doc:
        raise InvalidInput(f"{path}: unsupported report (schema_version {version!r})")
    return doc


def selection_payload(result, cfg, artifacts: dict | None = None) -> dict:
    rep = result.report
    chosen = rep.pool[rep.chosen]
    traj = result.trajectory
    return {
        "kind": "selection",
        "config": cfg.to_dict(),
        "scores": {
            "seed_ids": [c.seed_id for c in rep.pool],
            "rng_seeds": [c.rng_seed for c in rep.pool],
            "per_layer": rep.table.rows.tolist(),
            "truncated": [c.score for c in rep.pool],
            "layers_scored": rep.d_star + 1,
        },
        "selection": {
            "chosen_seed_id": chosen.seed_id,
            "chosen_rng_seed": chosen.rng_seed,
            "chosen_score": chosen.score,
            "criterion": rep.criterion,
            "reversed": rep.criterion == "argmax",
            "forced": rep.forced,
            "d_star": rep.d_star + 1,
        },
        "analysis": {
            "rollout_steps": len(traj) - 1,
            "trajectory_variation": trajectory_variation(traj, cfg.trajectory_cutoff),
            "final_intra_frame_variance": intra_frame_variance(traj[-1]),
        },
        "artifacts": dict(artifacts or {}),
    }


def profile_payload(probe, cfg, curve_file: str | None = None) -> dict:
    out = {
        "kind": "layer_profile",
        "config": cfg.to_dict(),
        "averaged": probe.averaged,
        "profile": probe.profile.as_dict(),
        "rows": len(probe.table.rows),
        "per_layer_table": probe.table.rows.tolist(),
    }
    if curve_file:
        out["artifacts"] = {"curve": curve_file}
    return out


def curve_table(profile) -> str:
    """Tab-separated ``depth, corr, mean_layer_score, mean_cumulative`` rows, 1-based depth."""
    lines = ["depth\tcorrelation\tlayer_score\tcumulative_score"]
    for d, (c, s, cu) in enumerate(zip(profile.corr_curve, profile.per_layer, profile.cumulative), 1):
        lines.append(f"{d}\t{'nan' if c != c else repr(c)}\t{s!r}\t{cu!r}")
    return "\n".join(lines) + "\n"


def config_from_report(doc: dict):
    return from_dict(doc["payload"]["config"])


def artifact_path(report_path, name: str) -> str:
    return os.path.join(os.path.dirname(os.path.abspath(report_path)), name)
