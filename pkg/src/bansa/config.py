"""Run configuration: defaults, validation, JSON round trip."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .errors import ConfigError

CRITERIA = ("argmin", "argmax")
METHODS = ("bansa_e", "bansa_d", "entropy", "random")


@dataclass(frozen=True)
class ModelConfig:
    model_seed: int = 0
    n_tokens: int = 16
    dim: int = 8
    layers: int = 8
    steps: int = 50
    alpha_bar_start: float = 0.9999
    alpha_bar_end: float = 0.02
    layer_coupling: float = 0.99
    diffuse_layers: int = 2
    diffuse_gain: float = 0.1
    attn_gain: float = 2.5
    prompt_gain: float = 1.0
    lowfreq_gain: float = 2.0
    redundant: bool = False
    ddim_convention: str = "printed"


@dataclass(frozen=True)
class RunConfig:
    m: int = 10
    k: int = 10
    p: float = 0.2
    tau: float = 0.7
    # None means the first denoising step (t = steps)
    probe_timesteps: tuple | None = None
    base_seed: int = 0
    prompt_id: int = 0
    prompt_seed: int = 0
    criterion: str = "argmin"
    method: str = "bansa_e"
    jitter_scale: float = 1.0
    # 1-based truncation depth; None scores every layer
    d_star: int | None = None
    probe_prompts: int = 100
    trajectory_cutoff: float = 0.25
    workers: int = 1
    model: ModelConfig = field(default_factory=ModelConfig)

    def timesteps(self) -> list[int]:
        if self.probe_timesteps is None:
            return [self.model.steps]
        return [int(t) for t in self.probe_timesteps]

    def depth_index(self) -> int:
        """0-based truncation depth."""
        return self.model.layers - 1 if self.d_star is None else self.d_star - 1

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if d["probe_timesteps"] is not None:
            d["probe_timesteps"] = list(d["probe_timesteps"])
        return d

    def replace(self, **changes) -> RunConfig:
        model_changes = changes.pop("model", None)
        cfg = dataclasses.replace(self, **changes)
        if model_changes:
            cfg = dataclasses.replace(cfg, model=dataclasses.replace(cfg.model, **model_changes))
        return cfg


def _problems(cfg: RunConfig) -> list[str]:
    out = []
    mc = cfg.model

    def need(cond, msg):
        if not cond:
            out.append(msg)

    need(isinstance(cfg.m, int) and cfg.m >= 1, f"m: pool size must be an integer >= 1, got {cfg.m!r}")
    need(isinstance(cfg.k, int) and cfg.k >= 1, f"k: ensemble size must be an integer >= 1, got {cfg.k!r}")
    need(isinstance(cfg.p, (int, float)) and 0.0 <= cfg.p <= 1.0, f"p: drop probability must lie in [0, 1], got {cfg.p!r}")
    need(isinstance(cfg.tau, (int, float)) and -1.0 <= cfg.tau <= 1.0, f"tau: threshold must lie in [-1, 1], got {cfg.tau!r}")
    need(cfg.criterion in CRITERIA, f"criterion: must be one of {CRITERIA}, got {cfg.criterion!r}")
    need(cfg.method in METHODS, f"method: must be one of {METHODS}, got {cfg.method!r}")
    need(isinstance(cfg.jitter_scale, (int, float)) and cfg.jitter_scale >= 0, f"jitter_scale: must be >= 0, got {cfg.jitter_scale!r}")
    need(isinstance(cfg.base_seed, int) and 0 <= cfg.base_seed < 2**64, f"base_seed: must be a 64-bit unsigned integer, got {cfg.base_seed!r}")
    need(isinstance(cfg.prompt_seed, int) and 0 <= cfg.prompt_seed < 2**64, f"prompt_seed: must be a 64-bit unsigned integer, got {cfg.prompt_seed!r}")
    need(isinstance(cfg.prompt_id, int) and cfg.prompt_id >= 0, f"prompt_id: must be an integer >= 0, got {cfg.prompt_id!r}")
    need(isinstance(cfg.probe_prompts, int) and cfg.probe_prompts >= 1, f"probe_prompts: must be an integer >= 1, got {cfg.probe_prompts!r}")
    need(isinstance(cfg.workers, int) and cfg.workers >= 1, f"workers: must be an integer >= 1, got {cfg.workers!r}")
    need(isinstance(cfg.trajectory_cutoff, (int, float)) and 0 < cfg.trajectory_cutoff < 0.5,
         f"trajectory_cutoff: normalized cutoff must lie in (0, 0.5), got {cfg.trajectory_cutoff!r}")

    need(isinstance(mc.model_seed, int) and 0 <= mc.model_seed < 2**64, f"model.model_seed: must be a 64-bit unsigned integer, got {mc.model_seed!r}")
    for name in ("n_tokens", "dim", "layers", "steps"):
        v = getattr(mc, name)
        need(isinstance(v, int) and v >= 1, f"model.{name}: must be an integer >= 1, got {v!r}")
    need(isinstance(mc.diffuse_layers, int) and mc.diffuse_layers >= 0, f"model.diffuse_layers: must be an integer >= 0, got {mc.diffuse_layers!r}")
    need(isinstance(mc.layer_coupling, (int, float)) and 0.0 <= mc.layer_coupling <= 1.0,
         f"model.layer_coupling: must lie in [0, 1], got {mc.layer_coupling!r}")
    need(isinstance(mc.alpha_bar_start, (int, float)) and isinstance(mc.alpha_bar_end, (int, float))
         and 0.0 < mc.alpha_bar_end < mc.alpha_bar_start <= 1.0,
         f"model.alpha_bar_start/alpha_bar_end: need 0 < end < start <= 1, got {mc.alpha_bar_start!r}, {mc.alpha_bar_end!r}")
    need(mc.ddim_convention in ("printed", "standard"), f"model.ddim_convention: must be 'printed' or 'standard', got {mc.ddim_convention!r}")

    if isinstance(mc.layers, int) and mc.layers >= 1 and cfg.d_star is not None:
        need(isinstance(cfg.d_star, int) and 1 <= cfg.d_star <= mc.layers,
             f"d_star: 1-based depth must lie in 1..{mc.layers}, got {cfg.d_star!r}")
    if cfg.probe_timesteps is not None and isinstance(mc.steps, int):
        ts = list(cfg.probe_timesteps)
        need(len(ts) >= 1 and all(isinstance(t, int) and 1 <= t <= mc.steps for t in ts),
             f"probe_timesteps: each must be an integer in 1..{mc.steps}, got {ts!r}")
    return out


def validate(cfg: RunConfig) -> RunConfig:
    problems = _problems(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


def from_dict(data: dict) -> RunConfig:
    """Build and validate a config; unknown keys are reported, not ignored."""
    if not isinstance(data, dict):
        raise ConfigError(["config: top level must be an object"])
    data = dict(data)
    problems = []
    model_data = data.pop("model", {}) or {}
    if not isinstance(model_data, dict):
        problems.append("model: must be an object")
        model_data = {}
    run_fields = {f.name for f in dataclasses.fields(RunConfig)} - {"model"}
    model_fields = {f.name for f in dataclasses.fields(ModelConfig)}
    problems += [f"{k}: unknown field" for k in sorted(set(data) - run_fields)]
    problems += [f"model.{k}: unknown field" for k in sorted(set(model_data) - model_fields)]
    if problems:
        raise ConfigError(problems)
    if data.get("probe_timesteps") is not None:
        data["probe_timesteps"] = tuple(data["probe_timesteps"])
    cfg = RunConfig(model=ModelConfig(**model_data), **data)
    return validate(cfg)


def load(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config: not valid JSON ({exc})"]) from None
    return from_dict(data)


def dump(cfg: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
