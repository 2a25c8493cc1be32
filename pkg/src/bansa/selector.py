"""Noise pool construction, pool scoring and seed selection.

Scoring uses one shared mask set per call: every pool member and every layer
is perturbed by the same K Bernoulli masks, so differences between candidates
come from their attention maps and not from mask luck.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import acquisition
from .config import RunConfig, validate
from .diffusion import (
    LatentState,
    NoiseSchedule,
    PromptEmbedding,
    ToyDenoiser,
    attention_probe,
    ddim_step,
    linear_schedule,
    make_prompt,
    rollout,
)
from .errors import BansaError, InsufficientPool, InvalidInput
from .layers import LayerProfile, ScoreTable, group_means, select_depth, truncated_pool_scores
from .masking import sample_masks
from .rng import Stream

log = logging.getLogger(__name__)


@dataclass
class SeedCandidate:
    seed_id: int
    rng_seed: int
    latent: LatentState
    score: float | None = None


@dataclass
class SelectionReport:
    pool: list
    chosen: int
    criterion: str
    d_star: int
    table: ScoreTable
    config: dict = field(default_factory=dict)

    @property
    def scores(self) -> list:
        return [c.score for c in self.pool]

    @property
    def forced(self) -> bool:
        return len(self.pool) == 1


class StageError(BansaError):
    """A pipeline stage failed; wraps the original error and names the stage."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")


def latent_from_seed(rng_seed: int, n_tokens: int, dim: int, t: int) -> LatentState:
    data = Stream.from_seed(rng_seed).child("latent").generator().standard_normal((n_tokens, dim))
    return LatentState(data, t)


def build_pool(m: int, base_seed: int, n_tokens: int, dim: int, t: int) -> list[SeedCandidate]:
    """``m`` standard normal latents; candidate ``i`` gets its own 64-bit seed."""
    if m < 1:
        raise InvalidInput(f"pool size must be >= 1, got {m}")
    root = Stream.from_seed(base_seed).child("pool")
    pool = []
    for i in range(m):
        rng_seed = int(root.child(i).generator().integers(0, 2**63, dtype=np.int64))
        pool.append(SeedCandidate(i, rng_seed, latent_from_seed(rng_seed, n_tokens, dim, t)))
    return pool


def _advance(denoiser, z: LatentState, prompt, t_target: int, sched, convention) -> LatentState:
    while z.t > t_target:
        eps = denoiser.predict_noise(z, prompt, z.t, sched.t_count)
        z = ddim_step(z, eps, z.t, sched, convention)
    return z


def _score_one(cand, denoiser, prompt, timesteps, sched, n_layers, method, masks, k, jitter, stream,
               convention):
    per_t = []
    z = cand.latent
    for t in sorted(timesteps, reverse=True):
        z = _advance(denoiser, z, prompt, t, sched, convention)
        if method == "bansa_d":
            logits = denoiser.logits(z, prompt, t, sched.t_count)[:n_layers]
            sub = stream.child("jitter").child(cand.seed_id).child(t)
            row = [acquisition.bansa_d(lg, k, jitter, sub.child(l), l).value for l, lg in enumerate(logits)]
        elif method == "random":
            sub = stream.child("random").child(cand.seed_id).child(t)
            row = [acquisition.random_score(sub.child(l), l).value for l in range(n_layers)]
        else:
            maps = attention_probe(denoiser, z, prompt, t, sched)[:n_layers]
            score = acquisition.entropy_masked if method == "entropy" else acquisition.bansa_e_masked
            row = [score(a, masks, l).value for l, a in enumerate(maps)]
        per_t.append(row)
    return np.mean(per_t, axis=0)


def score_pool(pool, denoiser: ToyDenoiser, prompt: PromptEmbedding, timesteps, d_star: int, k: int,
               p: float, stream: Stream, sched: NoiseSchedule, method: str = "bansa_e",
               jitter_scale: float = 1.0, workers: int = 1, convention: str = "printed"):
    """Score every candidate at layers ``0..d_star``.

    Returns the per-layer :class:`ScoreTable` (rows in pool order) and the
    truncated cumulative score of each candidate.  Several ``timesteps``
    average the per-layer scores over those steps.
    """
    if not pool:
        raise InvalidInput("pool is empty")
    if not 0 <= d_star < denoiser.layers:
        raise InvalidInput(f"depth {d_star} outside 0..{denoiser.layers - 1}")
    if isinstance(timesteps, int):
        timesteps = [timesteps]
    masks = sample_masks(denoiser.n_tokens, k, p, stream.child("masks"))
    n_layers = d_star + 1

    def job(cand):
        return _score_one(cand, denoiser, prompt, timesteps, sched, n_layers, method, masks, k,
                          jitter_scale, stream, convention)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(job, pool))
    else:
        rows = [job(c) for c in pool]
    table = ScoreTable(np.array(rows), [c.seed_id for c in pool])
    scores = truncated_pool_scores(table, d_star)
    for cand, s in zip(pool, scores):
        cand.score = float(s)
    return table, scores


def select(scores, criterion: str = "argmin") -> int:
    """Index of the extreme score; ties go to the lowest index."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise InvalidInput("cannot select from an empty score list")
    if criterion == "argmin":
        return int(np.argmin(scores))
    if criterion == "argmax":
        return int(np.argmax(scores))
    raise InvalidInput(f"unknown criterion {criterion!r}")


def build_model(cfg: RunConfig):
    """Denoiser, schedule and prompt described by ``cfg``."""
    mc = cfg.model
    denoiser = ToyDenoiser(
        mc.model_seed, mc.n_tokens, mc.dim, mc.layers,
        layer_coupling=mc.layer_coupling, diffuse_layers=mc.diffuse_layers,
        diffuse_gain=mc.diffuse_gain, attn_gain=mc.attn_gain, prompt_gain=mc.prompt_gain,
        lowfreq_gain=mc.lowfreq_gain, redundant=mc.redundant,
    )
    sched = linear_schedule(mc.steps, mc.alpha_bar_start, mc.alpha_bar_end)
    prompt = make_prompt(cfg.prompt_id, mc.dim, cfg.prompt_seed)
    return denoiser, sched, prompt


def scoring_stream(cfg: RunConfig) -> Stream:
    return Stream.from_seed(cfg.base_seed).child("score").child(cfg.prompt_id)


@dataclass
class PipelineResult:
    report: SelectionReport
    trajectory: list
    timings: dict


def run_pipeline(cfg: RunConfig, model=None) -> PipelineResult:
    """Score the pool, pick a seed, and roll the chosen seed out in full.

    Sampling restarts from the chosen ``z_T``; probe-step work is not reused.
    """
    validate(cfg)
    timings = {}

    def stage(name, fn):
        t0 = time.perf_counter()
        try:
            out = fn()
        except StageError:
            raise
        except Exception as exc:  # noqa: BLE001
            raise StageError(name, exc) from exc
        timings[name] = time.perf_counter() - t0
        log.debug("stage %s took %.4fs", name, timings[name])
        return out

    denoiser, sched, prompt = stage("model", lambda: model or build_model(cfg))
    mc = cfg.model
    pool = stage("pool", lambda: build_pool(cfg.m, cfg.base_seed, mc.n_tokens, mc.dim, sched.t_count))
    d_star = cfg.depth_index()
    table, scores = stage("score", lambda: score_pool(
        pool, denoiser, prompt, cfg.timesteps(), d_star, cfg.k, cfg.p, scoring_stream(cfg), sched,
        method=cfg.method, jitter_scale=cfg.jitter_scale, workers=cfg.workers,
        convention=mc.ddim_convention))
    chosen = stage("select", lambda: select(scores, cfg.criterion))
    traj = stage("rollout", lambda: rollout(denoiser, pool[chosen].latent, prompt, sched, mc.ddim_convention))
    report = SelectionReport(pool, chosen, cfg.criterion, d_star, table, cfg.to_dict())
    return PipelineResult(report, traj, timings)


@dataclass
class ProbeResult:
    table: ScoreTable
    groups: list
    profile: LayerProfile
    averaged: bool


def probe_layers(cfg: RunConfig, model=None, prompts: int | None = None, averaged: bool = False) -> ProbeResult:
    """Per-layer scores over ``prompts`` x ``m`` (prompt, seed) pairs and the depth they imply.

    Correlation runs across every (prompt, seed) row; with ``averaged`` the
    rows of each prompt are first averaged over seeds and correlation runs
    across prompts instead.
    """
    validate(cfg)
    if cfg.m < 2:
        raise InsufficientPool(f"layer probing needs a pool of at least 2 seeds, got m={cfg.m}")
    prompts = cfg.probe_prompts if prompts is None else prompts
    denoiser, sched, _ = model or build_model(cfg)
    mc = cfg.model
    pool = build_pool(cfg.m, cfg.base_seed, mc.n_tokens, mc.dim, sched.t_count)
    rows, groups = [], []
    for pid in range(prompts):
        pcfg = cfg.replace(prompt_id=pid)
        prompt = make_prompt(pid, mc.dim, cfg.prompt_seed)
        table, _ = score_pool(
            pool, denoiser, prompt, cfg.timesteps(), mc.layers - 1, cfg.k, cfg.p, scoring_stream(pcfg),
            sched, method=cfg.method, jitter_scale=cfg.jitter_scale, workers=cfg.workers,
            convention=mc.ddim_convention)
        rows.extend(table.rows)
        groups.extend([pid] * cfg.m)
    table = ScoreTable(np.array(rows), [f"{g}:{c.seed_id}" for g in range(prompts) for c in pool])
    target = group_means(table, groups) if averaged else table
    return ProbeResult(table, groups, select_depth(target, cfg.tau), averaged)
