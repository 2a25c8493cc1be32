"""Deterministic toy latent diffusion model.

Forward noising, the Tweedie estimate of the clean latent and the DDIM
update, plus a fixed-weight multi-layer attention "denoiser" whose weights are
drawn once from a model seed.  Nothing is trained; the point is to have a
pure function from (model seed, noise seed, prompt, schedule) to attention
maps and trajectories.

Timesteps run ``1..T`` with ``alpha_bar(0) == 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attention import attention_from_qk
from .errors import InvalidInput, ShapeError
from .rng import Stream, as_stream

DDIM_CONVENTIONS = ("printed", "standard")


@dataclass(frozen=True)
class NoiseSchedule:
    alphas_bar: np.ndarray

    def __post_init__(self):
        ab = np.array(self.alphas_bar, dtype=np.float64)
        if ab.ndim != 1 or ab.size < 1:
            raise InvalidInput("schedule needs at least one step")
        if np.any(ab <= 0) or np.any(ab > 1):
            raise InvalidInput("alpha_bar values must lie in (0, 1]")
        if np.any(np.diff(ab) >= 0):
            raise InvalidInput("alpha_bar must be strictly decreasing")
        ab.setflags(write=False)
        object.__setattr__(self, "alphas_bar", ab)

    @property
    def t_count(self) -> int:
        return self.alphas_bar.size

    def alpha_bar(self, t: int) -> float:
        if t == 0:
            return 1.0
        if not 1 <= t <= self.t_count:
            raise InvalidInput(f"timestep {t} outside 1..{self.t_count}")
        return float(self.alphas_bar[t - 1])


def linear_schedule(steps: int = 50, start: float = 0.9999, end: float = 0.02) -> NoiseSchedule:
    if steps == 1:
        return NoiseSchedule(np.array([start]))
    return NoiseSchedule(np.linspace(start, end, steps))


@dataclass(frozen=True)
class LatentState:
    data: np.ndarray
    t: int

    def __post_init__(self):
        z = np.array(self.data, dtype=np.float64)
        if z.ndim != 2:
            raise ShapeError(f"latent must be N x d, got shape {z.shape}")
        if not np.all(np.isfinite(z)):
            raise InvalidInput("latent contains non-finite entries")
        z.setflags(write=False)
        object.__setattr__(self, "data", z)

    @property
    def tokens(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class PromptEmbedding:
    vector: np.ndarray
    prompt_id: int | str = 0

    def __post_init__(self):
        v = np.array(self.vector, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise InvalidInput("prompt embedding contains non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)


def make_prompt(prompt_id: int, dim: int, seed: int = 0) -> PromptEmbedding:
    """Synthetic prompt embedding keyed by ``(seed, prompt_id)``."""
    vec = Stream.from_seed(seed).child("prompt").child(prompt_id).generator().standard_normal(dim)
    return PromptEmbedding(vec, prompt_id)


def forward_noise(z0: LatentState, t: int, sched: NoiseSchedule, stream: Stream | int,
                  return_noise: bool = False):
    if t == 0:
        raise InvalidInput(f"timestep {t} outside 1..{sched.t_count}")
    ab = sched.alpha_bar(t)
    eps = as_stream(stream).generator().standard_normal(z0.data.shape)
    zt = LatentState(np.sqrt(ab) * z0.data + np.sqrt(1.0 - ab) * eps, t)
    return (zt, eps) if return_noise else zt


def tweedie_estimate(z_t: LatentState, eps_hat, t: int, sched: NoiseSchedule) -> np.ndarray:
    """Clean-latent estimate ``(z_t - sqrt(1 - ab) * eps_hat) / sqrt(ab)``."""
    ab = sched.alpha_bar(t)
    if ab <= 0:
        raise InvalidInput("alpha_bar must be positive for the clean-latent estimate")
    eps_hat = np.asarray(eps_hat, dtype=np.float64)
    return (z_t.data - np.sqrt(1.0 - ab) * eps_hat) / np.sqrt(ab)


def ddim_step(z_t: LatentState, eps_hat, t: int, sched: NoiseSchedule,
              convention: str = "printed") -> LatentState:
    """One deterministic DDIM update from ``t`` to ``t - 1``.

    ``convention="printed"`` scales the clean estimate by ``sqrt(ab_t)``;
    ``"standard"`` uses ``sqrt(ab_{t-1})`` as in the usual DDIM sampler.
    """
    if not 1 <= t <= sched.t_count:
        raise InvalidInput(f"timestep {t} outside 1..{sched.t_count}")
    if convention not in DDIM_CONVENTIONS:
        raise InvalidInput(f"unknown DDIM convention {convention!r}")
    z0_hat = tweedie_estimate(z_t, eps_hat, t, sched)
    ab_prev = sched.alpha_bar(t - 1)
    coef = sched.alpha_bar(t) if convention == "printed" else ab_prev
    out = np.sqrt(coef) * z0_hat + np.sqrt(1.0 - ab_prev) * np.asarray(eps_hat, dtype=np.float64)
    return LatentState(out, t - 1)


def _timestep_features(t: int, t_count: int, dim: int) -> np.ndarray:
    phase = np.pi * t / max(t_count, 1)
    j = np.arange(dim)
    return np.where(j % 2 == 0, np.sin(phase * (j // 2 + 1)), np.cos(phase * (j // 2 + 1)))


class ToyDenoiser:
    """Fixed random multi-layer attention network standing in for a trained denoiser.

    Every layer reads the same input ``h``: the latent, an amplified copy of
    its token mean (the low-frequency part of the noise), and a prompt term
    gated by timestep features.  Layer ``l`` then applies its own
    query/key/value projections.

    The layer structure is shaped so that depth truncation has something to
    find.  The first ``diffuse_layers`` layers use a small logit gain and
    attend almost uniformly; the rest are sharp.  Query/key weights mix a
    component shared by all layers with a private one, ``layer_coupling``
    being the shared variance fraction.

    Parameters
    ----------
    model_seed : int
        Determines every weight.
    n_tokens, dim, layers : int
        Token count N, embedding width d, attention layer count L.
    layer_coupling : float
        Fraction in [0, 1] of query/key variance shared across layers.
    diffuse_layers : int
        Number of leading low-gain layers.
    diffuse_gain, attn_gain : float
        Query/key gain of the diffuse and sharp layers (logits scale with the
        square).
    prompt_gain : float
        Strength of the prompt term.
    lowfreq_gain : float
        Weight of the broadcast token mean of the latent.
    redundant : bool
        Every layer reuses the first layer's weights and gain.
    """

    def __init__(self, model_seed: int = 0, n_tokens: int = 16, dim: int = 8, layers: int = 8,
                 layer_coupling: float = 0.99, diffuse_layers: int = 2, diffuse_gain: float = 0.1,
                 attn_gain: float = 2.5, prompt_gain: float = 1.0, lowfreq_gain: float = 2.0,
                 redundant: bool = False):
        if min(n_tokens, dim, layers) < 1:
            raise InvalidInput("n_tokens, dim and layers must all be >= 1")
        if not 0.0 <= layer_coupling <= 1.0:
            raise InvalidInput("layer_coupling must lie in [0, 1]")
        if diffuse_layers < 0:
            raise InvalidInput("diffuse_layers must be >= 0")
        self.model_seed = int(model_seed)
        self.n_tokens = int(n_tokens)
        self.dim = int(dim)
        self.layers = int(layers)
        self.layer_coupling = float(layer_coupling)
        self.diffuse_layers = int(diffuse_layers)
        self.diffuse_gain = float(diffuse_gain)
        self.attn_gain = float(attn_gain)
        self.prompt_gain = float(prompt_gain)
        self.lowfreq_gain = float(lowfreq_gain)
        self.redundant = bool(redundant)

        root = Stream.from_seed(self.model_seed).child("toy-denoiser")
        d = self.dim
        g = lambda tag, shape: root.child(tag).generator().standard_normal(shape)  # noqa: E731

        shared_q, shared_k = g("shared-q", (d, d)), g("shared-k", (d, d))
        a, b = np.sqrt(self.layer_coupling), np.sqrt(1.0 - self.layer_coupling)
        self.w_q, self.w_k, self.w_v = [], [], []
        for l in range(self.layers):
            src = 0 if self.redundant else l
            gain = self.diffuse_gain if src < self.diffuse_layers else self.attn_gain
            wq = gain * (a * shared_q + b * g(f"q{src}", (d, d))) / np.sqrt(d)
            wk = gain * (a * shared_k + b * g(f"k{src}", (d, d))) / np.sqrt(d)
            wv = g(f"v{src}", (d, d)) / np.sqrt(d)
            for w in (wq, wk, wv):
                w.setflags(write=False)
            self.w_q.append(wq)
            self.w_k.append(wk)
            self.w_v.append(wv)
        self.prompt_coupling = g("prompt", (d, d)) / np.sqrt(d)
        self.time_coupling = 0.5 * g("time", (d, d)) / np.sqrt(d)
        self.token_gain = 0.5 + root.child("token-gain").generator().random(self.n_tokens)
        self.w_out = g("out", (d, d)) / np.sqrt(d)

    def config(self) -> dict:
        return {
            "model_seed": self.model_seed,
            "n_tokens": self.n_tokens,
            "dim": self.dim,
            "layers": self.layers,
            "layer_coupling": self.layer_coupling,
            "diffuse_layers": self.diffuse_layers,
            "diffuse_gain": self.diffuse_gain,
            "attn_gain": self.attn_gain,
            "prompt_gain": self.prompt_gain,
            "lowfreq_gain": self.lowfreq_gain,
            "redundant": self.redundant,
        }

    def _check(self, z_t: LatentState, prompt: PromptEmbedding):
        if z_t.data.shape != (self.n_tokens, self.dim):
            raise ShapeError(f"latent shape {z_t.data.shape} does not match denoiser "
                             f"({self.n_tokens}, {self.dim})")
        if prompt.vector.shape != (self.dim,):
            raise ShapeError(f"prompt width {prompt.vector.shape[0]} does not match dim {self.dim}")

    def hidden(self, z_t: LatentState, prompt: PromptEmbedding, t: int, t_count: int) -> np.ndarray:
        self._check(z_t, prompt)
        gate = 1.0 + _timestep_features(t, t_count, self.dim) @ self.time_coupling
        cond = self.prompt_gain * (prompt.vector @ self.prompt_coupling) * gate
        low = self.lowfreq_gain * z_t.data.mean(axis=0)
        return z_t.data + low + np.outer(self.token_gain, cond)

    def logits(self, z_t: LatentState, prompt: PromptEmbedding, t: int, t_count: int,
               scale: float | None = None) -> list[np.ndarray]:
        h = self.hidden(z_t, prompt, t, t_count)
        s = 1.0 / np.sqrt(self.dim) if scale is None else scale
        return [s * (h @ wq) @ (h @ wk).T for wq, wk in zip(self.w_q, self.w_k)]

    def attention(self, z_t: LatentState, prompt: PromptEmbedding, t: int, t_count: int) -> list[np.ndarray]:
        h = self.hidden(z_t, prompt, t, t_count)
        return [attention_from_qk(h @ wq, h @ wk) for wq, wk in zip(self.w_q, self.w_k)]

    def predict_noise(self, z_t: LatentState, prompt: PromptEmbedding, t: int, t_count: int) -> np.ndarray:
        h = self.hidden(z_t, prompt, t, t_count)
        mixed = np.zeros_like(h)
        for wq, wk, wv in zip(self.w_q, self.w_k, self.w_v):
            mixed += attention_from_qk(h @ wq, h @ wk) @ (h @ wv)
        return (mixed / self.layers + h) @ self.w_out


def attention_probe(denoiser: ToyDenoiser, z_t: LatentState, prompt: PromptEmbedding, t: int,
                    sched: NoiseSchedule) -> list[np.ndarray]:
    """Per-layer attention maps of the denoiser at timestep ``t``."""
    if z_t.dim != denoiser.dim:
        raise ShapeError(f"latent width {z_t.dim} does not match denoiser width {denoiser.dim}")
    return denoiser.attention(z_t, prompt, t, sched.t_count)


def rollout(denoiser: ToyDenoiser, z_T: LatentState, prompt: PromptEmbedding, sched: NoiseSchedule,
            convention: str = "printed") -> list[LatentState]:
    """Full DDIM trajectory ``[z_T, z_{T-1}, ..., z_0]``."""
    states = [z_T]
    z = z_T
    for t in range(z_T.t, 0, -1):
        eps = denoiser.predict_noise(z, prompt, t, sched.t_count)
        z = ddim_step(z, eps, t, sched, convention)
        states.append(z)
    return states
