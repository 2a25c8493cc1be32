"""Attention-uncertainty scoring and noise seed selection for diffusion samplers.

The package scores candidate initial latents by how much a denoiser's
attention maps disagree under stochastic perturbation (BANSA, and its
single-pass Bernoulli-masked form BANSA-E), picks the least uncertain seed,
and ships a small deterministic toy diffusion model so the whole pipeline can
run and be tested without trained weights.
"""

from .acquisition import AcquisitionScore, bald_reference, bansa, bansa_d, bansa_e, predictive_entropy_score
from .attention import attention_from_qk, entropy, softmax_rows
from .config import ModelConfig, RunConfig
from .errors import (
    BadMagic,
    BadVersion,
    BansaError,
    ConfigError,
    DegenerateCorrelation,
    DimOverflow,
    InsufficientPool,
    InvalidInput,
    InvariantViolation,
    ShapeError,
    TensorFormatError,
    TruncatedPayload,
)
from .layers import LayerProfile, ScoreTable, select_depth
from .masking import AttentionEnsemble, make_ensemble, sample_mask
from .rng import Stream
from .selector import probe_layers, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "AcquisitionScore", "AttentionEnsemble", "BadMagic", "BadVersion", "BansaError", "ConfigError",
    "DegenerateCorrelation", "DimOverflow", "InsufficientPool", "InvalidInput", "InvariantViolation",
    "LayerProfile", "ModelConfig", "RunConfig", "ScoreTable", "ShapeError", "Stream", "TensorFormatError",
    "TruncatedPayload", "attention_from_qk", "bald_reference", "bansa", "bansa_d", "bansa_e", "entropy",
    "make_ensemble", "predictive_entropy_score", "probe_layers", "run_pipeline", "sample_mask",
    "select_depth", "softmax_rows",
]
