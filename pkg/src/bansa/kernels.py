"""Backend selection for the hot kernels.

The compiled module is used when it imports; otherwise the numpy fallback.
``use_backend`` switches at runtime, which is how the tests and the benchmark
compare the two.
"""

from __future__ import annotations

import contextlib

import numpy as np

from . import _kernels_py

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _kernels_py}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels

_active = _BACKENDS.get("compiled", _kernels_py)


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def backend_name() -> str:
    return "compiled" if _active is _ckernels else "python"


def use_backend(name: str) -> None:
    global _active
    try:
        _active = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available_backends()}") from None


@contextlib.contextmanager
def backend(name: str):
    previous = backend_name()
    use_backend(name)
    try:
        yield
    finally:
        use_backend(previous)


def _f64(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def _u8(x):
    return np.ascontiguousarray(x, dtype=np.uint8)


def row_entropy(a) -> float:
    return float(_active.row_entropy(_f64(a)))


def ensemble_terms(samples) -> tuple[float, float]:
    samples = _f64(samples)
    if (samples == samples[0]).all():
        # identical samples: both terms are the same number; averaging would
        # only add rounding noise to an exact zero difference
        h = row_entropy(samples[0])
        return h, h
    h_mean, h_each = _active.ensemble_terms(samples)
    return float(h_mean), float(h_each)


def masked_samples(a, masks) -> np.ndarray:
    return _active.masked_samples(_f64(a), _u8(masks))


def masked_terms(a, masks) -> tuple[float, float]:
    a, masks = _f64(a), _u8(masks)
    if (masks == masks[0]).all():
        h = row_entropy(_active.masked_samples(a, masks[:1])[0])
        return h, h
    h_mean, h_each = _active.masked_terms(a, masks)
    return float(h_mean), float(h_each)
