"""Helper functions shared by the solvers and the benchmark harness."""

import hashlib
import math
from typing import Sequence, Tuple, Union

import numpy as np
from scipy import stats

from phasekit.utils.constants import WILSON_CONFIDENCE

Shape = Tuple[int, ...]


def make_rng(seed: int) -> np.random.Generator:
    """Create the RNG stream for one solver run or one scene."""
    return np.random.default_rng(seed)


def derive_seed(base_seed: int, *parts: Union[str, int, float]) -> int:
    """Derive a stable 63-bit seed from a base seed and labelling parts.

    The derivation only depends on its inputs, so adding a solver or a sweep
    point to an experiment never changes the streams of the others.
    """
    key = "|".join([str(int(base_seed))] + [str(p) for p in parts])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def normalize_shape(m: Union[int, Sequence[int]], ndim: int) -> Shape:
    """Expand a per-axis size given as int or sequence to a full shape."""
    if isinstance(m, (int, np.integer)):
        return tuple([int(m)] * ndim)
    shape = tuple(int(v) for v in m)
    if len(shape) != ndim:
        raise ValueError(f"expected {ndim} grid sizes, got {len(shape)}")
    return shape


def pad_to_shape(values: np.ndarray, shape: Shape) -> np.ndarray:
    """Zero-pad an array at the high end of every axis."""
    if values.shape == tuple(shape):
        return values.copy()
    if any(n > m for n, m in zip(values.shape, shape)):
        raise ValueError(f"cannot pad shape {values.shape} into {tuple(shape)}")
    padded = np.zeros(shape, dtype=values.dtype)
    padded[tuple(slice(0, n) for n in values.shape)] = values
    return padded


def crop_to_shape(values: np.ndarray, shape: Shape) -> np.ndarray:
    """Keep the low-index corner of an array."""
    return values[tuple(slice(0, n) for n in shape)].copy()


def signed_frequency_index(shape: Shape) -> Tuple[np.ndarray, ...]:
    """Integer frequency index per axis in FFT layout (0, 1, ..., -1)."""
    return tuple(np.rint(np.fft.fftfreq(n) * n).astype(int) for n in shape)


def wilson_interval(successes: int, trials: int) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    z = stats.norm.ppf(0.5 + WILSON_CONFIDENCE / 2.0)
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def soft_threshold(values: np.ndarray, threshold: float) -> np.ndarray:
    """Elementwise complex soft threshold: shrink moduli by `threshold`."""
    modulus = np.abs(values)
    scale = np.maximum(modulus - threshold, 0.0) / np.where(modulus > 0, modulus, 1.0)
    return values * scale
