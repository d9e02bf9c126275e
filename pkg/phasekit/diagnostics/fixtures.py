"""Reference fixtures: the autocorrelation counterexample and dictionaries of known coherence."""

from typing import Tuple

import numpy as np
from scipy import linalg

from phasekit.core.signal import Signal
from phasekit.utils.helpers import make_rng


def counterexample_pair() -> Tuple[Signal, Signal]:
    """Two signals with identical autocorrelation that are not ambiguity-equivalent."""
    root3 = np.sqrt(3.0)
    u = Signal([1.0, 0.0, -2.0, 0.0, -2.0])
    v = Signal([1.0 - root3, 0.0, 1.0, 0.0, 1.0 + root3])
    return u, v


def two_ortho_basis_dictionary(n: int, seed: int) -> np.ndarray:
    """Q [I, H / sqrt(n)] with Q random orthogonal and H Hadamard; coherence 1 / sqrt(n).

    `n` must be a power of two.
    """
    if n < 2 or n & (n - 1):
        raise ValueError(f"n must be a power of two, got {n}")
    q, _ = np.linalg.qr(make_rng(seed).standard_normal((n, n)))
    return q @ np.hstack([np.eye(n), linalg.hadamard(n) / np.sqrt(n)])
