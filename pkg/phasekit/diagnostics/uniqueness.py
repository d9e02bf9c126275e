"""Uniqueness and conditioning diagnostics, by exhaustive enumeration at desk scale."""

import logging
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from phasekit.core.signal import Signal
from phasekit.utils.constants import (
    COLLISION_MAX_QUADRUPLES,
    COMPLEMENT_MAX_VECTORS,
    RIP_MAX_K,
    RIP_MAX_SUBSETS,
)
from phasekit.utils.errors import GuardExceededError, ShapeMismatchError

logger = logging.getLogger(__name__)


def _normalized_columns(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2:
        raise ShapeMismatchError("expected a 2D matrix")
    norms = np.linalg.norm(a, axis=0)
    if np.any(norms == 0):
        raise ValueError(f"matrix has zero columns at {np.flatnonzero(norms == 0).tolist()}")
    return a / norms


def coherence_mu(a: np.ndarray) -> float:
    """Largest |<A_i, A_j>| / (||A_i|| ||A_j||) over distinct columns."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[1] < 2:
        raise ValueError("coherence needs a matrix with at least two columns")
    columns = _normalized_columns(a)
    gram = np.abs(columns.conj().T @ columns)
    np.fill_diagonal(gram, 0.0)
    return float(gram.max())


def rip_delta(a: np.ndarray, k: int) -> float:
    """Restricted isometry constant of order k over unit-norm columns.

    delta_k = max over k-column submatrices of max(1 - s_min^2, s_max^2 - 1).
    """
    a = np.asarray(a)
    columns = _normalized_columns(a)
    rows, cols = columns.shape
    if not 1 <= k <= cols:
        raise ValueError(f"k must be between 1 and {cols}, got {k}")
    subsets = comb(cols, k)
    if k > RIP_MAX_K or subsets > RIP_MAX_SUBSETS:
        raise GuardExceededError(
            f"refusing to enumerate {subsets} submatrices of order {k} "
            f"(limits: k <= {RIP_MAX_K}, {RIP_MAX_SUBSETS} subsets)"
        )

    delta = 0.0
    for idx in combinations(range(cols), k):
        singular = np.linalg.svd(columns[:, idx], compute_uv=False)
        s_max = singular[0]
        s_min = singular[-1] if k <= rows else 0.0
        delta = max(delta, 1.0 - s_min ** 2, s_max ** 2 - 1.0)
    logger.debug("delta_%d = %.6f over %d submatrices", k, delta, subsets)
    return float(delta)


@dataclass(frozen=True)
class ComplementResult:
    holds: bool
    witness: Optional[Tuple[int, ...]] = None


def complement_property_check(vectors: np.ndarray) -> ComplementResult:
    """Check that for every split of the vectors one side spans R^N.

    `vectors` is M x N, one real vector per row. On failure the witness is a
    subset S for which neither S nor its complement spans.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2:
        raise ShapeMismatchError("vectors must be an M x N array")
    m, n = vectors.shape
    if m > COMPLEMENT_MAX_VECTORS:
        raise GuardExceededError(
            f"refusing to enumerate 2^{m} subsets (limit {COMPLEMENT_MAX_VECTORS} vectors)"
        )

    def spans(indices: List[int]) -> bool:
        return len(indices) >= n and np.linalg.matrix_rank(vectors[indices]) == n

    if m < 2 * n - 1:
        witness = tuple(range(n - 1))
        return ComplementResult(False, witness)

    # S and its complement play symmetric roles, so vector 0 is always in S.
    for bits in range(1 << (m - 1)):
        subset = [0] + [i for i in range(1, m) if bits >> (i - 1) & 1]
        rest = [i for i in range(1, m) if not bits >> (i - 1) & 1]
        if not spans(subset) and not spans(rest):
            return ComplementResult(False, tuple(subset))
    return ComplementResult(True)


@dataclass(frozen=True)
class CollisionResult:
    collision_free: bool
    # (i, j, k, l) locations with i - j == k - l
    quadruple: Optional[Tuple[int, int, int, int]] = None


def collision_free_check(x: Union[Signal, np.ndarray]) -> CollisionResult:
    """True when no two distinct pairs of nonzero locations share a difference."""
    values = x.values if isinstance(x, Signal) else np.asarray(x)
    if values.ndim != 1:
        raise ShapeMismatchError("collision check is defined for 1D signals")
    locations = np.flatnonzero(np.abs(values) > 0).tolist()
    k = len(locations)
    if k ** 4 > COLLISION_MAX_QUADRUPLES:
        raise GuardExceededError(f"sparsity {k} exceeds the quadruple enumeration limit")

    seen: Dict[int, Tuple[int, int]] = {}
    for j_pos, j in enumerate(locations):
        for i in locations[j_pos + 1:]:
            difference = i - j
            if difference in seen:
                other = seen[difference]
                return CollisionResult(False, (other[0], other[1], i, j))
            seen[difference] = (i, j)
    return CollisionResult(True)
