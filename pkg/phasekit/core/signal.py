"""Signal containers and the trivial-ambiguity machinery.

Global phase, circular shift and conjugate inversion all leave the Fourier
magnitude unchanged, so every comparison between a reconstruction and a
reference goes through `align_to_reference`. Shifts are circular on the grid
the signals live on; callers that compare against an oversampled measurement
embed both signals on the measurement grid first.

2D signals flatten row-major wherever a vector is needed.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from phasekit.utils.errors import ShapeMismatchError
from phasekit.utils.helpers import Shape, pad_to_shape

logger = logging.getLogger(__name__)


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class Signal:
    """Complex 1D or 2D sample array, immutable after construction."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128, copy=True)
        if values.ndim not in (1, 2):
            raise ShapeMismatchError(f"signals are 1D or 2D, got {values.ndim} dimensions")
        if values.size == 0:
            raise ShapeMismatchError("signal must contain at least one sample")
        if not np.all(np.isfinite(values)):
            raise ValueError("signal contains non-finite samples")
        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def zeros(cls, shape: Shape) -> "Signal":
        return cls(np.zeros(shape, dtype=np.complex128))

    @property
    def shape(self) -> Shape:
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def size(self) -> int:
        return self.values.size

    def flat(self) -> np.ndarray:
        """Row-major vector view of the samples."""
        return self.values.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    def embed(self, grid_shape: Shape) -> "Signal":
        """Zero-pad onto a larger grid, keeping sample 0 at the origin."""
        if len(grid_shape) != self.ndim:
            raise ShapeMismatchError(
                f"grid {tuple(grid_shape)} does not match a {self.ndim}D signal"
            )
        return Signal(pad_to_shape(self.values, tuple(grid_shape)))

    def allclose(self, other: "Signal", atol: float = 1e-12) -> bool:
        return self.shape == other.shape and np.allclose(self.values, other.values, atol=atol)


@dataclass(frozen=True, eq=False)
class SupportMask:
    """Boolean in-support indicator with at least one true sample."""

    mask: np.ndarray

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool, copy=True)
        if mask.ndim not in (1, 2):
            raise ShapeMismatchError(f"support masks are 1D or 2D, got {mask.ndim} dimensions")
        if not mask.any():
            raise ValueError("support mask must contain at least one in-support sample")
        object.__setattr__(self, "mask", _frozen(mask))

    @classmethod
    def full(cls, shape: Shape) -> "SupportMask":
        return cls(np.ones(shape, dtype=bool))

    @classmethod
    def box(cls, grid_shape: Shape, extent: Shape) -> "SupportMask":
        """Low-corner box of `extent` samples per axis on `grid_shape`."""
        mask = np.zeros(grid_shape, dtype=bool)
        mask[tuple(slice(0, n) for n in extent)] = True
        return cls(mask)

    @classmethod
    def from_signal(cls, x: Signal, tolerance: float = 0.0) -> "SupportMask":
        return cls(np.abs(x.values) > tolerance)

    @property
    def shape(self) -> Shape:
        return self.mask.shape

    def count(self) -> int:
        return int(self.mask.sum())

    def embed(self, grid_shape: Shape) -> "SupportMask":
        return SupportMask(pad_to_shape(self.mask, tuple(grid_shape)))

    def dilate(self, iterations: int) -> "SupportMask":
        """Grow the support by `iterations` samples (square structuring element)."""
        if iterations <= 0:
            return self
        structure = np.ones((3,) * self.mask.ndim, dtype=bool)
        return SupportMask(ndimage.binary_dilation(self.mask, structure=structure, iterations=iterations))


@dataclass(frozen=True)
class AmbiguityTransform:
    """Global phase, circular shift and optional conjugate inversion.

    Applied as: conjugate-invert (x[n] -> conj(x[-n mod M])), then roll by
    `shift`, then multiply by exp(i * global_phase).
    """

    global_phase: float = 0.0
    shift: Tuple[int, ...] = field(default_factory=tuple)
    conjugate_flip: bool = False

    def __post_init__(self):
        object.__setattr__(self, "shift", tuple(int(s) for s in self.shift))
        object.__setattr__(self, "global_phase", float(self.global_phase))

    @classmethod
    def identity(cls, ndim: int) -> "AmbiguityTransform":
        return cls(0.0, (0,) * ndim, False)

    def inverse(self) -> "AmbiguityTransform":
        # A flipped transform is its own inverse.
        if self.conjugate_flip:
            return self
        return AmbiguityTransform(-self.global_phase, tuple(-s for s in self.shift), False)

    def to_dict(self) -> dict:
        return {
            "global_phase": self.global_phase,
            "shift": list(self.shift),
            "conjugate_flip": self.conjugate_flip,
        }


def conjugate_invert(values: np.ndarray) -> np.ndarray:
    """conj(x[-n mod M]) along every axis (point reflection through the origin)."""
    flipped = np.conj(values)
    for axis in range(values.ndim):
        flipped = np.roll(np.flip(flipped, axis=axis), 1, axis=axis)
    return flipped


def apply_ambiguity(
    x: Signal,
    t: AmbiguityTransform,
    grid_shape: Optional[Sequence[int]] = None,
) -> Signal:
    """Apply an ambiguity transform on `grid_shape` (defaults to the signal's own shape).

    The result lives on the grid; its oversampled Fourier magnitude on that
    grid equals the one of `x`.
    """
    grid = tuple(grid_shape) if grid_shape is not None else x.shape
    shift = t.shift if t.shift else (0,) * x.ndim
    if len(shift) != x.ndim:
        raise ShapeMismatchError(
            f"shift has {len(shift)} offsets but the signal is {x.ndim}D"
        )
    if len(grid) != x.ndim:
        raise ShapeMismatchError(f"grid {grid} does not match a {x.ndim}D signal")

    values = pad_to_shape(x.values, grid)
    if t.conjugate_flip:
        values = conjugate_invert(values)
    reduced = tuple(s % n for s, n in zip(shift, grid))
    if any(reduced):
        values = np.roll(values, reduced, axis=tuple(range(x.ndim)))
    if t.global_phase != 0.0:
        values = values * np.exp(1j * t.global_phase)
    return Signal(values)


def _best_shift(candidate: np.ndarray, reference: np.ndarray) -> Tuple[Tuple[int, ...], complex]:
    """Circular shift s maximizing |<reference, roll(candidate, s)>| via FFT correlation."""
    axes = tuple(range(reference.ndim))
    # corr[j] = sum_n conj(R[n]) C[n + j]; rolling C by s pairs with j = -s
    corr = np.fft.ifftn(np.conj(np.fft.fftn(reference, axes=axes)) * np.fft.fftn(candidate, axes=axes), axes=axes)
    index = np.unravel_index(int(np.argmax(np.abs(corr))), corr.shape)
    shift = tuple(int((-j) % n) for j, n in zip(index, reference.shape))
    return shift, complex(corr[index])


def align_to_reference(candidate: Signal, reference: Signal) -> Tuple[Signal, AmbiguityTransform, float]:
    """Find the ambiguity member of `candidate` closest to `reference`.

    Searches every circular shift with and without conjugate inversion; the
    optimal global phase is the argument of the inner product. Returns the
    aligned signal, the transform that produces it from `candidate` and the
    relative residual ||aligned - reference|| / ||reference||.
    """
    if candidate.shape != reference.shape:
        raise ShapeMismatchError(
            f"candidate shape {candidate.shape} differs from reference shape {reference.shape}"
        )
    ref_norm = reference.norm()
    if ref_norm == 0.0:
        raise ValueError("reference signal has zero norm")

    best = None
    for flip in (False, True):
        base = conjugate_invert(candidate.values) if flip else candidate.values
        shift, _ = _best_shift(base, reference.values)
        shifted = apply_ambiguity(candidate, AmbiguityTransform(0.0, shift, flip))
        phase = float(np.angle(np.vdot(shifted.values, reference.values)))
        transform = AmbiguityTransform(phase, shift, flip)
        aligned = apply_ambiguity(candidate, transform)
        residual = float(np.linalg.norm(aligned.values - reference.values) / ref_norm)
        if best is None or residual < best[2]:
            best = (aligned, transform, residual)

    logger.debug("Aligned candidate with residual %.3e via %s", best[2], best[1])
    return best


def align_global_phase(candidate: Signal, reference: Signal) -> Tuple[Signal, AmbiguityTransform, float]:
    """Global-phase-only alignment, for measurements without shift or flip symmetry."""
    if candidate.shape != reference.shape:
        raise ShapeMismatchError(
            f"candidate shape {candidate.shape} differs from reference shape {reference.shape}"
        )
    ref_norm = reference.norm()
    if ref_norm == 0.0:
        raise ValueError("reference signal has zero norm")
    phase = float(np.angle(np.vdot(candidate.values, reference.values)))
    transform = AmbiguityTransform(phase, (0,) * candidate.ndim, False)
    aligned = apply_ambiguity(candidate, transform)
    return aligned, transform, float(np.linalg.norm(aligned.values - reference.values) / ref_norm)
