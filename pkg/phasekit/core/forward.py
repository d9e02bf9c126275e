"""Forward measurement models, noise and detector masking.

Noise-free intensities are normalized so that they equal |X|^2 exactly for
Fourier models and |<a_k, x>|^2 for general linear ones, with the inner
product <a, x> = a^H x.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from phasekit.core.signal import Signal
from phasekit.utils.constants import ModelKind, NoiseKind
from phasekit.utils.errors import ShapeMismatchError
from phasekit.utils.helpers import Shape, make_rng, normalize_shape, signed_frequency_index

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NoiseMeta:
    kind: NoiseKind = NoiseKind.NONE
    photon_budget: Optional[float] = None


@dataclass(frozen=True, eq=False)
class Observation:
    """Nonnegative intensities with a validity mask and noise metadata."""

    y: np.ndarray
    valid_mask: Optional[np.ndarray] = None
    noise: NoiseMeta = field(default_factory=NoiseMeta)

    def __post_init__(self):
        y = np.array(self.y, dtype=np.float64, copy=True)
        mask = (
            np.ones(y.shape, dtype=bool)
            if self.valid_mask is None
            else np.array(self.valid_mask, dtype=bool, copy=True)
        )
        if mask.shape != y.shape:
            raise ShapeMismatchError(f"mask shape {mask.shape} differs from y shape {y.shape}")
        if not np.all(np.isfinite(y)):
            raise ValueError("observation contains non-finite intensities")
        if np.any(y[mask] < 0):
            raise ValueError("observation has negative intensities on valid entries")
        y.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "valid_mask", mask)

    @property
    def shape(self) -> Shape:
        return self.y.shape

    def magnitude(self) -> np.ndarray:
        """Measured Fourier magnitude sqrt(y), with negatives clipped."""
        return np.sqrt(np.maximum(self.y, 0.0))


# ---------------------------------------------------------------------------
# Measurement models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OversampledFourier:
    """M-point DFT magnitudes; `m` is an int (all axes) or one size per axis."""

    m: Union[int, Tuple[int, ...]]
    kind: ModelKind = field(default=ModelKind.OVERSAMPLED_FOURIER, init=False)

    def grid(self, signal_shape: Shape) -> Shape:
        grid = normalize_shape(self.m, len(signal_shape))
        if any(m < n for m, n in zip(grid, signal_shape)):
            raise ShapeMismatchError(f"grid {grid} smaller than signal {signal_shape}")
        return grid

    def amplitudes(self, x: Signal) -> np.ndarray:
        return np.fft.fftn(x.values, s=self.grid(x.shape))


@dataclass(frozen=True, eq=False)
class GeneralLinear:
    """Intensity measurements y_k = |a_k^H x|^2; `vectors` is K x N."""

    vectors: np.ndarray
    kind: ModelKind = field(default=ModelKind.GENERAL_LINEAR, init=False)

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=np.complex128, copy=True)
        if vectors.ndim != 2 or vectors.shape[0] < 1 or vectors.shape[1] < 1:
            raise ShapeMismatchError("measurement vectors must form a non-empty K x N matrix")
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)

    @property
    def count(self) -> int:
        return self.vectors.shape[0]

    @property
    def length(self) -> int:
        return self.vectors.shape[1]

    def amplitudes(self, x: Signal) -> np.ndarray:
        if x.size != self.length:
            raise ShapeMismatchError(
                f"signal has {x.size} samples but measurement vectors have length {self.length}"
            )
        return self.vectors.conj() @ x.flat()

    def lifted_matrices(self) -> np.ndarray:
        """A_k = a_k a_k^H stacked as K x N x N."""
        return np.einsum("ki,kj->kij", self.vectors, self.vectors.conj())


@dataclass(frozen=True)
class LowPassFourier:
    """M-point DFT magnitudes of the signal after an ideal radial low-pass at `cutoff`.

    `cutoff` is in cycles per sample. Frequencies above it carry no
    information and are flagged invalid in the observation.
    """

    m: Union[int, Tuple[int, ...]]
    cutoff: float
    kind: ModelKind = field(default=ModelKind.LOW_PASS_FOURIER, init=False)

    def __post_init__(self):
        if not 0.0 < self.cutoff <= 0.5:
            raise ValueError(f"cutoff must be in (0, 0.5] cycles per sample, got {self.cutoff}")

    def grid(self, signal_shape: Shape) -> Shape:
        return OversampledFourier(self.m).grid(signal_shape)

    def passband(self, grid: Shape) -> np.ndarray:
        freqs = np.meshgrid(*[np.fft.fftfreq(n) for n in grid], indexing="ij")
        radius = np.sqrt(sum(f ** 2 for f in freqs))
        return radius <= self.cutoff + 1e-12

    def amplitudes(self, x: Signal) -> np.ndarray:
        grid = self.grid(x.shape)
        return np.fft.fftn(x.values, s=grid) * self.passband(grid)


@dataclass(frozen=True)
class MultiPlane:
    """Intensities of the field propagated to several planes (angular spectrum).

    `wavelengths`, when given, assigns one wavelength per plane.
    """

    distances: Tuple[float, ...]
    wavelength: float
    spacing: float
    wavelengths: Optional[Tuple[float, ...]] = None
    kind: ModelKind = field(default=ModelKind.MULTI_PLANE, init=False)

    def __post_init__(self):
        object.__setattr__(self, "distances", tuple(float(z) for z in self.distances))
        if not self.distances:
            raise ValueError("multi-plane model needs at least one plane")
        if self.wavelength <= 0 or self.spacing <= 0:
            raise ValueError("wavelength and spacing must be positive")
        if self.wavelengths is not None:
            object.__setattr__(self, "wavelengths", tuple(float(w) for w in self.wavelengths))
            if len(self.wavelengths) != len(self.distances):
                raise ValueError("one wavelength per plane is required")
            if any(w <= 0 for w in self.wavelengths):
                raise ValueError("wavelengths must be positive")

    def plane_wavelengths(self) -> Tuple[float, ...]:
        return self.wavelengths or (self.wavelength,) * len(self.distances)

    def amplitudes(self, x: Signal) -> np.ndarray:
        return np.stack(
            [
                angular_spectrum(x.values, z, lam, self.spacing)
                for z, lam in zip(self.distances, self.plane_wavelengths())
            ]
        )


MeasurementModel = Union[OversampledFourier, GeneralLinear, LowPassFourier, MultiPlane]


class PropagationConfig(BaseModel):
    """Free-space propagation parameters, all in meters."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    wavelength: float = Field(gt=0)
    distance: float = Field(ge=0)
    spacing: float = Field(gt=0)
    object_radius: Optional[float] = Field(default=None, gt=0)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def oversampled_dft(x: Signal, m: Union[int, Sequence[int]]) -> np.ndarray:
    """X[k] = sum_n x[n] exp(-2j pi k n / M) on an M-point grid per axis.

    Returns a plain complex ndarray of the grid shape, not a Signal.
    """
    return OversampledFourier(m if isinstance(m, (int, np.integer)) else tuple(m)).amplitudes(x)


def autocorrelation(x: Signal) -> np.ndarray:
    """g[m] = sum_i x[i] conj(x[i - m]) for m = -(N-1)..N-1 (1D only)."""
    if x.ndim != 1:
        raise ShapeMismatchError("autocorrelation is defined for 1D signals")
    values = x.values
    n = values.size
    positive = np.array([np.vdot(values[: n - m], values[m:]) for m in range(n)])
    return np.concatenate([np.conj(positive[:0:-1]), positive])


def power_spectrum_from_autocorrelation(g: np.ndarray) -> np.ndarray:
    """DFT of the lag sequence with lag 0 moved to index 0; equals |X_{2N-1}|^2."""
    g = np.asarray(g)
    if g.ndim != 1 or g.size % 2 == 0:
        raise ShapeMismatchError("autocorrelation must be a 1D sequence of odd length 2N-1")
    return np.real(np.fft.fft(np.fft.ifftshift(g)))


def fourier_measurement_vectors(n: int, m: int) -> GeneralLinear:
    """Vectors a_k with a_k^H x = X[k] for the M-point DFT of a length-N signal."""
    if m < n:
        raise ShapeMismatchError(f"M={m} is smaller than N={n}")
    k = np.arange(m)[:, None]
    idx = np.arange(n)[None, :]
    return GeneralLinear(np.exp(2j * np.pi * k * idx / m))


def intensity(x: Signal, model: MeasurementModel) -> Observation:
    """Noise-free intensity observation of `x` under `model`."""
    values = np.abs(model.amplitudes(x)) ** 2
    valid = None
    if isinstance(model, LowPassFourier):
        valid = model.passband(model.grid(x.shape))
    return Observation(values, valid)


def wavenumbers(shape: Shape, spacing: float) -> np.ndarray:
    """Squared transverse wavenumber k_x^2 + k_y^2 on the FFT grid."""
    ks = np.meshgrid(*[2 * np.pi * np.fft.fftfreq(n, d=spacing) for n in shape], indexing="ij")
    return sum(k ** 2 for k in ks)


def transfer_function(shape: Shape, distance: float, wavelength: float, spacing: float) -> np.ndarray:
    """exp(-i z sqrt(k^2 - kr^2)) on the propagating band, exp(-|z| sqrt(kr^2 - k^2)) beyond it.

    A negative distance propagates backwards: the propagating band takes the
    conjugate phase and evanescent components still decay.
    """
    k = 2 * np.pi / wavelength
    kr2 = wavenumbers(shape, spacing)
    propagating = kr2 <= k * k
    kz = np.sqrt(np.abs(k * k - kr2))
    return np.where(propagating, np.exp(-1j * distance * kz), np.exp(-abs(distance) * kz))


def angular_spectrum(values: np.ndarray, distance: float, wavelength: float, spacing: float) -> np.ndarray:
    if distance == 0:
        return np.array(values, dtype=np.complex128, copy=True)
    t = transfer_function(values.shape, distance, wavelength, spacing)
    return np.fft.ifftn(np.fft.fftn(values) * t)


def propagate(e0: Signal, cfg: PropagationConfig) -> Signal:
    """Free-space propagation of a sampled field by cfg.distance."""
    return Signal(angular_spectrum(e0.values, cfg.distance, cfg.wavelength, cfg.spacing))


def fresnel_number(cfg: PropagationConfig) -> float:
    """N_F = a^2 / (lambda z)."""
    if cfg.object_radius is None:
        raise ValueError("object_radius is required for the Fresnel number")
    if cfg.distance == 0:
        raise ValueError("Fresnel number is undefined at zero distance")
    return cfg.object_radius ** 2 / (cfg.wavelength * cfg.distance)


@dataclass(frozen=True, eq=False)
class FarField:
    """Centered far-field intensity with detector coordinates per axis (meters)."""

    intensity: np.ndarray
    coordinates: Tuple[np.ndarray, ...]


def fraunhofer_intensity(e0: Signal, cfg: PropagationConfig) -> FarField:
    """|DFT(E0)|^2 placed at detector coordinates x = lambda z f."""
    if cfg.distance <= 0:
        raise ValueError("far-field pattern needs a positive distance")
    spectrum = np.fft.fftshift(np.fft.fftn(e0.values))
    coords = tuple(
        cfg.wavelength * cfg.distance * np.fft.fftshift(np.fft.fftfreq(n, d=cfg.spacing))
        for n in e0.shape
    )
    return FarField(np.abs(spectrum) ** 2, coords)


def add_poisson_noise(obs: Observation, photon_budget: float, seed: int) -> Observation:
    """Scale to `photon_budget` expected photons, draw counts, scale back."""
    if photon_budget <= 0:
        raise ValueError(f"photon budget must be positive, got {photon_budget}")
    if obs.noise.kind != NoiseKind.NONE:
        raise ValueError("observation already carries noise")
    if np.any(obs.y < 0):
        raise ValueError("cannot add Poisson noise to negative intensities")

    meta = NoiseMeta(NoiseKind.POISSON, float(photon_budget))
    total = float(obs.y.sum())
    if total == 0.0:
        return Observation(obs.y, obs.valid_mask, meta)

    scale = photon_budget / total
    counts = make_rng(seed).poisson(obs.y * scale)
    logger.debug("Drew %d photons for a budget of %.3g", int(counts.sum()), photon_budget)
    return Observation(counts / scale, obs.valid_mask, meta)


def missing_center_mask(shape: Shape, radius: int) -> np.ndarray:
    """True where the L-infinity frequency distance to DC is at most `radius`."""
    index = np.meshgrid(*signed_frequency_index(shape), indexing="ij")
    return np.max(np.abs(np.stack(index)), axis=0) <= radius


def apply_missing_center(obs: Observation, radius: int) -> Observation:
    """Flag the square of half-width `radius` around zero frequency as invalid.

    Radius 0 leaves the observation untouched.
    """
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    if obs.y.ndim not in (1, 2):
        raise ShapeMismatchError("missing center applies to 1D or 2D Fourier observations")
    if any(radius > n // 2 for n in obs.shape):
        raise ValueError(f"radius {radius} exceeds the grid half-extent of {obs.shape}")
    if radius == 0:
        return obs
    valid = obs.valid_mask & ~missing_center_mask(obs.shape, radius)
    return Observation(obs.y, valid, obs.noise)


def model_from_observation(obs: Observation) -> OversampledFourier:
    """Oversampled Fourier model whose grid matches a 1D/2D observation."""
    if obs.y.ndim not in (1, 2):
        raise ShapeMismatchError("only 1D or 2D observations map to a Fourier grid")
    return OversampledFourier(tuple(obs.shape))
