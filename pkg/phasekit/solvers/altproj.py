"""Alternating-projection solvers for oversampled Fourier magnitudes.

All solvers work on the measurement grid: the observation's shape is the
M-point grid and reconstructions are returned on that grid. A support mask
(or known magnitude) on a smaller grid is zero-padded at the high end.
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy import ndimage

from phasekit.core.forward import MultiPlane, Observation, angular_spectrum
from phasekit.core.signal import Signal, SupportMask
from phasekit.diagnostics.metrics import r_factor
from phasekit.utils.constants import (
    DEFAULT_BETA,
    DEFAULT_OSS_STAGES,
    DEFAULT_SHRINKWRAP_SIGMA,
    DEFAULT_SHRINKWRAP_THRESHOLD,
    FienupVariant,
)
from phasekit.utils.errors import NumericalFailure, ShapeMismatchError
from phasekit.utils.helpers import make_rng, pad_to_shape, signed_frequency_index

logger = logging.getLogger(__name__)


class AltProjConfig(BaseModel):
    """Settings shared by the alternating-projection solvers."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    beta: float = Field(default=DEFAULT_BETA, gt=0, le=1)
    max_iters: int = Field(default=500, ge=1)
    epsilon: float = Field(default=1e-12, ge=0)
    seed: int = 0
    oss_stages: int = Field(default=DEFAULT_OSS_STAGES, ge=1)
    # Gaussian filter widths in frequency samples; None means 2M and M/10.
    # An infinite width disables the filter.
    oss_alpha_start: Optional[float] = Field(default=None, gt=0)
    oss_alpha_end: Optional[float] = Field(default=None, gt=0)
    shrinkwrap_interval: int = Field(default=0, ge=0)
    shrinkwrap_sigma: float = Field(default=DEFAULT_SHRINKWRAP_SIGMA, gt=0)
    shrinkwrap_threshold: float = Field(default=DEFAULT_SHRINKWRAP_THRESHOLD, gt=0, lt=1)
    # Error-reduction iterations appended to an unconverged HIO run.
    er_polish_iters: int = Field(default=200, ge=0)


@dataclass(frozen=True, eq=False)
class RealSpaceConstraint:
    """Object-domain prior: support, realness, nonnegativity or a known magnitude.

    Nonnegativity implies realness.
    """

    support: Optional[SupportMask] = None
    nonnegative: bool = False
    real_valued: bool = False
    known_magnitude: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.nonnegative and not self.real_valued:
            object.__setattr__(self, "real_valued", True)
        if self.known_magnitude is not None:
            magnitude = np.array(self.known_magnitude, dtype=np.float64, copy=True)
            if np.any(magnitude < 0):
                raise ValueError("known magnitude must be nonnegative")
            if self.support is not None and magnitude.shape != self.support.shape:
                raise ShapeMismatchError("known magnitude and support shapes differ")
            magnitude.setflags(write=False)
            object.__setattr__(self, "known_magnitude", magnitude)
        if not self.active():
            raise ValueError("real-space constraint has no active terms")

    def active(self) -> bool:
        return (
            self.support is not None
            or self.nonnegative
            or self.real_valued
            or self.known_magnitude is not None
        )

    def on_grid(self, grid: Tuple[int, ...]) -> "RealSpaceConstraint":
        """Embed support and known magnitude on the measurement grid."""
        if self.support is not None and len(self.support.shape) != len(grid):
            raise ShapeMismatchError(f"support {self.support.shape} does not match grid {grid}")
        try:
            support = self.support.embed(grid) if self.support is not None else None
            magnitude = (
                pad_to_shape(self.known_magnitude, grid)
                if self.known_magnitude is not None
                else None
            )
        except ValueError as exc:
            raise ShapeMismatchError(str(exc)) from exc
        return replace(self, support=support, known_magnitude=magnitude)

    def with_support(self, support: SupportMask) -> "RealSpaceConstraint":
        return replace(self, support=support)

    def violations(self, z_prime: np.ndarray) -> np.ndarray:
        """Samples of z' breaking the constraint (the set gamma)."""
        gamma = np.zeros(z_prime.shape, dtype=bool)
        if self.support is not None:
            gamma |= ~self.support.mask & (np.abs(z_prime) > 0)
        if self.nonnegative:
            gamma |= np.real(z_prime) < 0
        return gamma

    def project(self, z: np.ndarray) -> np.ndarray:
        """Nearest point satisfying the constraint."""
        if self.known_magnitude is not None:
            z = self.known_magnitude * _unit_phase(z)
        if self.real_valued:
            z = np.real(z).astype(np.complex128)
        if self.nonnegative:
            z = np.where(np.real(z) < 0, 0, z)
        if self.support is not None:
            z = np.where(self.support.mask, z, 0)
        return z


@dataclass
class IterateTrace:
    """Per-iteration measured-domain error and the final reconstruction."""

    errors: List[float]
    reconstruction: Signal
    iterations: int
    converged: bool
    algorithm: str = ""
    support: Optional[SupportMask] = None
    best_iteration: Optional[int] = None

    @property
    def final_error(self) -> float:
        return self.errors[-1] if self.errors else float("nan")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"iter": np.arange(1, len(self.errors) + 1), "E": self.errors})


def _unit_phase(values: np.ndarray) -> np.ndarray:
    modulus = np.abs(values)
    return np.where(modulus > 0, values / np.where(modulus > 0, modulus, 1.0), 1.0)


def _measured(obs: Observation) -> Tuple[np.ndarray, np.ndarray]:
    magnitude = obs.magnitude()
    if not np.any(magnitude[obs.valid_mask] > 0):
        raise ValueError("measured magnitude is zero everywhere")
    return magnitude, obs.valid_mask


def magnitude_error(spectrum: np.ndarray, magnitude: np.ndarray, valid: np.ndarray) -> float:
    """sum over valid k of (|Z[k]| - |X[k]|)^2."""
    return float(np.sum((np.abs(spectrum[valid]) - magnitude[valid]) ** 2))


def project_magnitude(spectrum: np.ndarray, magnitude: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Keep the phase, impose the measured magnitude; invalid entries are left free."""
    return np.where(valid, magnitude * _unit_phase(spectrum), spectrum)


def fienup_step(
    z: np.ndarray,
    z_prime: np.ndarray,
    constraint: RealSpaceConstraint,
    variant: FienupVariant,
    beta: float,
) -> np.ndarray:
    """One real-space correction of the ER / HIO / IO / OO family.

    With gamma the violation set of z':
      ER   z' off gamma, 0 on gamma
      HIO  z' off gamma, z - beta z' on gamma
      IO   z  off gamma, z - beta z' on gamma
      OO   z' off gamma, z' - beta z' on gamma
    """
    variant = FienupVariant(variant)
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    if constraint.real_valued:
        z_prime = np.real(z_prime).astype(np.complex128)
    gamma = constraint.violations(z_prime)

    if variant == FienupVariant.ER:
        return np.where(gamma, 0, z_prime)
    if variant == FienupVariant.HIO:
        return np.where(gamma, z - beta * z_prime, z_prime)
    if variant == FienupVariant.IO:
        return np.where(gamma, z - beta * z_prime, z)
    return np.where(gamma, z_prime - beta * z_prime, z_prime)


def _check_finite(values: np.ndarray, iteration: int) -> None:
    if not np.all(np.isfinite(values)):
        raise NumericalFailure(f"non-finite iterate at iteration {iteration}")


def _random_start(obs: Observation, constraint: RealSpaceConstraint, seed: int) -> np.ndarray:
    magnitude = obs.magnitude()
    phase = make_rng(seed).uniform(0.0, 2 * np.pi, size=magnitude.shape)
    return constraint.project(np.fft.ifftn(magnitude * np.exp(1j * phase)))


def _start(
    obs: Observation,
    constraint: RealSpaceConstraint,
    cfg: AltProjConfig,
    initial: Optional[Signal],
) -> np.ndarray:
    if initial is None:
        return _random_start(obs, constraint, cfg.seed)
    if initial.ndim != obs.y.ndim:
        raise ShapeMismatchError("initial estimate does not match the observation grid")
    return pad_to_shape(initial.values, obs.shape)


def gs_solve(
    obs: Observation,
    known_magnitude: Signal,
    cfg: AltProjConfig,
    initial: Optional[Signal] = None,
) -> IterateTrace:
    """Gerchberg-Saxton: impose the measured magnitude in both domains.

    Starts from |x| exp(i phi) with phi uniform random, or with the phase of
    `initial` when given. The measured-domain error is nonincreasing.
    """
    magnitude, valid = _measured(obs)
    if known_magnitude.ndim != obs.y.ndim or any(
        n > m for n, m in zip(known_magnitude.shape, obs.shape)
    ):
        raise ShapeMismatchError(
            f"known magnitude {known_magnitude.shape} does not fit grid {obs.shape}"
        )
    if np.any(np.abs(np.imag(known_magnitude.values)) > 0) or np.any(np.real(known_magnitude.values) < 0):
        raise ValueError("known magnitude must be real and nonnegative")

    constraint = RealSpaceConstraint(known_magnitude=np.real(known_magnitude.values)).on_grid(obs.shape)
    if initial is None:
        phase = make_rng(cfg.seed).uniform(0.0, 2 * np.pi, size=obs.shape)
        z = constraint.known_magnitude * np.exp(1j * phase)
    else:
        z = constraint.project(_start(obs, constraint, cfg, initial))

    errors: List[float] = []
    converged = False
    for i in range(cfg.max_iters):
        spectrum = np.fft.fftn(z)
        errors.append(magnitude_error(spectrum, magnitude, valid))
        if errors[-1] <= cfg.epsilon:
            converged = True
            break
        z = constraint.project(np.fft.ifftn(project_magnitude(spectrum, magnitude, valid)))
        _check_finite(z, i)

    logger.debug("GS stopped after %d iterations, E=%.3e", len(errors), errors[-1])
    return IterateTrace(errors, Signal(z), len(errors), converged, algorithm="gs")


def shrinkwrap_update(current: Signal, smoothing_width: float, threshold_frac: float) -> SupportMask:
    """Support = samples where the Gaussian-smoothed modulus reaches `threshold_frac` of its max."""
    if not 0.0 < threshold_frac < 1.0:
        raise ValueError(f"threshold fraction must be in (0, 1), got {threshold_frac}")
    modulus = current.magnitude()
    if not np.any(modulus > 0):
        raise ValueError("cannot derive a support from an all-zero estimate")
    smoothed = ndimage.gaussian_filter(modulus, sigma=smoothing_width, mode="wrap")
    mask = smoothed >= threshold_frac * smoothed.max()
    mask[np.unravel_index(int(np.argmax(smoothed)), smoothed.shape)] = True
    return SupportMask(mask)


def oss_filter(grid: Tuple[int, ...], alpha: float) -> Optional[np.ndarray]:
    """W[k] = exp(-|k|^2 / (2 alpha^2)) on signed integer frequencies; None when alpha is infinite."""
    if np.isinf(alpha):
        return None
    index = np.meshgrid(*signed_frequency_index(grid), indexing="ij")
    k2 = sum(k.astype(np.float64) ** 2 for k in index)
    return np.exp(-k2 / (2.0 * alpha * alpha))


def oss_schedule(cfg: AltProjConfig, grid: Tuple[int, ...]) -> np.ndarray:
    """Filter width per stage, decreasing linearly from start to end."""
    m = max(grid)
    start = cfg.oss_alpha_start if cfg.oss_alpha_start is not None else 2.0 * m
    end = cfg.oss_alpha_end if cfg.oss_alpha_end is not None else m / 10.0
    if np.isinf(start) or np.isinf(end):
        return np.full(cfg.oss_stages, np.inf)
    return np.linspace(start, end, cfg.oss_stages)


def fienup_solve(
    obs: Observation,
    constraint: RealSpaceConstraint,
    cfg: AltProjConfig,
    variant: FienupVariant = FienupVariant.HIO,
    initial: Optional[Signal] = None,
    smoothing: bool = False,
    polish_iters: int = 0,
) -> IterateTrace:
    """Shared engine for ER, HIO, IO, OO and (with `smoothing`) OSS.

    The returned reconstruction is the constraint projection of the
    magnitude-corrected image of the last iterate; with smoothing the iterate
    of lowest error is used instead. When the main loop has not converged,
    `polish_iters` error-reduction steps continue from that iterate and their
    errors are appended to the trace.
    """
    variant = FienupVariant(variant)
    magnitude, valid = _measured(obs)
    constraint = constraint.on_grid(obs.shape)
    if smoothing and constraint.support is None:
        raise ValueError("oversampling smoothness needs a support constraint")

    z = _start(obs, constraint, cfg, initial)
    schedule = oss_schedule(cfg, obs.shape) if smoothing else None
    filters = {}

    errors: List[float] = []
    converged = False
    best_error, best_z, best_iteration = np.inf, z, 0
    for i in range(cfg.max_iters):
        spectrum = np.fft.fftn(z)
        error = magnitude_error(spectrum, magnitude, valid)
        errors.append(error)
        if error < best_error:
            best_error, best_z, best_iteration = error, z, i + 1
        if error <= cfg.epsilon:
            converged = True
            break

        z_prime = np.fft.ifftn(project_magnitude(spectrum, magnitude, valid))
        z_next = fienup_step(z, z_prime, constraint, variant, cfg.beta)

        if smoothing:
            stage = min(i * cfg.oss_stages // cfg.max_iters, cfg.oss_stages - 1)
            if stage not in filters:
                filters[stage] = oss_filter(obs.shape, schedule[stage])
            w = filters[stage]
            if w is not None:
                smoothed = np.fft.ifftn(np.fft.fftn(z_next) * w)
                z_next = np.where(constraint.support.mask, z_next, smoothed)

        if cfg.shrinkwrap_interval and (i + 1) % cfg.shrinkwrap_interval == 0:
            estimate = Signal(constraint.project(z_prime))
            if np.any(estimate.magnitude() > 0):
                constraint = constraint.with_support(
                    shrinkwrap_update(estimate, cfg.shrinkwrap_sigma, cfg.shrinkwrap_threshold)
                )

        _check_finite(z_next, i)
        z = z_next

    final = best_z if smoothing else z
    for _ in range(0 if converged else polish_iters):
        spectrum = np.fft.fftn(final)
        errors.append(magnitude_error(spectrum, magnitude, valid))
        if errors[-1] <= cfg.epsilon:
            converged = True
            break
        z_prime = np.fft.ifftn(project_magnitude(spectrum, magnitude, valid))
        final = fienup_step(final, z_prime, constraint, FienupVariant.ER, cfg.beta)
        _check_finite(final, len(errors))

    output = constraint.project(np.fft.ifftn(project_magnitude(np.fft.fftn(final), magnitude, valid)))
    name = "oss" if smoothing else variant.value
    if not converged:
        logger.warning("%s reached %d iterations without E <= %.1e (E=%.3e)", name, len(errors), cfg.epsilon, errors[-1])
    return IterateTrace(
        errors,
        Signal(output),
        len(errors),
        converged,
        algorithm=name,
        support=constraint.support,
        best_iteration=best_iteration if smoothing else None,
    )


def er_solve(obs, constraint, cfg, initial=None) -> IterateTrace:
    """Error reduction."""
    return fienup_solve(obs, constraint, cfg, FienupVariant.ER, initial)


def hio_solve(obs, constraint, cfg, initial=None) -> IterateTrace:
    """Hybrid input-output, finished with `cfg.er_polish_iters` error-reduction steps."""
    return fienup_solve(obs, constraint, cfg, FienupVariant.HIO, initial, polish_iters=cfg.er_polish_iters)


def io_solve(obs, constraint, cfg, initial=None) -> IterateTrace:
    return fienup_solve(obs, constraint, cfg, FienupVariant.IO, initial)


def oo_solve(obs, constraint, cfg, initial=None) -> IterateTrace:
    return fienup_solve(obs, constraint, cfg, FienupVariant.OO, initial)


def oss_solve(obs, constraint, cfg, initial=None) -> IterateTrace:
    """HIO with off-support Gaussian spectral smoothing that tightens by stage."""
    return fienup_solve(obs, constraint, cfg, FienupVariant.HIO, initial, smoothing=True)


def multistart(
    solve_fn: Callable[..., IterateTrace],
    obs: Observation,
    constraint: RealSpaceConstraint,
    cfg: AltProjConfig,
    runs: int,
) -> Tuple[IterateTrace, List[float]]:
    """Run with seeds cfg.seed .. cfg.seed + runs - 1 and keep the lowest R-factor."""
    if runs < 1:
        raise ValueError("runs must be at least 1")
    magnitude = obs.magnitude()
    valid = obs.valid_mask
    best, scores = None, []
    for r in range(runs):
        trace = solve_fn(obs, constraint, cfg.model_copy(update={"seed": cfg.seed + r}))
        recon_mag = np.abs(np.fft.fftn(trace.reconstruction.values))
        score, _ = r_factor(magnitude[valid], recon_mag[valid])
        scores.append(score)
        if best is None or score < scores[best[0]]:
            best = (r, trace)
    logger.debug("Multistart kept run %d of %d (R_F=%.4f)", best[0], runs, scores[best[0]])
    return best[1], scores


def multiplane_solve(
    obs: Observation,
    model: MultiPlane,
    cfg: AltProjConfig,
    initial: Optional[Signal] = None,
) -> IterateTrace:
    """Recover the object-plane field from intensities at several planes.

    Each sweep visits the planes in order: propagate the object estimate,
    replace the magnitude, propagate back. The lowest-error estimate is kept.
    """
    planes = len(model.distances)
    if obs.y.ndim < 2 or obs.shape[0] != planes:
        raise ShapeMismatchError(f"expected {planes} stacked plane intensities, got shape {obs.shape}")
    magnitude = obs.magnitude()
    valid = obs.valid_mask
    grid = obs.shape[1:]
    wavelengths = model.plane_wavelengths()

    if initial is None:
        phase = make_rng(cfg.seed).uniform(0.0, 2 * np.pi, size=grid)
        e = angular_spectrum(magnitude[0] * np.exp(1j * phase), -model.distances[0], wavelengths[0], model.spacing)
    else:
        if initial.shape != grid:
            raise ShapeMismatchError("initial estimate does not match the plane grid")
        e = np.array(initial.values)

    def sweep_error(field_estimate: np.ndarray) -> float:
        return sum(
            magnitude_error(
                angular_spectrum(field_estimate, z, lam, model.spacing), magnitude[p], valid[p]
            )
            for p, (z, lam) in enumerate(zip(model.distances, wavelengths))
        )

    errors: List[float] = []
    converged = False
    best_error, best_e = np.inf, e
    for i in range(cfg.max_iters):
        error = sweep_error(e)
        errors.append(error)
        if error < best_error:
            best_error, best_e = error, e
        if error <= cfg.epsilon:
            converged = True
            break
        for p, (z, lam) in enumerate(zip(model.distances, wavelengths)):
            plane = angular_spectrum(e, z, lam, model.spacing)
            plane = project_magnitude(plane, magnitude[p], valid[p])
            e = angular_spectrum(plane, -z, lam, model.spacing)
        _check_finite(e, i)

    return IterateTrace(errors, Signal(best_e), len(errors), converged, algorithm="multiplane")
