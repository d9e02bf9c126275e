"""Reconstruction quality metrics: recovery error, R-factor and PRTF."""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from phasekit.core.forward import GeneralLinear, MeasurementModel, Observation
from phasekit.core.signal import Signal, align_global_phase, align_to_reference
from phasekit.utils.constants import PRTF_MISALIGNMENT_WARNING
from phasekit.utils.errors import ShapeMismatchError

logger = logging.getLogger(__name__)

ArrayLike = Union[Signal, np.ndarray, Sequence[float]]


def _as_array(values: ArrayLike) -> np.ndarray:
    if isinstance(values, Signal):
        return values.values
    return np.asarray(values)


@dataclass
class MetricReport:
    """Scalar quality figures for one reconstruction."""

    E: float
    R_F: float
    zeta: float
    aligned_residual: float
    prtf: Optional[np.ndarray] = field(default=None, repr=False)
    extras: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """Flat JSON-ready mapping; the PRTF curve is written separately."""
        data = {k: v for k, v in asdict(self).items() if k not in ("prtf", "extras")}
        data = {k: (None if isinstance(v, float) and np.isnan(v) else float(v)) for k, v in data.items()}
        data.update(self.extras)
        return data


def recovery_error_E(z_r: ArrayLike, z_m: ArrayLike) -> float:
    """sum |z_r - z_m| / sum |z_m|. Align z_r to z_m beforehand."""
    recon, model = _as_array(z_r), _as_array(z_m)
    if recon.shape != model.shape:
        raise ShapeMismatchError(f"reconstruction {recon.shape} and model {model.shape} differ in shape")
    denominator = float(np.sum(np.abs(model)))
    if denominator == 0.0:
        raise ValueError("model signal has zero norm")
    return float(np.sum(np.abs(recon - model)) / denominator)


def weighted_median(values: np.ndarray, weights: np.ndarray) -> float:
    order = np.argsort(values, kind="stable")
    cumulative = np.cumsum(weights[order])
    index = int(np.searchsorted(cumulative, 0.5 * cumulative[-1]))
    return float(values[order][min(index, values.size - 1)])


def r_factor(measured_mag: ArrayLike, recon_mag: ArrayLike) -> Tuple[float, float]:
    """R_F = sum ||Z_e| - zeta |Z_r|| / sum |Z_e| with the L1-optimal scale zeta.

    zeta is the weighted median of |Z_e| / |Z_r| with weights |Z_r|.
    """
    measured = np.abs(_as_array(measured_mag)).ravel()
    recon = np.abs(_as_array(recon_mag)).ravel()
    if measured.shape != recon.shape:
        raise ShapeMismatchError(f"magnitude arrays differ in length: {measured.size} vs {recon.size}")
    total = float(measured.sum())
    if total == 0.0:
        raise ValueError("measured magnitude sums to zero")

    nonzero = recon > 0
    zeta = weighted_median(measured[nonzero] / recon[nonzero], recon[nonzero]) if nonzero.any() else 1.0
    return float(np.sum(np.abs(measured - zeta * recon)) / total), zeta


def prtf(
    ensemble: Sequence[Signal],
    measured_mag: np.ndarray,
    check_alignment: bool = True,
) -> np.ndarray:
    """|mean_i Z_i[k]| / |X[k]|, zero where nothing was measured, clipped to 1.

    The ensemble must already be aligned to its first member.
    """
    if len(ensemble) < 2:
        raise ValueError("PRTF needs at least two reconstructions")
    measured = np.abs(np.asarray(measured_mag, dtype=np.float64))
    grid = measured.shape

    if check_alignment:
        reference = ensemble[0]
        worst = max(align_to_reference(z, reference)[2] for z in ensemble[1:]) if reference.norm() > 0 else 0.0
        if worst > PRTF_MISALIGNMENT_WARNING:
            logger.warning(
                "PRTF ensemble members differ by aligned residual up to %.2f; average may be meaningless",
                worst,
            )

    spectra = [np.fft.fftn(z.values, s=grid) for z in ensemble]
    average = np.abs(np.mean(spectra, axis=0))
    ratio = np.divide(average, measured, out=np.zeros_like(measured), where=measured > 0)
    return np.minimum(ratio, 1.0)


def ensemble_average(recons: Sequence[Signal], reference: Signal) -> Signal:
    """Align every reconstruction to `reference` and average them."""
    if not recons:
        raise ValueError("ensemble is empty")
    aligned = [align_to_reference(z, reference)[0].values for z in recons]
    return Signal(np.mean(aligned, axis=0))


def _common_grid(a: Signal, b: Signal) -> Tuple[int, ...]:
    if a.ndim != b.ndim:
        raise ShapeMismatchError(f"cannot compare a {a.ndim}D and a {b.ndim}D signal")
    return tuple(max(m, n) for m, n in zip(a.shape, b.shape))


def evaluate_reconstruction(
    recon: Signal,
    obs: Observation,
    truth: Optional[Signal] = None,
    model: Optional[MeasurementModel] = None,
) -> MetricReport:
    """Aligned residual, recovery error E and R-factor for one reconstruction.

    Without a model the observation grid is taken as an oversampled Fourier
    grid. General linear measurements only admit a global phase ambiguity.
    """
    if model is None:
        recon_mag = np.abs(np.fft.fftn(recon.values, s=obs.shape))
    else:
        recon_mag = np.abs(model.amplitudes(recon)).reshape(obs.shape)
    valid = obs.valid_mask
    rf, zeta = r_factor(obs.magnitude()[valid], recon_mag[valid])

    residual, error = float("nan"), float("nan")
    if truth is not None and truth.norm() > 0:
        grid = _common_grid(recon, truth)
        reference = truth.embed(grid)
        candidate = recon.embed(grid)
        if isinstance(model, GeneralLinear):
            aligned, _, residual = align_global_phase(candidate, reference)
        else:
            aligned, _, residual = align_to_reference(candidate, reference)
        error = recovery_error_E(aligned, reference)
    return MetricReport(E=error, R_F=rf, zeta=zeta, aligned_residual=residual)
