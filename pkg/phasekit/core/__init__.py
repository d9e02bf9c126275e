"""Signal containers and forward measurement models."""

from .signal import (
    AmbiguityTransform,
    Signal,
    SupportMask,
    align_to_reference,
    apply_ambiguity,
)
from .forward import (
    GeneralLinear,
    LowPassFourier,
    MeasurementModel,
    MultiPlane,
    NoiseMeta,
    Observation,
    OversampledFourier,
    PropagationConfig,
    add_poisson_noise,
    apply_missing_center,
    autocorrelation,
    fourier_measurement_vectors,
    fraunhofer_intensity,
    fresnel_number,
    intensity,
    oversampled_dft,
    power_spectrum_from_autocorrelation,
    propagate,
)

__all__ = [
    'AmbiguityTransform',
    'Signal',
    'SupportMask',
    'align_to_reference',
    'apply_ambiguity',
    'GeneralLinear',
    'LowPassFourier',
    'MeasurementModel',
    'MultiPlane',
    'NoiseMeta',
    'Observation',
    'OversampledFourier',
    'PropagationConfig',
    'add_poisson_noise',
    'apply_missing_center',
    'autocorrelation',
    'fourier_measurement_vectors',
    'fraunhofer_intensity',
    'fresnel_number',
    'intensity',
    'oversampled_dft',
    'power_spectrum_from_autocorrelation',
    'propagate'
]
