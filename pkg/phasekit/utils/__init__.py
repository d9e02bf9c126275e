"""Utilities module for the phasekit toolkit."""

from .constants import *
from .errors import *
from .helpers import *

__all__ = [
    'FienupVariant',
    'ModelKind',
    'NoiseKind',
    'SceneKind',
    'Algorithm',
    'PhaseKitError',
    'ShapeMismatchError',
    'GuardExceededError',
    'NumericalFailure',
    'SignalFormatError',
    'make_rng',
    'derive_seed',
    'wilson_interval',
    'pad_to_shape',
    'crop_to_shape',
    'soft_threshold'
]
