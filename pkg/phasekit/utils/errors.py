"""Exception types raised by the toolkit."""


class PhaseKitError(Exception):
    """Base class for toolkit errors."""


class ShapeMismatchError(PhaseKitError, ValueError):
    """Arrays or models with incompatible shapes were combined."""


class GuardExceededError(PhaseKitError, ValueError):
    """An exhaustive diagnostic was asked to enumerate beyond its desk-scale guard."""


class NumericalFailure(PhaseKitError, RuntimeError):
    """A solver produced a non-finite iterate or a decomposition failed."""


class SignalFormatError(PhaseKitError, ValueError):
    """A signal, observation or dictionary file could not be decoded."""
