"""Reconstruction metrics and uniqueness diagnostics."""

from .metrics import (
    MetricReport,
    ensemble_average,
    evaluate_reconstruction,
    prtf,
    r_factor,
    recovery_error_E,
)
from .uniqueness import (
    CollisionResult,
    ComplementResult,
    coherence_mu,
    collision_free_check,
    complement_property_check,
    rip_delta,
)
from .fixtures import counterexample_pair, two_ortho_basis_dictionary

__all__ = [
    'MetricReport',
    'ensemble_average',
    'evaluate_reconstruction',
    'prtf',
    'r_factor',
    'recovery_error_E',
    'CollisionResult',
    'ComplementResult',
    'coherence_mu',
    'collision_free_check',
    'complement_property_check',
    'rip_delta',
    'counterexample_pair',
    'two_ortho_basis_dictionary'
]
