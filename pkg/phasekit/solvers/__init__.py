"""Phase retrieval solvers: alternating projections, lifting and greedy sparse search."""

from .altproj import (
    AltProjConfig,
    IterateTrace,
    RealSpaceConstraint,
    er_solve,
    fienup_solve,
    fienup_step,
    gs_solve,
    hio_solve,
    io_solve,
    multiplane_solve,
    multistart,
    oo_solve,
    oss_solve,
    shrinkwrap_update,
)
from .lifted import (
    LiftedConfig,
    LiftedMatrix,
    cprl_solve,
    extract_rank1,
    lift,
    phaselift_solve,
    qcs_solve,
    spectral_initializer,
)
from .greedy import (
    Dictionary,
    GesparConfig,
    GesparResult,
    QuadraticSystem,
    damped_gauss_newton,
    fourier_system,
    gespar_solve,
    objective_and_gradient,
    omp_solve,
    sparse_fienup_solve,
)

__all__ = [
    'AltProjConfig',
    'IterateTrace',
    'RealSpaceConstraint',
    'er_solve',
    'fienup_solve',
    'fienup_step',
    'gs_solve',
    'hio_solve',
    'io_solve',
    'multiplane_solve',
    'multistart',
    'oo_solve',
    'oss_solve',
    'shrinkwrap_update',
    'LiftedConfig',
    'LiftedMatrix',
    'cprl_solve',
    'extract_rank1',
    'lift',
    'phaselift_solve',
    'qcs_solve',
    'spectral_initializer',
    'Dictionary',
    'GesparConfig',
    'GesparResult',
    'QuadraticSystem',
    'damped_gauss_newton',
    'fourier_system',
    'gespar_solve',
    'objective_and_gradient',
    'omp_solve',
    'sparse_fienup_solve'
]
