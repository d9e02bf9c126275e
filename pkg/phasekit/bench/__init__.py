"""Benchmark harness: scene generators, solver registry and experiment runner."""

from .scenes import (
    Scene,
    SceneSpec,
    circle_dictionary,
    gen_circle_image,
    gen_gaussian_vector,
    gen_phantom,
    gen_sparse_vector,
    generate_scene,
)
from .registry import SOLVERS, SolverOutcome, TrialContext, get_solver, run_solver
from .experiment import (
    ExperimentResult,
    ExperimentSpec,
    ModelSpec,
    NoiseSpec,
    SolverSpec,
    SweepSpec,
    TrialReport,
    run_experiment,
    run_trial,
)

__all__ = [
    'Scene',
    'SceneSpec',
    'circle_dictionary',
    'gen_circle_image',
    'gen_gaussian_vector',
    'gen_phantom',
    'gen_sparse_vector',
    'generate_scene',
    'SOLVERS',
    'SolverOutcome',
    'TrialContext',
    'get_solver',
    'run_solver',
    'ExperimentResult',
    'ExperimentSpec',
    'ModelSpec',
    'NoiseSpec',
    'SolverSpec',
    'SweepSpec',
    'TrialReport',
    'run_experiment',
    'run_trial'
]
