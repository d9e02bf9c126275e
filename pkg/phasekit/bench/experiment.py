"""Monte-Carlo experiment runner.

An experiment generates one scene per (sweep value, trial), measures it, and
runs every configured solver on the same observation. Trials run on a
bounded thread pool; reports are merged in (sweep value, solver, trial)
order so the summary does not depend on scheduling.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from phasekit.analytics.benchmark_analytics import BenchmarkAnalytics
from phasekit.bench.registry import TrialContext, get_solver, run_solver
from phasekit.bench.scenes import Scene, SceneSpec, generate_scene
from phasekit.core.forward import (
    GeneralLinear,
    LowPassFourier,
    MeasurementModel,
    Observation,
    OversampledFourier,
    add_poisson_noise,
    apply_missing_center,
    intensity,
)
from phasekit.core.signal import Signal, align_global_phase, align_to_reference
from phasekit.diagnostics.metrics import MetricReport, evaluate_reconstruction
from phasekit.utils.config import get_settings
from phasekit.utils.constants import (
    DEFAULT_SUCCESS_THRESHOLD,
    SPARSE_SUPPORT_TOLERANCE,
    TRIAL_COLUMNS,
    Algorithm,
    ModelKind,
    NoiseKind,
    SceneKind,
)
from phasekit.utils.helpers import derive_seed, make_rng

logger = logging.getLogger(__name__)


class ModelSpec(BaseModel):
    """Measurement model descriptor.

    Fourier grids have ceil(oversampling * n) points per axis unless `m` is
    given. General linear models draw `measurements` complex Gaussian vectors
    (6 n by default), real ones for real scenes.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ModelKind = ModelKind.OVERSAMPLED_FOURIER
    oversampling: float = Field(default=2.0, ge=1.0)
    m: Optional[int] = Field(default=None, ge=1)
    measurements: Optional[int] = Field(default=None, ge=1)
    cutoff: float = Field(default=0.25, gt=0, le=0.5)
    missing_center: int = Field(default=0, ge=0)

    @field_validator("kind")
    @classmethod
    def check_kind(cls, kind: ModelKind) -> ModelKind:
        if kind == ModelKind.MULTI_PLANE:
            raise ValueError("the benchmark harness does not simulate multi-plane measurements")
        return kind

    def build(self, truth: Signal, seed: int) -> MeasurementModel:
        if self.kind == ModelKind.GENERAL_LINEAR:
            if truth.ndim != 1:
                raise ValueError("general linear measurements need a 1D scene")
            count = self.measurements or 6 * truth.size
            rng = make_rng(seed)
            vectors = rng.standard_normal((count, truth.size))
            if np.iscomplexobj(truth.values) and np.any(np.imag(truth.values)):
                vectors = vectors + 1j * rng.standard_normal((count, truth.size))
            return GeneralLinear(vectors)
        if self.m is not None:
            grid = self.m
        else:
            grid = tuple(int(math.ceil(self.oversampling * n)) for n in truth.shape)
        if self.kind == ModelKind.LOW_PASS_FOURIER:
            return LowPassFourier(grid, self.cutoff)
        return OversampledFourier(grid)


class NoiseSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: NoiseKind = NoiseKind.NONE
    photon_budget: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def check_budget(self) -> "NoiseSpec":
        if self.kind == NoiseKind.POISSON and self.photon_budget is None:
            raise ValueError("Poisson noise needs a photon_budget")
        return self


class SolverSpec(BaseModel):
    """One solver of an experiment; `label` distinguishes two runs of the same solver."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: Algorithm
    label: Optional[str] = None
    params: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_params(self) -> "SolverSpec":
        get_solver(self.name.value).validate(self.params)
        return self

    @property
    def id(self) -> str:
        return self.label or self.name.value


class SweepSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    parameter: Literal["k", "photon_budget", "m", "n"]
    values: List[float] = Field(min_length=1)


def _scene_shape(scene: SceneSpec) -> Tuple[int, ...]:
    if scene.kind == SceneKind.PHANTOM:
        return (scene.size, scene.size)
    if scene.kind == SceneKind.CIRCLES:
        return (scene.image_size, scene.image_size)
    return (scene.n,)


def _scene_problem(scene: SceneSpec, model: ModelSpec) -> Optional[str]:
    """Why this scene cannot be generated and measured, or None."""
    if scene.kind == SceneKind.SPARSE and scene.k > scene.n:
        return f"sparsity k={scene.k} exceeds the signal length n={scene.n}"
    shape = _scene_shape(scene)
    if model.kind == ModelKind.GENERAL_LINEAR:
        return None if len(shape) == 1 else "general linear measurements need a 1D scene"
    if model.m is not None:
        grid = (model.m,) * len(shape)
    else:
        grid = tuple(int(math.ceil(model.oversampling * n)) for n in shape)
    if any(g < n for g, n in zip(grid, shape)):
        return f"measurement grid {grid} is smaller than the scene {shape}"
    if any(model.missing_center > g // 2 for g in grid):
        return f"missing_center radius {model.missing_center} exceeds the half-extent of the grid {grid}"
    return None


class ExperimentSpec(BaseModel):
    """A complete, reproducible benchmark description."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "experiment"
    scene: SceneSpec = Field(default_factory=SceneSpec)
    model: ModelSpec = Field(default_factory=ModelSpec)
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    solvers: List[SolverSpec] = Field(min_length=1)
    trials: int = Field(default=100, ge=1)
    base_seed: int = 0
    success_threshold: float = Field(default=DEFAULT_SUCCESS_THRESHOLD, gt=0)
    sweep: Optional[SweepSpec] = None

    @model_validator(mode="after")
    def check_consistency(self) -> "ExperimentSpec":
        ids = [s.id for s in self.solvers]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ValueError(f"solver labels must be unique, repeated: {', '.join(duplicates)}")
        if self.sweep is not None:
            if self.sweep.parameter == "photon_budget" and self.noise.kind != NoiseKind.POISSON:
                raise ValueError("sweeping photon_budget needs Poisson noise")
            if self.sweep.parameter == "k" and self.scene.kind != SceneKind.SPARSE:
                raise ValueError("sweeping k needs a sparse scene")
        for value in self.sweep_values():
            try:
                scene, model, _ = self.at(value)
                problem = _scene_problem(scene, model)
            except ValueError as exc:
                problem = f"invalid sweep value: {exc}"
            if problem:
                where = f" at {self.sweep.parameter}={value:g}" if value is not None else ""
                raise ValueError(f"{problem}{where}")
        return self

    def sweep_values(self) -> List[Optional[float]]:
        return list(self.sweep.values) if self.sweep else [None]

    def at(self, value: Optional[float]) -> Tuple[SceneSpec, ModelSpec, NoiseSpec]:
        """Scene, model and noise descriptors with the swept parameter set to `value`."""
        scene, model, noise = self.scene, self.model, self.noise
        if self.sweep is None or value is None:
            return scene, model, noise
        parameter = self.sweep.parameter
        if parameter == "k":
            scene = SceneSpec.model_validate({**scene.model_dump(), "k": int(value)})
        elif parameter == "n":
            key = "size" if scene.kind == SceneKind.PHANTOM else "n"
            scene = SceneSpec.model_validate({**scene.model_dump(), key: int(value)})
        elif parameter == "m":
            model = ModelSpec.model_validate({**model.model_dump(), "m": int(value)})
        else:
            noise = NoiseSpec.model_validate({**noise.model_dump(), "photon_budget": float(value)})
        return scene, model, noise


@dataclass
class TrialReport:
    solver: str
    trial: int
    seed: int
    success: bool
    aligned_residual: float
    E: float
    R_F: float
    wall_time: float
    iterations: int
    error: str = ""
    sweep_value: Optional[float] = None


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    trials: List[TrialReport]

    def trial_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([asdict(t) for t in self.trials], columns=[*TRIAL_COLUMNS, "sweep_value"])
        return _rename_sweep(frame, self.spec)

    def analytics(self) -> BenchmarkAnalytics:
        parameter = self.spec.sweep.parameter if self.spec.sweep else None
        return BenchmarkAnalytics(self.trial_frame(), parameter, [s.id for s in self.spec.solvers])


def _rename_sweep(frame: pd.DataFrame, spec: ExperimentSpec) -> pd.DataFrame:
    if spec.sweep is None:
        return frame.drop(columns=["sweep_value"])
    return frame.rename(columns={"sweep_value": spec.sweep.parameter})


def measure(scene: Scene, model_spec: ModelSpec, noise_spec: NoiseSpec, seed: int) -> Tuple[MeasurementModel, Observation]:
    model = model_spec.build(scene.truth, derive_seed(seed, "model"))
    obs = intensity(scene.truth, model)
    if noise_spec.kind == NoiseKind.POISSON:
        obs = add_poisson_noise(obs, noise_spec.photon_budget, derive_seed(seed, "noise"))
    if model_spec.missing_center:
        obs = apply_missing_center(obs, model_spec.missing_center)
    return model, obs


def _support_matches(recon: Signal, truth: Signal, fourier: bool) -> bool:
    """Support of the aligned reconstruction equals the true support."""
    if fourier:
        aligned, _, _ = align_to_reference(recon, truth)
    else:
        aligned, _, _ = align_global_phase(recon, truth)
    magnitude = aligned.magnitude()
    if magnitude.max() == 0:
        return False
    found = magnitude > SPARSE_SUPPORT_TOLERANCE * magnitude.max()
    return bool(np.array_equal(found, np.abs(truth.values) > 0))


def _score(spec: ExperimentSpec, scene: Scene, model: MeasurementModel, obs: Observation, recon: Signal) -> Tuple[bool, MetricReport]:
    fourier = not isinstance(model, GeneralLinear)
    truth = scene.truth
    if fourier and recon.shape != obs.shape:
        recon = recon.embed(obs.shape)
    report = evaluate_reconstruction(recon, obs, truth, None if fourier else model)
    residual = report.aligned_residual
    success = bool(np.isfinite(residual) and residual < spec.success_threshold)
    if success and spec.scene.kind == SceneKind.SPARSE:
        reference = truth.embed(recon.shape) if fourier else truth
        success = _support_matches(recon, reference, fourier)
    return success, report


def _failed(solver_id: str, trial: int, seed: int, elapsed: float, exc: Exception, value: Optional[float]) -> TrialReport:
    nan = float("nan")
    return TrialReport(
        solver_id, trial, seed, False, nan, nan, nan, elapsed, 0,
        error=f"{type(exc).__name__}: {exc}", sweep_value=value,
    )


def run_trial(spec: ExperimentSpec, sweep_index: int, trial: int) -> List[TrialReport]:
    """Generate, measure and solve one scene with every solver; never raises.

    A scene that cannot be generated or measured fails every solver of the trial.
    """
    value = spec.sweep_values()[sweep_index]
    scene_seed = derive_seed(spec.base_seed, "scene", sweep_index, trial)
    seeds = [derive_seed(spec.base_seed, solver.id, trial) for solver in spec.solvers]
    start = time.perf_counter()
    try:
        scene_spec, model_spec, noise_spec = spec.at(value)
        scene = generate_scene(scene_spec, scene_seed)
        model, obs = measure(scene, model_spec, noise_spec, scene_seed)
    except Exception as exc:
        logger.exception("Scene %d of sweep value %s could not be generated", trial, value)
        elapsed = time.perf_counter() - start
        return [_failed(s.id, trial, seed, elapsed, exc, value) for s, seed in zip(spec.solvers, seeds)]

    reports = []
    for solver, seed in zip(spec.solvers, seeds):
        start = time.perf_counter()
        try:
            outcome = run_solver(solver.name.value, TrialContext.from_scene(scene, obs, model, seed, solver.params))
            success, metrics = _score(spec, scene, model, obs, outcome.reconstruction)
            reports.append(TrialReport(
                solver.id, trial, seed, success, metrics.aligned_residual, metrics.E, metrics.R_F,
                time.perf_counter() - start, outcome.iterations, sweep_value=value,
            ))
        except Exception as exc:
            logger.exception("Solver %s failed on trial %d", solver.id, trial)
            reports.append(_failed(solver.id, trial, seed, time.perf_counter() - start, exc, value))
    return reports


def run_experiment(spec: ExperimentSpec, threads: Optional[int] = None) -> ExperimentResult:
    """Run every (sweep value, trial) work item on a pool of `threads` workers."""
    workers = threads or get_settings().threads
    items = [(i, t) for i in range(len(spec.sweep_values())) for t in range(spec.trials)]
    logger.info("Running %s: %d scenes x %d solvers on %d workers", spec.name, len(items), len(spec.solvers), workers)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        batches = list(pool.map(lambda item: run_trial(spec, *item), items))

    order = {s.id: i for i, s in enumerate(spec.solvers)}
    values = spec.sweep_values()
    reports = [r for batch in batches for r in batch]
    reports.sort(key=lambda r: (values.index(r.sweep_value), order[r.solver], r.trial))
    failures = sum(1 for r in reports if r.error)
    if failures:
        logger.warning("%d of %d solver runs failed", failures, len(reports))
    return ExperimentResult(spec, reports)
