"""Solver registry: maps solver identifiers to runners with validated parameters."""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, Mapping, Optional, Type

import numpy as np
from pydantic import BaseModel

from phasekit.bench.scenes import Scene
from phasekit.core.forward import (
    GeneralLinear,
    LowPassFourier,
    MeasurementModel,
    Observation,
    OversampledFourier,
    fourier_measurement_vectors,
)
from phasekit.core.signal import Signal, SupportMask
from phasekit.solvers.altproj import (
    AltProjConfig,
    IterateTrace,
    RealSpaceConstraint,
    fienup_solve,
    gs_solve,
    multistart,
)
from phasekit.solvers.greedy import (
    Dictionary,
    GesparConfig,
    QuadraticSystem,
    fourier_system,
    gespar_solve,
    sparse_fienup_solve,
)
from phasekit.solvers.lifted import LiftedConfig, cprl_solve, extract_rank1, phaselift_solve, qcs_solve
from phasekit.utils.constants import Algorithm, FienupVariant

logger = logging.getLogger(__name__)


@dataclass
class TrialContext:
    """Everything a runner may use for one solve.

    Only `obs`, `model` and `seed` are always present. The harness fills the
    rest from the scene; the `solve` command from the files it was given.
    """

    obs: Observation
    model: MeasurementModel
    seed: int
    params: Mapping[str, Any] = field(default_factory=dict)
    support: Optional[SupportMask] = None
    n: Optional[int] = None
    sparsity: Optional[int] = None
    magnitude: Optional[np.ndarray] = None
    dictionary: Optional[Dictionary] = None
    truth: Optional[Signal] = None

    @classmethod
    def from_scene(
        cls, scene: Scene, obs: Observation, model: MeasurementModel, seed: int, params: Mapping[str, Any]
    ) -> "TrialContext":
        return cls(
            obs, model, seed, params,
            support=scene.support,
            n=scene.truth.size,
            sparsity=scene.sparsity,
            magnitude=scene.truth.magnitude(),
            dictionary=scene.dictionary,
            truth=scene.truth,
        )

    def signal_length(self) -> int:
        if self.n is not None:
            return self.n
        if self.support is not None:
            return int(np.prod(self.support.shape))
        raise ValueError("the signal length is unknown; give n or a support")


@dataclass
class SolverOutcome:
    reconstruction: Signal
    iterations: int
    trace: Optional[IterateTrace] = None


@dataclass(frozen=True)
class SolverEntry:
    """A runner, the config model its parameters feed and its extra options."""

    name: Algorithm
    runner: Callable[[TrialContext, "SolverEntry"], SolverOutcome]
    config: Optional[Type[BaseModel]] = None
    options: FrozenSet[str] = frozenset()
    # Fields a config needs that the harness fills in when absent.
    placeholders: Mapping[str, Any] = field(default_factory=dict)

    def validate(self, params: Mapping[str, Any]) -> None:
        """Reject unknown keys and out-of-range config values."""
        known = set(self.options) | (set(self.config.model_fields) if self.config else set())
        unknown = sorted(set(params) - known)
        if unknown:
            raise ValueError(f"unknown parameter(s) for solver '{self.name.value}': {', '.join(unknown)}")
        if self.config is not None:
            self.build_config(params, seed=0, defaults=self.placeholders)

    def build_config(self, params: Mapping[str, Any], seed: int, defaults: Optional[Mapping[str, Any]] = None) -> BaseModel:
        values = dict(defaults or {})
        values.update({k: v for k, v in params.items() if k in self.config.model_fields})
        values["seed"] = seed
        return self.config(**values)


def _is_fourier(model: MeasurementModel) -> bool:
    return isinstance(model, (OversampledFourier, LowPassFourier))


def _require_fourier(ctx: TrialContext, solver: str) -> None:
    if not _is_fourier(ctx.model):
        raise ValueError(f"{solver} needs Fourier magnitude measurements")


def _constraint(ctx: TrialContext, solver: str) -> RealSpaceConstraint:
    nonnegative = bool(ctx.params.get("nonnegative", False))
    real_valued = bool(ctx.params.get("real_valued", False))
    support = ctx.support
    if support is not None:
        support = support.dilate(int(ctx.params.get("support_dilation", 0)))
    elif not (nonnegative or real_valued):
        raise ValueError(f"{solver} needs a support, nonnegative or real_valued constraint")
    return RealSpaceConstraint(support=support, nonnegative=nonnegative, real_valued=real_valued)


def _run_fienup(variant: FienupVariant, smoothing: bool) -> Callable[[TrialContext, SolverEntry], SolverOutcome]:
    def runner(ctx: TrialContext, entry: SolverEntry) -> SolverOutcome:
        _require_fourier(ctx, entry.name.value)
        cfg = entry.build_config(ctx.params, ctx.seed)

        def solve(obs, constraint, run_cfg):
            polish = run_cfg.er_polish_iters if variant == FienupVariant.HIO and not smoothing else 0
            return fienup_solve(obs, constraint, run_cfg, variant, smoothing=smoothing, polish_iters=polish)

        restarts = int(ctx.params.get("restarts", 1))
        constraint = _constraint(ctx, entry.name.value)
        if restarts > 1:
            trace, _ = multistart(solve, ctx.obs, constraint, cfg, restarts)
        else:
            trace = solve(ctx.obs, constraint, cfg)
        return SolverOutcome(trace.reconstruction, trace.iterations, trace)

    return runner


def _run_gs(ctx: TrialContext, entry: SolverEntry) -> SolverOutcome:
    _require_fourier(ctx, "gs")
    if ctx.magnitude is None:
        raise ValueError("gs needs the object-domain magnitude")
    cfg = entry.build_config(ctx.params, ctx.seed)
    trace = gs_solve(ctx.obs, Signal(ctx.magnitude), cfg)
    return SolverOutcome(trace.reconstruction, trace.iterations, trace)


def _general_linear(ctx: TrialContext) -> GeneralLinear:
    if isinstance(ctx.model, GeneralLinear):
        return ctx.model
    if isinstance(ctx.model, OversampledFourier) and ctx.obs.y.ndim == 1:
        return fourier_measurement_vectors(ctx.signal_length(), ctx.obs.y.size)
    raise ValueError("lifted and greedy solvers need general linear or 1D Fourier measurements")


def _run_lifted(solve: Callable) -> Callable[[TrialContext, SolverEntry], SolverOutcome]:
    def runner(ctx: TrialContext, entry: SolverEntry) -> SolverOutcome:
        model = _general_linear(ctx)
        defaults = {}
        if entry.name == Algorithm.QCS and "eta" not in ctx.params:
            if ctx.truth is None:
                raise ValueError("qcs needs eta when the true signal is unknown")
            # Row-norm sum of x x^H is |x|_1 |x|_2.
            x = ctx.truth.values
            row_norms = float(np.sum(np.abs(x)) * np.linalg.norm(x))
            defaults["eta"] = float(ctx.params.get("eta_factor", 1.5)) * max(row_norms, 1e-12)
        cfg = entry.build_config(ctx.params, ctx.seed, defaults)
        lifted = solve(ctx.obs, model, cfg)
        return SolverOutcome(extract_rank1(lifted), lifted.iterations)

    return runner


def _sparsity(ctx: TrialContext) -> int:
    value = ctx.params.get("sparsity", ctx.sparsity)
    if value is None:
        raise ValueError("sparse solvers need a sparsity parameter")
    return max(int(value), 1)


def _run_gespar(ctx: TrialContext, entry: SolverEntry) -> SolverOutcome:
    real_valued = bool(ctx.params.get("real_valued", True))
    if isinstance(ctx.model, OversampledFourier) and ctx.obs.y.ndim == 1 and real_valued:
        n = ctx.signal_length()
        system = fourier_system(ctx.obs, n)
    else:
        model = _general_linear(ctx)
        n = model.length
        system = QuadraticSystem.from_model(ctx.obs, model, real_valued=real_valued)
    cfg = entry.build_config(ctx.params, ctx.seed, {"sparsity": _sparsity(ctx)})
    result = gespar_solve(system, cfg)
    x = result.x.values
    if not real_valued:
        x = x[:n] + 1j * x[n:]
    return SolverOutcome(Signal(x), result.swaps)


def _run_sparse_fienup(ctx: TrialContext, entry: SolverEntry) -> SolverOutcome:
    if not isinstance(ctx.model, OversampledFourier) or ctx.obs.y.ndim != 1:
        raise ValueError("sparse Fienup needs 1D Fourier magnitude measurements")
    cfg = entry.build_config(ctx.params, ctx.seed)
    dictionary = ctx.dictionary or Dictionary.identity(ctx.signal_length())
    trace = sparse_fienup_solve(
        ctx.obs,
        dictionary,
        _sparsity(ctx),
        cfg,
        real_valued=bool(ctx.params.get("real_valued", False)),
        restarts=int(ctx.params.get("restarts", 1)),
    )
    return SolverOutcome(trace.reconstruction, trace.iterations, trace)


def _run_truth(ctx: TrialContext, entry: SolverEntry) -> SolverOutcome:
    """Passthrough used to check the harness itself."""
    if ctx.truth is None:
        raise ValueError("the truth passthrough needs a known signal")
    return SolverOutcome(ctx.truth, 0)


_FIENUP_OPTIONS = frozenset({"support_dilation", "nonnegative", "real_valued", "restarts"})

SOLVERS: Dict[Algorithm, SolverEntry] = {
    Algorithm.GS: SolverEntry(Algorithm.GS, _run_gs, AltProjConfig),
    Algorithm.ER: SolverEntry(Algorithm.ER, _run_fienup(FienupVariant.ER, False), AltProjConfig, _FIENUP_OPTIONS),
    Algorithm.HIO: SolverEntry(Algorithm.HIO, _run_fienup(FienupVariant.HIO, False), AltProjConfig, _FIENUP_OPTIONS),
    Algorithm.IO: SolverEntry(Algorithm.IO, _run_fienup(FienupVariant.IO, False), AltProjConfig, _FIENUP_OPTIONS),
    Algorithm.OO: SolverEntry(Algorithm.OO, _run_fienup(FienupVariant.OO, False), AltProjConfig, _FIENUP_OPTIONS),
    Algorithm.OSS: SolverEntry(Algorithm.OSS, _run_fienup(FienupVariant.HIO, True), AltProjConfig, _FIENUP_OPTIONS),
    Algorithm.PHASELIFT: SolverEntry(Algorithm.PHASELIFT, _run_lifted(phaselift_solve), LiftedConfig),
    Algorithm.CPRL: SolverEntry(Algorithm.CPRL, _run_lifted(cprl_solve), LiftedConfig),
    Algorithm.QCS: SolverEntry(
        Algorithm.QCS, _run_lifted(qcs_solve), LiftedConfig, frozenset({"eta_factor"}), {"eta": 1.0}
    ),
    Algorithm.GESPAR: SolverEntry(
        Algorithm.GESPAR, _run_gespar, GesparConfig, frozenset({"real_valued"}), {"sparsity": 1}
    ),
    Algorithm.SPARSE_FIENUP: SolverEntry(
        Algorithm.SPARSE_FIENUP, _run_sparse_fienup, AltProjConfig, frozenset({"sparsity", "real_valued", "restarts"})
    ),
    Algorithm.TRUTH: SolverEntry(Algorithm.TRUTH, _run_truth),
}


def get_solver(name: str) -> SolverEntry:
    try:
        return SOLVERS[Algorithm(name)]
    except ValueError:
        raise ValueError(f"unknown solver '{name}'; choose from {', '.join(a.value for a in Algorithm)}") from None


def run_solver(name: str, ctx: TrialContext) -> SolverOutcome:
    entry = get_solver(name)
    logger.debug("Running %s with seed %d", entry.name.value, ctx.seed)
    return entry.runner(ctx, entry)
