"""Sparsity-exploiting solvers: GESPAR, sparse Fienup and OMP.

GESPAR works on a quadratic system y_i = x^T A_i x with real symmetric A_i.
Complex signals enter through the usual real/imaginary stacking, which
doubles the number of unknowns.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from phasekit.core.forward import GeneralLinear, Observation, fourier_measurement_vectors
from phasekit.core.signal import Signal
from phasekit.solvers.altproj import (
    AltProjConfig,
    IterateTrace,
    _check_finite,
    _measured,
    magnitude_error,
    project_magnitude,
)
from phasekit.utils.errors import ShapeMismatchError
from phasekit.utils.helpers import make_rng, pad_to_shape

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class QuadraticSystem:
    """Real symmetric matrices A_i (M x N x N) with targets y_i."""

    matrices: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        matrices = np.array(self.matrices, dtype=np.float64, copy=True)
        y = np.array(self.y, dtype=np.float64, copy=True).reshape(-1)
        if matrices.ndim != 3 or matrices.shape[1] != matrices.shape[2] or matrices.shape[0] < 1:
            raise ShapeMismatchError("quadratic system needs an M x N x N stack with M >= 1")
        if matrices.shape[0] != y.size:
            raise ShapeMismatchError(f"{matrices.shape[0]} matrices but {y.size} measurements")
        if np.max(np.abs(matrices - matrices.transpose(0, 2, 1))) > 1e-12:
            raise ValueError("system matrices must be symmetric")
        matrices.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "matrices", matrices)
        object.__setattr__(self, "y", y)

    @property
    def count(self) -> int:
        return self.matrices.shape[0]

    @property
    def n(self) -> int:
        return self.matrices.shape[1]

    def restricted(self, support: Sequence[int]) -> np.ndarray:
        index = np.asarray(support, dtype=int)
        return self.matrices[:, index][:, :, index]

    @classmethod
    def from_model(cls, obs: Observation, model: GeneralLinear, real_valued: bool = True) -> "QuadraticSystem":
        """Bridge from intensity measurements y_k = |a_k^H x|^2.

        For real x the system uses Re(a_k a_k^H); otherwise the 2N x 2N
        stacked form acting on [Re x, Im x].
        """
        if obs.y.ndim != 1 or obs.y.size != model.count:
            raise ShapeMismatchError("observation does not match the measurement vectors")
        lifted = model.lifted_matrices()[obs.valid_mask]
        y = obs.y[obs.valid_mask]
        if real_valued:
            return cls(np.real(lifted), y)
        re, im = np.real(lifted), np.imag(lifted)
        # x^H A x = [u; v]^T [[Re A, -Im A], [Im A, Re A]] [u; v] for x = u + iv.
        top = np.concatenate([re, -im], axis=2)
        bottom = np.concatenate([im, re], axis=2)
        return cls(np.concatenate([top, bottom], axis=1), y)


def fourier_system(obs: Observation, n: int) -> QuadraticSystem:
    """System for a real length-n signal from M-point DFT intensities.

    Conjugate symmetry leaves M // 2 + 1 distinct rows, so only those are used.
    """
    if obs.y.ndim != 1:
        raise ShapeMismatchError("Fourier quadratic systems are 1D")
    m = obs.y.size
    rows = np.arange(m // 2 + 1)
    model = GeneralLinear(fourier_measurement_vectors(n, m).vectors[rows])
    half = Observation(obs.y[rows], obs.valid_mask[rows], obs.noise)
    return QuadraticSystem.from_model(half, model, real_valued=True)


class GesparConfig(BaseModel):
    """Settings for the GESPAR local search."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    sparsity: int = Field(ge=1)
    # None means 1e-4 * sum(y^2).
    tau: Optional[float] = Field(default=None, ge=0)
    max_swaps: int = Field(default=10000, ge=1)
    max_restarts: int = Field(default=100, ge=1)
    gn_max_iters: int = Field(default=100, ge=1)
    gn_damping_init: float = Field(default=1.0, gt=0)
    gn_tolerance: float = Field(default=1e-10, gt=0)
    seed: int = 0


@dataclass
class GesparResult:
    x: Signal
    objective: float
    success: bool
    support: Tuple[int, ...]
    swaps: int
    restarts: int
    history: List[float] = field(default_factory=list)


def objective_and_gradient(x: np.ndarray, system: QuadraticSystem) -> Tuple[float, np.ndarray]:
    """f = sum_i (x^T A_i x - y_i)^2 and its gradient 4 sum_i r_i A_i x."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size != system.n:
        raise ShapeMismatchError(f"x has {x.size} entries, system expects {system.n}")
    ax = system.matrices @ x
    residual = ax @ x - system.y
    return float(np.sum(residual ** 2)), 4.0 * (residual @ ax)


def _restricted_objective(matrices: np.ndarray, y: np.ndarray, z: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
    az = matrices @ z
    residual = az @ z - y
    return float(np.sum(residual ** 2)), residual, az


def damped_gauss_newton(
    system: QuadraticSystem,
    support: Sequence[int],
    cfg: GesparConfig,
    initial: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, float]:
    """Minimize f over vectors supported on `support`.

    Each Gauss-Newton direction is scaled by 0.5 until the objective drops;
    a step below gn_tolerance ends the search. Returns the full-length vector
    and its objective.
    """
    support = np.asarray(support, dtype=int)
    matrices = system.restricted(support)
    y = system.y
    if initial is None:
        z = make_rng(cfg.seed).standard_normal(support.size)
    else:
        z = np.array(initial, dtype=np.float64).reshape(-1)
        if z.size != support.size:
            raise ShapeMismatchError("initial point does not match the support size")

    f, residual, az = _restricted_objective(matrices, y, z)
    for _ in range(cfg.gn_max_iters):
        if f == 0.0:
            break
        jacobian = 2.0 * az
        direction = np.linalg.lstsq(jacobian, -residual, rcond=None)[0]
        step = cfg.gn_damping_init
        improved = False
        while step >= cfg.gn_tolerance:
            candidate = z + step * direction
            f_new, r_new, az_new = _restricted_objective(matrices, y, candidate)
            if f_new < f:
                z, f, residual, az = candidate, f_new, r_new, az_new
                improved = True
                break
            step *= 0.5
        if not improved:
            break

    x = np.zeros(system.n)
    x[support] = z
    return x, f


def _initial_scale(system: QuadraticSystem, support: np.ndarray) -> float:
    traces = np.trace(system.restricted(support), axis1=1, axis2=2)
    mean_trace = float(np.mean(np.abs(traces)))
    if mean_trace <= 0:
        return 1.0
    return float(np.sqrt(np.mean(np.abs(system.y)) / mean_trace))


def gespar_solve(system: QuadraticSystem, cfg: GesparConfig) -> GesparResult:
    """Local search over supports of size s with 2-opt swaps.

    From a random support, solve by damped Gauss-Newton, then try swapping an
    in-support index of small |x| with an off-support index of large
    |grad f|, best-ranked pairs first. A swap is kept when it lowers f; when
    no ranked pair helps the search restarts from a fresh random support.
    `max_swaps` counts swaps over all restarts.
    """
    n, s = system.n, cfg.sparsity
    if s > n:
        raise ValueError(f"sparsity {s} exceeds signal length {n}")
    rng = make_rng(cfg.seed)
    tau = cfg.tau if cfg.tau is not None else 1e-4 * float(np.sum(system.y ** 2))
    cap = s * min(10, n - s)

    best_x, best_f, best_support = np.zeros(n), np.inf, np.arange(s)
    history: List[float] = []
    swaps, restarts = 0, 0
    while restarts < cfg.max_restarts and swaps < cfg.max_swaps and best_f >= tau:
        restarts += 1
        support = np.sort(rng.choice(n, size=s, replace=False))
        start = rng.standard_normal(s) * _initial_scale(system, support)
        x, f = damped_gauss_newton(system, support, cfg, start)
        history.append(f)

        while f >= tau and swaps < cfg.max_swaps and cap > 0:
            _, gradient = objective_and_gradient(x, system)
            off = np.setdiff1d(np.arange(n), support)
            p_order = support[np.argsort(np.abs(x[support]), kind="stable")]
            q_order = off[np.argsort(-np.abs(gradient[off]), kind="stable")]
            improved = False
            tried = 0
            for p in p_order:
                for q in q_order:
                    if tried >= cap or swaps >= cfg.max_swaps:
                        break
                    tried += 1
                    swaps += 1
                    candidate = np.sort(np.append(support[support != p], q))
                    warm = x.copy()
                    warm[q] = x[p] if x[p] != 0 else 1.0
                    x_new, f_new = damped_gauss_newton(system, candidate, cfg, warm[candidate])
                    if f_new < f:
                        x, f, support = x_new, f_new, candidate
                        history.append(f)
                        improved = True
                        break
                if improved or tried >= cap or swaps >= cfg.max_swaps:
                    break
            if not improved:
                break

        if f < best_f:
            best_x, best_f, best_support = x, f, support

    success = best_f < tau
    logger.debug("GESPAR f=%.3e after %d swaps and %d restarts", best_f, swaps, restarts)
    return GesparResult(
        x=Signal(best_x),
        objective=best_f,
        success=success,
        support=tuple(int(i) for i in best_support),
        swaps=swaps,
        restarts=restarts,
        history=history,
    )


@dataclass(frozen=True, eq=False)
class Dictionary:
    """N x D atom matrix; `metadata` holds one mapping per atom."""

    psi: np.ndarray
    metadata: List[Dict[str, Any]] = field(default_factory=list)

    def __post_init__(self):
        psi = np.array(self.psi, copy=True)
        psi = psi.astype(np.complex128 if np.iscomplexobj(psi) else np.float64)
        if psi.ndim != 2 or psi.shape[1] < 1:
            raise ShapeMismatchError("dictionary must be an N x D matrix with D >= 1")
        if np.any(np.linalg.norm(psi, axis=0) == 0):
            raise ValueError("dictionary contains a zero atom")
        if self.metadata and len(self.metadata) != psi.shape[1]:
            raise ShapeMismatchError("metadata must describe every atom")
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)

    @classmethod
    def identity(cls, n: int) -> "Dictionary":
        return cls(np.eye(n))

    @property
    def n(self) -> int:
        return self.psi.shape[0]

    @property
    def atoms(self) -> int:
        return self.psi.shape[1]

    @property
    def is_square(self) -> bool:
        return self.n == self.atoms


def omp_solve(target: Signal, dictionary: Dictionary, k: int) -> np.ndarray:
    """Orthogonal matching pursuit with a least-squares refit after each pick."""
    if not 1 <= k <= dictionary.atoms:
        raise ValueError(f"k must be in [1, {dictionary.atoms}], got {k}")
    t = target.flat()
    if t.size != dictionary.n:
        raise ShapeMismatchError(f"target has {t.size} samples, atoms have {dictionary.n}")
    psi = dictionary.psi
    norms = np.linalg.norm(psi, axis=0)
    residual = t.copy()
    selected: List[int] = []
    coef = np.zeros(0, dtype=np.complex128)
    for _ in range(k):
        scores = np.abs(psi.conj().T @ residual) / norms
        scores[selected] = -1.0
        selected.append(int(np.argmax(scores)))
        coef = np.linalg.lstsq(psi[:, selected], t, rcond=None)[0]
        residual = t - psi[:, selected] @ coef
        if np.linalg.norm(residual) <= 1e-14 * max(np.linalg.norm(t), 1e-300):
            break
    alpha = np.zeros(dictionary.atoms, dtype=np.complex128)
    alpha[selected] = coef
    return alpha


def _keep_largest(alpha: np.ndarray, k: int) -> np.ndarray:
    if k >= alpha.size:
        return alpha
    kept = np.zeros_like(alpha)
    index = np.argsort(-np.abs(alpha), kind="stable")[:k]
    kept[index] = alpha[index]
    return kept


def sparse_fienup_solve(
    obs: Observation,
    dictionary: Dictionary,
    k: int,
    cfg: AltProjConfig,
    initial: Optional[Signal] = None,
    real_valued: bool = False,
    restarts: int = 1,
) -> IterateTrace:
    """Error reduction with a k-sparse projection in the dictionary.

    After the Fourier magnitude replacement the first N samples are coded
    (Psi^-1 for a square dictionary, OMP otherwise), all but the k largest
    coefficients dropped, and the image rebuilt. With several restarts the
    run of lowest final error is returned.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    if obs.y.ndim != 1 or obs.y.size < dictionary.n:
        raise ShapeMismatchError("sparse Fienup needs a 1D grid at least as long as the atoms")
    if not 1 <= k <= dictionary.atoms:
        raise ValueError(f"k must be in [1, {dictionary.atoms}], got {k}")
    magnitude, valid = _measured(obs)
    n = dictionary.n
    inverse = None
    if dictionary.is_square:
        if np.linalg.matrix_rank(dictionary.psi) < n:
            raise ValueError("square dictionary is rank deficient")
        inverse = np.linalg.inv(dictionary.psi)

    def project(z_prime: np.ndarray) -> np.ndarray:
        head = z_prime[:n]
        if real_valued:
            head = np.real(head).astype(np.complex128)
        if inverse is not None:
            alpha = _keep_largest(inverse @ head, k)
        else:
            alpha = omp_solve(Signal(head), dictionary, k)
        image = dictionary.psi @ alpha
        if real_valued:
            image = np.real(image).astype(np.complex128)
        return pad_to_shape(image, obs.shape)

    best: Optional[IterateTrace] = None
    for r in range(restarts):
        if initial is not None and r == 0:
            z = pad_to_shape(initial.values, obs.shape)
        else:
            phase = make_rng(cfg.seed + r).uniform(0.0, 2 * np.pi, size=obs.shape)
            z = project(np.fft.ifft(magnitude * np.exp(1j * phase)))

        errors: List[float] = []
        converged = False
        for i in range(cfg.max_iters):
            spectrum = np.fft.fft(z)
            errors.append(magnitude_error(spectrum, magnitude, valid))
            if errors[-1] <= cfg.epsilon:
                converged = True
                break
            z = project(np.fft.ifft(project_magnitude(spectrum, magnitude, valid)))
            _check_finite(z, i)

        trace = IterateTrace(errors, Signal(z), len(errors), converged, algorithm="sparse_fienup")
        if best is None or trace.final_error < best.final_error:
            best = trace
        if converged:
            break
    return best
