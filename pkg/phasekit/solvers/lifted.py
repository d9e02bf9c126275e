"""Matrix-lifting solvers: PhaseLift, CPRL and QCS.

The lifted variable X stands in for x x^H so that every intensity becomes a
linear functional y_k = Tr(A_k X) with A_k = a_k a_k^H. The convex programs
are solved with a monotone accelerated proximal gradient method: the data
term is a dead-zone least-squares penalty of width epsilon, the trace (or
reweighted trace) and l1 terms enter through the proximal step, and every
iterate is projected onto the PSD cone by eigenvalue clipping.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from phasekit.core.forward import GeneralLinear, Observation
from phasekit.core.signal import Signal
from phasekit.utils.errors import NumericalFailure, ShapeMismatchError
from phasekit.utils.helpers import soft_threshold

logger = logging.getLogger(__name__)


class LiftedConfig(BaseModel):
    """Settings for PhaseLift, CPRL and QCS."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    epsilon: float = Field(default=0.0, ge=0)
    lam: float = Field(default=0.0, ge=0)
    eta: Optional[float] = Field(default=None, gt=0)
    delta: Optional[float] = Field(default=None, gt=0)
    outer_iters: int = Field(default=5, ge=1)
    inner_iters: int = Field(default=500, ge=1)
    # Data-fit-only debias steps after the last iterate; 0 returns the iterate as is.
    polish_iters: int = Field(default=200, ge=0)
    threshold: float = Field(default=0.05, ge=0, lt=1)
    # Trace weight relative to the mean intensity.
    trace_weight: float = Field(default=1e-3, ge=0)
    tolerance: float = Field(default=1e-10, ge=0)
    feasibility_tolerance: float = Field(default=1e-3, gt=0)
    seed: int = 0
    real_valued: bool = False


@dataclass
class LiftedMatrix:
    """Lifted estimate with its solver history."""

    X: np.ndarray
    feasible: bool = True
    iterations: int = 0
    objective: List[float] = field(default_factory=list)
    algorithm: str = ""

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def hermitian_error(self) -> float:
        return float(np.max(np.abs(self.X - self.X.conj().T))) if self.X.size else 0.0

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(_hermitize(self.X))[0])


def _hermitize(values: np.ndarray) -> np.ndarray:
    return 0.5 * (values + values.conj().T)


def project_psd(values: np.ndarray) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm: clip negative eigenvalues."""
    eigvals, eigvecs = np.linalg.eigh(_hermitize(values))
    clipped = np.maximum(eigvals, 0.0)
    return _hermitize((eigvecs * clipped) @ eigvecs.conj().T)


def project_l1_ball(values: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection of a nonnegative vector onto {v >= 0, sum v <= radius}."""
    if values.sum() <= radius:
        return values
    ordered = np.sort(values)[::-1]
    cumulative = np.cumsum(ordered) - radius
    ranks = np.arange(1, values.size + 1)
    rho = int(np.nonzero(ordered - cumulative / ranks > 0)[0][-1])
    theta = cumulative[rho] / (rho + 1)
    return np.maximum(values - theta, 0.0)


def project_row_norms(values: np.ndarray, radius: float) -> np.ndarray:
    """Scale rows so that the sum of row l2 norms is at most `radius`.

    The row-scaled matrix is re-symmetrized before the PSD projection.
    """
    norms = np.linalg.norm(values, axis=1)
    if norms.sum() <= radius:
        return values
    target = project_l1_ball(norms, radius)
    scale = np.where(norms > 0, target / np.where(norms > 0, norms, 1.0), 0.0)
    return _hermitize(values * scale[:, None])


class _LiftedOperator:
    """A(X)_k = a_k^H X a_k over the valid measurements, with its adjoint."""

    def __init__(self, obs: Observation, model: GeneralLinear, epsilon: float, real_valued: bool):
        if not isinstance(model, GeneralLinear):
            raise TypeError(f"lifted solvers need general linear measurements, got {type(model).__name__}")
        if obs.y.ndim != 1 or obs.y.size != model.count:
            raise ShapeMismatchError(
                f"observation has shape {obs.shape} but the model has {model.count} measurement vectors"
            )
        valid = obs.valid_mask
        self.vectors = model.vectors[valid]
        if real_valued:
            if np.any(np.imag(self.vectors) != 0):
                raise ValueError("real-valued lifting needs real measurement vectors")
            self.vectors = np.real(self.vectors).astype(np.complex128)
        self.y = obs.y[valid]
        if self.y.size == 0:
            raise ValueError("observation has no valid measurements")
        self.epsilon = epsilon
        self.real_valued = real_valued
        if not np.any(self.vectors):
            raise ValueError("measurement vectors are all zero")

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    @cached_property
    def lipschitz(self) -> float:
        """Squared operator norm: top eigenvalue of the Gram matrix |a_k^H a_l|^2."""
        gram = np.abs(self.vectors.conj() @ self.vectors.T) ** 2
        return float(np.linalg.eigvalsh(gram)[-1])

    def apply(self, X: np.ndarray) -> np.ndarray:
        return np.real(np.einsum("ki,ij,kj->k", self.vectors.conj(), X, self.vectors))

    def adjoint(self, r: np.ndarray) -> np.ndarray:
        return (self.vectors.T * r) @ self.vectors.conj()

    def residual(self, X: np.ndarray) -> np.ndarray:
        """Dead-zone residual: zero inside the epsilon slack."""
        r = self.apply(X) - self.y
        return np.sign(r) * np.maximum(np.abs(r) - self.epsilon, 0.0)

    def data_fit(self, X: np.ndarray) -> float:
        return 0.5 * float(np.sum(self.residual(X) ** 2))

    def is_feasible(self, X: np.ndarray, tolerance: float) -> bool:
        return float(np.linalg.norm(self.residual(X))) <= tolerance * max(float(np.linalg.norm(self.y)), 1e-300)


@dataclass
class _Penalty:
    """mu (Tr(W X) + lam |X|_1) with optional row-norm ball and frozen rows."""

    mu: float
    weight: np.ndarray
    lam: float = 0.0
    eta: Optional[float] = None
    keep: Optional[np.ndarray] = None

    def value(self, X: np.ndarray) -> float:
        total = float(np.real(np.trace(self.weight @ X)))
        if self.lam > 0:
            total += self.lam * float(np.sum(np.abs(X)))
        return self.mu * total

    def prox(self, V: np.ndarray, step: float, real_valued: bool) -> np.ndarray:
        V = V - (step * self.mu) * self.weight
        if self.lam > 0:
            V = soft_threshold(V, step * self.mu * self.lam)
        if self.eta is not None:
            V = project_row_norms(V, self.eta)
        if self.keep is not None:
            V = V * np.outer(self.keep, self.keep)
        if real_valued:
            X = project_psd(np.real(V)).astype(np.complex128)
        else:
            X = project_psd(V)
        if self.keep is not None:
            X = X * np.outer(self.keep, self.keep)
        return X


def _mfista(
    op: _LiftedOperator,
    X0: np.ndarray,
    penalty: _Penalty,
    iters: int,
    tolerance: float,
) -> Tuple[np.ndarray, List[float]]:
    """Monotone FISTA: the recorded objective never increases."""
    step = 1.0 / op.lipschitz

    def objective(X: np.ndarray) -> float:
        return op.data_fit(X) + penalty.value(X)

    x = X0
    fx = objective(x)
    y, t = x, 1.0
    history: List[float] = []
    for i in range(iters):
        gradient = op.adjoint(op.residual(y))
        z = penalty.prox(y - step * gradient, step, op.real_valued)
        fz = objective(z)
        accepted = fz <= fx
        x_next, f_next = (z, fz) if accepted else (x, fx)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = x_next + (t / t_next) * (z - x_next) + ((t - 1.0) / t_next) * (x_next - x)
        if not np.all(np.isfinite(y)):
            raise NumericalFailure(f"non-finite lifted iterate at iteration {i}")
        change = fx - f_next
        x, fx, t = x_next, f_next, t_next
        history.append(fx)
        if accepted and i > 0 and change <= tolerance * max(fx, 1e-300):
            break
    return x, history


def _trace_mu(op: _LiftedOperator, cfg: LiftedConfig) -> float:
    return cfg.trace_weight * float(np.mean(op.y))


def _finish(
    op: _LiftedOperator,
    X: np.ndarray,
    cfg: LiftedConfig,
    history: List[float],
    iterations: int,
    algorithm: str,
    keep: Optional[np.ndarray] = None,
) -> LiftedMatrix:
    """Debias with a data-fit-only pass over the nonzero rows, then flag infeasible results."""
    if keep is None:
        keep = np.linalg.norm(X, axis=1) > 0
        if keep.all():
            keep = None
    if cfg.polish_iters:
        polish = _Penalty(mu=0.0, weight=np.zeros_like(X), keep=keep)
        X, extra = _mfista(op, X, polish, cfg.polish_iters, cfg.tolerance)
        iterations += len(extra)
    X = _hermitize(X)
    feasible = op.is_feasible(X, cfg.feasibility_tolerance)
    if not feasible:
        logger.warning("%s finished without meeting the measurement constraints", algorithm)
    return LiftedMatrix(X, feasible, iterations, history, algorithm)


def lift(x: Signal) -> LiftedMatrix:
    """X = x x^H."""
    if x.ndim != 1:
        raise ShapeMismatchError("lifting is defined for 1D signals")
    return LiftedMatrix(np.outer(x.values, x.values.conj()), algorithm="lift")


def phaselift_solve(obs: Observation, model: GeneralLinear, cfg: LiftedConfig) -> LiftedMatrix:
    """min Tr(X) subject to |Tr(A_k X) - y_k| <= epsilon and X PSD."""
    op = _LiftedOperator(obs, model, cfg.epsilon, cfg.real_valued)
    penalty = _Penalty(mu=_trace_mu(op, cfg), weight=np.eye(op.n, dtype=np.complex128))
    X, history = _mfista(op, np.zeros((op.n, op.n), dtype=np.complex128), penalty, cfg.inner_iters, cfg.tolerance)
    return _finish(op, X, cfg, history, len(history), "phaselift")


def cprl_solve(obs: Observation, model: GeneralLinear, cfg: LiftedConfig) -> LiftedMatrix:
    """PhaseLift with an added elementwise l1 term lam |X|_1."""
    op = _LiftedOperator(obs, model, cfg.epsilon, cfg.real_valued)
    penalty = _Penalty(mu=_trace_mu(op, cfg), weight=np.eye(op.n, dtype=np.complex128), lam=cfg.lam)
    X, history = _mfista(op, np.zeros((op.n, op.n), dtype=np.complex128), penalty, cfg.inner_iters, cfg.tolerance)
    return _finish(op, X, cfg, history, len(history), "cprl")


def _row_support(X: np.ndarray, threshold: float) -> np.ndarray:
    norms = np.linalg.norm(X, axis=1)
    if not np.any(norms > 0):
        return np.ones(X.shape[0], dtype=bool)
    return norms >= threshold * norms.max()


def qcs_solve(obs: Observation, model: GeneralLinear, cfg: LiftedConfig) -> LiftedMatrix:
    """Reweighted trace minimization with a row-norm budget and row thresholding.

    Outer step t minimizes Tr(W_t X) with W_0 = I and W_t = (X_t + delta I)^-1,
    then zeroes rows and columns whose norm is below `threshold` of the largest.
    Stops after `outer_iters` or when the outer objective changes by less
    than 1e-8 relative.
    """
    if cfg.eta is None:
        raise ValueError("QCS needs a row-sparsity budget eta")
    op = _LiftedOperator(obs, model, cfg.epsilon, cfg.real_valued)
    n = op.n
    mu = _trace_mu(op, cfg)
    identity = np.eye(n, dtype=np.complex128)
    X = np.zeros((n, n), dtype=np.complex128)
    keep = np.ones(n, dtype=bool)
    delta = cfg.delta
    history: List[float] = []
    iterations = 0

    for t in range(cfg.outer_iters):
        if t == 0:
            weight = identity
        else:
            if delta is None:
                trace = float(np.real(np.trace(X)))
                delta = 1e-6 * trace / n if trace > 0 else 1e-6
            weight = _hermitize(np.linalg.inv(X + delta * identity))
        penalty = _Penalty(mu=mu, weight=weight, eta=cfg.eta, keep=None if keep.all() else keep)
        X, inner = _mfista(op, X, penalty, cfg.inner_iters, cfg.tolerance)
        iterations += len(inner)
        if cfg.threshold > 0:
            keep = keep & _row_support(X, cfg.threshold)
            X = X * np.outer(keep, keep)
        history.append(op.data_fit(X) + mu * float(np.real(np.trace(X))))
        if t > 0 and abs(history[-2] - history[-1]) <= 1e-8 * max(abs(history[-2]), 1e-300):
            break

    logger.debug("QCS kept %d of %d rows after %d outer steps", int(keep.sum()), n, len(history))
    return _finish(op, X, cfg, history, iterations, "qcs", keep=None if keep.all() else keep)


def extract_rank1(X: LiftedMatrix) -> Signal:
    """sqrt(s_1) u_1 from the leading eigenpair; the zero matrix gives the zero signal.

    The global phase is fixed by making the largest-modulus entry real positive.
    """
    eigvals, eigvecs = np.linalg.eigh(_hermitize(X.X))
    if eigvals.size == 0 or eigvals[-1] <= 0:
        return Signal.zeros((X.n,))
    u = eigvecs[:, -1]
    pivot = u[int(np.argmax(np.abs(u)))]
    u = u * (np.abs(pivot) / pivot)
    return Signal(np.sqrt(eigvals[-1]) * u)


def spectral_initializer(obs: Observation, model: GeneralLinear) -> Signal:
    """Leading eigenvector of (1/K) sum_k y_k a_k a_k^H scaled to the expected norm.

    For i.i.d. entries of mean power p, E y_k = p |x|^2, so the norm is
    sqrt(mean(y) / p).
    """
    op = _LiftedOperator(obs, model, 0.0, real_valued=False)
    matrix = op.adjoint(op.y) / op.y.size
    _, eigvecs = np.linalg.eigh(_hermitize(matrix))
    power = float(np.mean(np.abs(op.vectors) ** 2))
    return Signal(np.sqrt(float(np.mean(op.y)) / power) * eigvecs[:, -1])
