# ----------------------------------------------------------------------
# |
# |  MemoryMetrics.py
# |
# |  David Brownell <db@DavidBrownell.com>
# |      2024-09-04 08:12:31
# |
# ----------------------------------------------------------------------
# |
# |  Copyright David Brownell 2024
# |  Distributed under the MIT License.
# |
# ----------------------------------------------------------------------
"""\
Mean-square deviation of selected network variables from their initial values, and the decoherence
time at which that deviation reaches a fraction eps of its reference scale.

    Delta(t) = ||F alpha_t sqrt(P)||^2 + <Sigma, Re Lambda(t)>

where alpha_t = expm(tA) - I, Sigma = F^T F and Lambda(t) is the controllability Gramian of
(A, B Omega B^T).
"""

import math

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np
import numpy.typing as npt

from OscillatorMemory.Errors import DimensionError, DomainError, IsolatedRegimeError
from OscillatorMemory.Impl import Common
from OscillatorMemory.MatKernel import (
    Expm,
    Gramian,
    GramianMethod,
    HermitianEmbedding,
    Mat,
    MinSymmetricEigenvalue,
    NumericalRank,
    Sym,
    ToMat,
)
from OscillatorMemory.NetworkModel import AugmentedModel


# ----------------------------------------------------------------------
# |
# |  Public Types
# |
# ----------------------------------------------------------------------
DEFAULT_EPSILON = 0.01
DEFAULT_CURVE_POINTS = 200

CURVE_HORIZON_FACTOR = 5.0  # Default curve grid ends at CURVE_HORIZON_FACTOR / ||A||_F
HITTING_HORIZON_FACTOR = 50.0  # Default hitting time horizon is HITTING_HORIZON_FACTOR / ||A||_F

_REFINEMENT_INTERVALS = 16
_MAX_BISECTIONS = 200
_TANGENT_SLOPE = 1e-10


# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class MemoryTask:
    """The selection F of network variables to remember, the initial covariance P, and fidelity levels"""

    F: Mat  # s x n
    P: Mat  # n x n
    epsilons: tuple[float, ...]

    # ----------------------------------------------------------------------
    @classmethod
    def Create(
        cls,
        F: Iterable,
        P: Iterable,
        epsilons: Iterable[float] = (DEFAULT_EPSILON,),
    ) -> "MemoryTask":
        return cls(ToMat(F, "F"), ToMat(P, "P"), tuple(float(eps) for eps in epsilons))

    # ----------------------------------------------------------------------
    @property
    def s(self) -> int:
        return self.F.shape[0]

    @property
    def Sigma(self) -> Mat:
        return self.F.T @ self.F


# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class DeviationCurve:
    """Delta(t) sampled on a grid along with its first two derivatives at t = 0"""

    grid: npt.NDArray[np.float64]
    values: npt.NDArray[np.float64]
    deriv0: float
    deriv2_0: float


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class HittingTime:
    """First time at which Delta(t) reaches eps * Delta_*"""

    eps: float
    threshold: float
    tau: Optional[float]  # None when the threshold was not reached before the horizon
    horizon: float
    tangent: bool = False  # Delta barely crosses the threshold; tau may not be unique

    # ----------------------------------------------------------------------
    @property
    def reached(self) -> bool:
        return self.tau is not None


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class TaylorCoefficients:
    """Coefficients of the high-fidelity expansion tau_hat(eps) = tau1 eps + tau2 eps^2 / 2"""

    tau1: float
    tau2: float

    # ----------------------------------------------------------------------
    def Evaluate(
        self,
        eps: float,
    ) -> float:
        return self.tau1 * eps + 0.5 * self.tau2 * eps * eps


# ----------------------------------------------------------------------
# |
# |  Public Functions
# |
# ----------------------------------------------------------------------
def ValidateTask(
    task: MemoryTask,
    Theta: Mat,
) -> list[str]:
    """Returns descriptions of the task invariants that do not hold"""

    n = Theta.shape[0]
    violations: list[str] = []

    if task.F.shape[1] != n:
        violations.append(f"F must have {n} columns ({task.F.shape[1]}).")

    if task.P.shape != (n, n):
        violations.append(f"P must be {n}x{n} ({task.P.shape}).")

    if violations:
        return violations

    rank = NumericalRank(task.F)
    if rank != task.s or task.s > n:
        violations.append(f"F must have full row rank (rank {rank}, {task.s} rows).")

    if Common.FrobeniusNorm(task.P - task.P.T) > Common.STRUCTURAL_TOL * Common.FrobeniusNorm(task.P):
        violations.append("P must be symmetric.")
    else:
        min_eigenvalue = MinSymmetricEigenvalue(HermitianEmbedding(Sym(task.P), Theta))
        if min_eigenvalue < -Common.STRUCTURAL_TOL:
            violations.append(
                f"P + i Theta must be positive semidefinite (minimum eigenvalue {min_eigenvalue:.3e}).",
            )

    if DeltaStar(task) <= Common.CLAMP_TOL * Common.FrobeniusNorm(task.F) ** 2 * Common.FrobeniusNorm(
        task.P
    ):
        violations.append("F sqrt(P) must be nonzero.")

    for eps in task.epsilons:
        if not math.isfinite(eps) or eps <= 0.0:
            violations.append(f"Fidelity levels must be positive ({eps}).")

    return violations


# ----------------------------------------------------------------------
def EnsureValidTask(
    task: MemoryTask,
    Theta: Mat,
) -> None:
    violations = ValidateTask(task, Theta)

    if violations:
        raise DomainError("The memory task is not valid:\n{}".format("\n".join(f"    - {v}" for v in violations)))


# ----------------------------------------------------------------------
def DeltaStar(
    task: MemoryTask,
) -> float:
    """||F sqrt(P)||^2"""

    return float(np.trace(task.F @ task.P @ task.F.T))


# ----------------------------------------------------------------------
def LambdaParts(
    model: AugmentedModel,
    t: float,
    method: GramianMethod = GramianMethod.vanloan,
) -> tuple[Mat, Mat]:
    """(Re Lambda(t), Im Lambda(t))"""

    return (
        Gramian(model.A, model.B @ model.B.T, t, method),
        Gramian(model.A, model.B @ model.Jmat @ model.B.T, t, method),
    )


# ----------------------------------------------------------------------
def LambdaDerivatives0(
    model: AugmentedModel,
) -> tuple[tuple[Mat, Mat], tuple[Mat, Mat]]:
    """Lambda'(0) = B Omega B^T and Lambda''(0) = A B Omega B^T + B Omega B^T A^T as (real, imag) pairs"""

    first = (model.B @ model.B.T, model.B @ model.Jmat @ model.B.T)
    second = tuple(model.A @ part + part @ model.A.T for part in first)

    return first, (second[0], second[1])


# ----------------------------------------------------------------------
def Deviation(
    model: AugmentedModel,
    task: MemoryTask,
    t: float,
    method: GramianMethod = GramianMethod.vanloan,
) -> float:
    if t < 0:
        raise DomainError(f"Time must be nonnegative ({t}).")

    _EnsureConforming(model, task)

    if t == 0:
        return 0.0

    alpha = Expm(t * model.A) - np.eye(model.n)
    real_lambda = Gramian(model.A, model.B @ model.B.T, t, method)

    return _CombineDeviation(task, alpha, real_lambda)


# ----------------------------------------------------------------------
def SecondMoment(
    model: AugmentedModel,
    task: MemoryTask,
    t: float,
    method: GramianMethod = GramianMethod.vanloan,
) -> tuple[Mat, Mat]:
    """(Re Upsilon(t), Im Upsilon(t)) with Upsilon(t) = alpha_t (P + i Theta) alpha_t^T + Lambda(t)"""

    if t < 0:
        raise DomainError(f"Time must be nonnegative ({t}).")

    _EnsureConforming(model, task)

    alpha = Expm(t * model.A) - np.eye(model.n)
    real_lambda, imag_lambda = LambdaParts(model, t, method)

    return (
        alpha @ task.P @ alpha.T + real_lambda,
        alpha @ model.Theta @ alpha.T + imag_lambda,
    )


# ----------------------------------------------------------------------
def DeltaDerivatives0(
    model: AugmentedModel,
    task: MemoryTask,
) -> tuple[float, float]:
    """(Delta'(0), Delta''(0))"""

    _EnsureConforming(model, task)

    Sigma = task.Sigma
    BBt = model.B @ model.B.T

    first = Common.FrobeniusNorm(task.F @ model.B) ** 2
    second = float(
        np.sum(Sigma * (model.A @ BBt + BBt @ model.A.T + 2.0 * model.A @ task.P @ model.A.T))
    )

    return first, second


# ----------------------------------------------------------------------
def DefaultCurveHorizon(
    model: AugmentedModel,
) -> float:
    norm = Common.FrobeniusNorm(model.A)
    return CURVE_HORIZON_FACTOR / norm if norm > Common.ETA else CURVE_HORIZON_FACTOR


# ----------------------------------------------------------------------
def DefaultHittingHorizon(
    model: AugmentedModel,
) -> float:
    return HITTING_HORIZON_FACTOR / (Common.FrobeniusNorm(model.A) + Common.ETA)


# ----------------------------------------------------------------------
def CalculateDeviationCurve(
    model: AugmentedModel,
    task: MemoryTask,
    grid: Optional[Iterable[float]] = None,
    *,
    t_end: Optional[float] = None,
    points: int = DEFAULT_CURVE_POINTS,
    method: GramianMethod = GramianMethod.vanloan,
) -> DeviationCurve:
    """Samples Delta(t), advancing expm(tA) and Lambda(t) from one grid point to the next"""

    _EnsureConforming(model, task)

    if grid is None:
        if points < 2:
            raise DomainError(f"At least 2 grid points are required ({points}).")

        if t_end is None:
            t_end = DefaultCurveHorizon(model)
        elif t_end <= 0:
            raise DomainError(f"The curve horizon must be positive ({t_end}).")

        times = np.linspace(0.0, t_end, points)
    else:
        times = np.asarray(list(grid), dtype=np.float64)

        if times.ndim != 1 or times.size == 0:
            raise DimensionError("The grid must be a non-empty list of times.")

    if times[0] < 0:
        raise DomainError(f"Time must be nonnegative ({times[0]}).")

    steps = np.diff(times)

    if np.any(steps <= 0.0):
        raise DomainError("The grid must be strictly increasing.")

    BBt = model.B @ model.B.T
    identity = np.eye(model.n)

    transition = Expm(times[0] * model.A)
    real_lambda = Gramian(model.A, BBt, float(times[0]), method)

    values = np.empty_like(times)
    values[0] = _CombineDeviation(task, transition - identity, real_lambda)

    is_uniform = steps.size > 0 and bool(np.allclose(steps, steps[0], rtol=1e-12, atol=0.0))
    step_cache: Optional[tuple[Mat, Mat]] = None

    for index, step in enumerate(steps):
        if step_cache is None or not is_uniform:
            step_cache = (Expm(step * model.A), Gramian(model.A, BBt, float(step), method))

        step_transition, step_lambda = step_cache

        # Lambda(t + h) = expm(hA) Lambda(t) expm(hA)^T + Lambda(h)
        real_lambda = step_transition @ real_lambda @ step_transition.T + step_lambda
        transition = step_transition @ transition

        values[index + 1] = _CombineDeviation(task, transition - identity, real_lambda)

    deriv0, deriv2_0 = DeltaDerivatives0(model, task)

    return DeviationCurve(times, values, deriv0, deriv2_0)


# ----------------------------------------------------------------------
def DecoherenceTime(
    model: AugmentedModel,
    task: MemoryTask,
    eps: float,
    *,
    t_max: Optional[float] = None,
    method: GramianMethod = GramianMethod.vanloan,
) -> HittingTime:
    """Returns the first time at which Delta(t) reaches eps * Delta_*"""

    if not math.isfinite(eps) or eps <= 0.0:
        raise DomainError(f"The fidelity level must be positive ({eps}).")

    _EnsureConforming(model, task)

    horizon = DefaultHittingHorizon(model) if t_max is None else float(t_max)
    if horizon <= 0.0:
        raise DomainError(f"The horizon must be positive ({horizon}).")

    threshold = eps * DeltaStar(task)
    if threshold <= 0.0:
        raise DomainError("F sqrt(P) must be nonzero.")

    # ----------------------------------------------------------------------
    def Evaluate(
        t: float,
    ) -> float:
        return Deviation(model, task, t, method)

    # ----------------------------------------------------------------------

    deriv0, _ = DeltaDerivatives0(model, task)

    natural_scale = 1.0 / (Common.FrobeniusNorm(model.A) + Common.ETA)
    t = min(threshold / max(deriv0, Common.ETA), natural_scale, horizon)

    # Scan: geometric up to the natural time scale, uniform beyond it
    previous_t = 0.0
    previous_value = 0.0

    while True:
        value = Evaluate(t)
        if value >= threshold:
            break

        if t >= horizon:
            return HittingTime(eps, threshold, None, horizon)

        previous_t = t
        previous_value = value

        t = min(2.0 * t if t < natural_scale else t + 0.25 * natural_scale, horizon)

    bracket_end = t

    lower, upper, lower_value, upper_value = _RefineBracket(
        Evaluate,
        threshold,
        previous_t,
        previous_value,
        t,
        value,
    )

    slope = (upper_value - lower_value) / (upper - lower)
    tangent = slope * upper / threshold < _TANGENT_SLOPE

    tolerance = 1e-12 * bracket_end

    for _ in range(_MAX_BISECTIONS):
        if upper - lower <= tolerance:
            break

        midpoint = 0.5 * (lower + upper)

        if Evaluate(midpoint) >= threshold:
            upper = midpoint
        else:
            lower = midpoint

    return HittingTime(eps, threshold, upper, horizon, tangent)


# ----------------------------------------------------------------------
def TauTaylor(
    model: AugmentedModel,
    task: MemoryTask,
) -> TaylorCoefficients:
    """tau'(0) and tau''(0) of the high-fidelity expansion of the decoherence time"""

    _EnsureConforming(model, task)

    fb_norm = Common.FrobeniusNorm(task.F @ model.B)

    if fb_norm <= Common.TAYLOR_TOL * Common.FrobeniusNorm(task.F) * Common.FrobeniusNorm(model.B):
        raise IsolatedRegimeError()

    deriv0, deriv2_0 = DeltaDerivatives0(model, task)

    tau1 = DeltaStar(task) / deriv0
    tau2 = -deriv2_0 * tau1 * tau1 / deriv0

    return TaylorCoefficients(tau1, tau2)


# ----------------------------------------------------------------------
def NoncommutativityCheck(
    task: MemoryTask,
    Theta: Mat,
) -> bool:
    """True if F Theta F^T != 0, which guarantees F sqrt(P) != 0 for every physical P"""

    return Common.FrobeniusNorm(task.F @ Theta @ task.F.T) > (
        1e-12 * Common.FrobeniusNorm(task.F) ** 2 * Common.FrobeniusNorm(Theta)
    )


# ----------------------------------------------------------------------
# |
# |  Private Functions
# |
# ----------------------------------------------------------------------
def _EnsureConforming(
    model: AugmentedModel,
    task: MemoryTask,
) -> None:
    if task.F.shape[1] != model.n or task.P.shape != (model.n, model.n):
        raise DimensionError(
            f"The task (F {task.F.shape}, P {task.P.shape}) does not conform to a network with n={model.n}.",
        )


# ----------------------------------------------------------------------
def _CombineDeviation(
    task: MemoryTask,
    alpha: Mat,
    real_lambda: Mat,
) -> float:
    F_alpha = task.F @ alpha

    value = float(np.trace(F_alpha @ task.P @ F_alpha.T)) + float(np.sum(task.Sigma * real_lambda))

    if value < 0.0:
        if value < -Common.CLAMP_TOL * (1.0 + DeltaStar(task)):
            raise DomainError(
                f"The mean-square deviation is negative ({value:.3e}); P + i Theta is not positive semidefinite.",
            )

        value = 0.0

    return value


# ----------------------------------------------------------------------
def _RefineBracket(
    func: Callable[[float], float],
    threshold: float,
    lower: float,
    lower_value: float,
    upper: float,
    upper_value: float,
) -> tuple[float, float, float, float]:
    """Narrows [lower, upper] to its first uniform subinterval where func crosses the threshold"""

    step = (upper - lower) / _REFINEMENT_INTERVALS

    for index in range(1, _REFINEMENT_INTERVALS):
        t = lower + index * step
        value = func(t)

        if value >= threshold:
            return lower + (index - 1) * step, t, lower_value, value

        lower_value = value

    return upper - step, upper, lower_value, upper_value
