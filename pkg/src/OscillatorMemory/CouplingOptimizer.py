# ----------------------------------------------------------------------
# |
# |  CouplingOptimizer.py
# |
# |  David Brownell <db@DavidBrownell.com>
# |      2024-09-05 08:20:44
# |
# ----------------------------------------------------------------------
# |
# |  Copyright David Brownell 2024
# |  Distributed under the MIT License.
# |
# ----------------------------------------------------------------------
"""\
Chooses the direct energy coupling blocks R0_jk that maximize the high-fidelity approximation of the
decoherence time.

With every other coupling held fixed, tau_hat(eps) increases as Delta''(0) decreases; Delta''(0) is
a convex quadratic in the R0 blocks, so its minimizer solves the affine system

    g_jk(R0_jk) + K_jk(R_breve_jk) = 0      for every energy edge (j, k)

where R_breve_jk is the energy matrix with the (j, k) and (k, j) direct coupling blocks removed.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import numpy as np
import scipy.linalg

from OscillatorMemory.Errors import (
    ConvergenceError,
    DimensionError,
    ModeMismatchError,
    OptimizationError,
    SingularMatrixError,
)
from OscillatorMemory.Impl import Common
from OscillatorMemory.Isolation import IsolatedDeltaSecond
from OscillatorMemory.MatKernel import CommutationMatrix, Kron, Mat, SolveLinear, Sym, Unvec, Vec
from OscillatorMemory.MemoryMetrics import DeltaDerivatives0, MemoryTask
from OscillatorMemory.NetworkModel import Assemble, AugmentedModel, NetworkSpec, ReplaceEnergyEdges


# ----------------------------------------------------------------------
# |
# |  Public Types
# |
# ----------------------------------------------------------------------
DEFAULT_FIXED_POINT_TOL = 1e-10
DEFAULT_MAX_SWEEPS = 500


# ----------------------------------------------------------------------
class OptimizerMode(str, Enum):
    """Objective minimized by the optimizer"""

    standard = "standard"  # Delta''(0)
    isolated = "isolated"  # 2 ||G sqrt(P)||^2; requires FB = 0


# ----------------------------------------------------------------------
class OptimizerMethod(str, Enum):
    """Algorithm used to solve the optimality system"""

    global_ = "global"  # Single stacked linear system across all edges
    fixed_point = "fixed_point"  # Gauss-Seidel sweeps over edges


# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class EdgeUnknowns:
    """One R0 block per energy edge, in the order of NetworkSpec.energy_edges"""

    edges: tuple[tuple[str, str], ...]
    blocks: tuple[Mat, ...]

    # ----------------------------------------------------------------------
    @classmethod
    def FromSpec(
        cls,
        spec: NetworkSpec,
    ) -> "EdgeUnknowns":
        return cls(
            tuple((edge.j, edge.k) for edge in spec.energy_edges),
            tuple(edge.R0_jk.copy() for edge in spec.energy_edges),
        )

    # ----------------------------------------------------------------------
    @classmethod
    def Zeros(
        cls,
        spec: NetworkSpec,
    ) -> "EdgeUnknowns":
        return cls(
            tuple((edge.j, edge.k) for edge in spec.energy_edges),
            tuple(np.zeros_like(edge.R0_jk) for edge in spec.energy_edges),
        )

    # ----------------------------------------------------------------------
    @classmethod
    def FromVector(
        cls,
        spec: NetworkSpec,
        x: Mat,
    ) -> "EdgeUnknowns":
        x = np.asarray(x, dtype=np.float64).reshape(-1, 1)

        blocks: list[Mat] = []
        offset = 0

        for edge in spec.energy_edges:
            rows, cols = edge.R0_jk.shape

            blocks.append(Unvec(x[offset : offset + rows * cols], rows, cols).copy())
            offset += rows * cols

        if offset != x.shape[0]:
            raise DimensionError(f"The vector has {x.shape[0]} entries but {offset} are required.")

        return cls(tuple((edge.j, edge.k) for edge in spec.energy_edges), tuple(blocks))

    # ----------------------------------------------------------------------
    @property
    def size(self) -> int:
        return sum(block.size for block in self.blocks)

    # ----------------------------------------------------------------------
    def ToVector(self) -> Mat:
        if not self.blocks:
            return np.zeros((0, 1))

        return np.vstack([Vec(block) for block in self.blocks])


# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class ObjectiveData:
    """Quantities that do not change while the R0 blocks are optimized"""

    Sigma: Mat
    P: Mat
    Theta: Mat
    ThetaSigmaTheta: Mat
    L: Mat  # 1/2 Sym(Theta Sigma B (B^T + 2 J M P))
    state_ranges: dict[str, tuple[int, int]]
    is_isolating: bool

    # ----------------------------------------------------------------------
    @classmethod
    def Create(
        cls,
        model: AugmentedModel,
        task: MemoryTask,
    ) -> "ObjectiveData":
        Sigma = task.Sigma
        Theta_Sigma = model.Theta @ Sigma

        return cls(
            Sigma=Sigma,
            P=task.P,
            Theta=model.Theta,
            ThetaSigmaTheta=Theta_Sigma @ model.Theta,
            L=0.5 * Sym(Theta_Sigma @ model.B @ (model.B.T + 2.0 * model.Jmat @ model.M @ task.P)),
            state_ranges=model.state_ranges,
            is_isolating=Common.IsIsolating(task.F, model.B),
        )

    # ----------------------------------------------------------------------
    def Block(
        self,
        value: Mat,
        j: str,
        k: str,
    ) -> Mat:
        return value[slice(*self.state_ranges[j]), slice(*self.state_ranges[k])]

    # ----------------------------------------------------------------------
    def Dims(
        self,
        j: str,
        k: str,
    ) -> tuple[int, int]:
        j_begin, j_end = self.state_ranges[j]
        k_begin, k_end = self.state_ranges[k]

        return j_end - j_begin, k_end - k_begin


# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class GradientResult:
    """Derivatives of Delta''(0) with respect to each R0 block and to the full energy matrix"""

    per_edge: list[Mat]
    full: Mat


# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class OptimizerReport:
    solution: EdgeUnknowns
    optimized_spec: NetworkSpec
    per_edge_residual_norms: list[float]
    objective_before: float
    objective_after: float
    global_system_rcond: float
    mode: OptimizerMode
    method: OptimizerMethod
    non_unique: bool = False
    iterations: int = 0
    residual_history: list[float] = field(default_factory=list)


# ----------------------------------------------------------------------
# |
# |  Public Functions
# |
# ----------------------------------------------------------------------
def GApply(
    data: ObjectiveData,
    j: str,
    k: str,
    N: Mat,
) -> Mat:
    """Part of the optimality residual contributed by the edge's own block N"""

    if N.shape != data.Dims(j, k):
        raise DimensionError(f"The block must be {data.Dims(j, k)} ({N.shape}).")

    TST_jj = data.Block(data.ThetaSigmaTheta, j, j)
    TST_kk = data.Block(data.ThetaSigmaTheta, k, k)
    TST_jk = data.Block(data.ThetaSigmaTheta, j, k)

    P_jj = data.Block(data.P, j, j)
    P_kk = data.Block(data.P, k, k)
    P_jk = data.Block(data.P, j, k)

    return TST_jj @ N @ P_kk + P_jj @ N @ TST_kk + TST_jk @ N.T @ P_jk + P_jk @ N.T @ TST_jk


# ----------------------------------------------------------------------
def QMatrix(
    data: ObjectiveData,
    j: str,
    k: str,
) -> tuple[Mat, float]:
    """Matrix Q with Vec(GApply(N)) = Q Vec(N), along with the asymmetry removed from it"""

    n_j, n_k = data.Dims(j, k)

    TST_jj = data.Block(data.ThetaSigmaTheta, j, j)
    TST_kk = data.Block(data.ThetaSigmaTheta, k, k)
    TST_jk = data.Block(data.ThetaSigmaTheta, j, k)

    P_jj = data.Block(data.P, j, j)
    P_kk = data.Block(data.P, k, k)
    P_jk = data.Block(data.P, j, k)

    Q = (
        Kron(P_kk, TST_jj)
        + Kron(TST_kk, P_jj)
        + (Kron(P_jk.T, TST_jk) + Kron(TST_jk.T, P_jk)) @ CommutationMatrix(n_j, n_k)
    )

    asymmetry = Common.FrobeniusNorm(Q - Q.T)

    return Sym(Q), asymmetry


# ----------------------------------------------------------------------
def KApply(
    data: ObjectiveData,
    j: str,
    k: str,
    R_breve: Mat,
    mode: OptimizerMode,
) -> Mat:
    """Part of the optimality residual contributed by every energy term except the edge's own block"""

    if mode == OptimizerMode.isolated and not data.is_isolating:
        raise ModeMismatchError("The isolated optimizer mode requires FB = 0.")

    product = data.ThetaSigmaTheta @ R_breve @ data.P

    # 2 Sym(X)_jk = X_jk + (X_kj)^T
    result = data.Block(product, j, k) + data.Block(product, k, j).T

    if mode == OptimizerMode.standard:
        result = result + data.Block(data.L, j, k)

    return result


# ----------------------------------------------------------------------
def Residuals(
    spec: NetworkSpec,
    model: AugmentedModel,
    task: MemoryTask,
    candidate: EdgeUnknowns,
    mode: OptimizerMode = OptimizerMode.standard,
) -> list[Mat]:
    """g_jk(R0_jk) + K_jk(R_breve_jk) for every edge, which is -1/16 of the gradient of Delta''(0)"""

    data = ObjectiveData.Create(model, task)

    return _ResidualBlocks(data, _FieldOnlyEnergyMatrix(spec), candidate, mode)


# ----------------------------------------------------------------------
def GradientOracle(
    spec: NetworkSpec,
    model: AugmentedModel,
    task: MemoryTask,
    candidate: EdgeUnknowns,
) -> GradientResult:
    Sigma = task.Sigma

    R = _InstallBlocks(_FieldOnlyEnergyMatrix(spec), model.state_ranges, candidate)
    A = 2.0 * model.Theta @ (R + model.M.T @ model.Jmat @ model.M)

    full = -4.0 * Sym(model.Theta @ Sigma @ (model.B @ model.B.T + 2.0 * A @ task.P))

    per_edge = [
        2.0 * full[slice(*model.state_ranges[j]), slice(*model.state_ranges[k])] for j, k in candidate.edges
    ]

    return GradientResult(per_edge, full)


# ----------------------------------------------------------------------
def Objective(
    model: AugmentedModel,
    task: MemoryTask,
    mode: OptimizerMode = OptimizerMode.standard,
) -> float:
    if mode == OptimizerMode.isolated:
        return IsolatedDeltaSecond(model, task)

    return DeltaDerivatives0(model, task)[1]


# ----------------------------------------------------------------------
def SolveGlobal(
    spec: NetworkSpec,
    model: AugmentedModel,
    task: MemoryTask,
    mode: OptimizerMode = OptimizerMode.standard,
) -> OptimizerReport:
    """Solves the optimality conditions of every edge at once"""

    data = ObjectiveData.Create(model, task)

    if mode == OptimizerMode.isolated and not data.is_isolating:
        raise ModeMismatchError("The isolated optimizer mode requires FB = 0.")

    objective_before = Objective(model, task, mode)
    initial = EdgeUnknowns.FromSpec(spec)

    if not spec.energy_edges:
        return OptimizerReport(
            solution=initial,
            optimized_spec=spec,
            per_edge_residual_norms=[],
            objective_before=objective_before,
            objective_after=objective_before,
            global_system_rcond=1.0,
            mode=mode,
            method=OptimizerMethod.global_,
        )

    field_only = _FieldOnlyEnergyMatrix(spec)

    # ----------------------------------------------------------------------
    def ResidualVector(
        x: Mat,
    ) -> Mat:
        blocks = _ResidualBlocks(data, field_only, EdgeUnknowns.FromVector(spec, x), mode)
        return np.vstack([Vec(block) for block in blocks])

    # ----------------------------------------------------------------------

    # The residual is affine in the stacked unknowns: evaluate it at unit vectors
    size = initial.size

    constant = ResidualVector(np.zeros((size, 1)))
    system = np.empty((size, size))

    for index in range(size):
        unit = np.zeros((size, 1))
        unit[index, 0] = 1.0

        system[:, index] = (ResidualVector(unit) - constant)[:, 0]

    non_unique = False

    try:
        solution = SolveLinear(system, -constant)

        x = solution.x
        rcond = solution.rcond

    except SingularMatrixError as ex:
        rcond = ex.rcond
        non_unique = True

        try:
            x = scipy.linalg.lstsq(system, -constant, cond=Common.RANK_TOL)[0]
        except (np.linalg.LinAlgError, ValueError) as lstsq_ex:
            raise OptimizationError(
                "The optimality system could not be solved.",
                {"rcond": rcond, "unknowns": size},
            ) from lstsq_ex

    if not np.all(np.isfinite(x)):
        raise OptimizationError(
            "The optimality system produced non-finite values.",
            {"rcond": rcond, "unknowns": size},
        )

    return _CreateReport(
        spec,
        task,
        data,
        field_only,
        EdgeUnknowns.FromVector(spec, x),
        objective_before=objective_before,
        rcond=rcond,
        mode=mode,
        method=OptimizerMethod.global_,
        non_unique=non_unique,
    )


# ----------------------------------------------------------------------
def SolveFixedPoint(
    spec: NetworkSpec,
    model: AugmentedModel,
    task: MemoryTask,
    mode: OptimizerMode = OptimizerMode.standard,
    sweeps: int = DEFAULT_MAX_SWEEPS,
    tol: float = DEFAULT_FIXED_POINT_TOL,
) -> OptimizerReport:
    """Gauss-Seidel sweeps that set each block to -g_jk^-1(K_jk(R_breve_jk)) in turn"""

    data = ObjectiveData.Create(model, task)

    if mode == OptimizerMode.isolated and not data.is_isolating:
        raise ModeMismatchError("The isolated optimizer mode requires FB = 0.")

    objective_before = Objective(model, task, mode)
    current = EdgeUnknowns.FromSpec(spec)

    # Factor each Q_jk once
    factorizations: list[tuple[Mat, Mat]] = []
    rcond = 1.0

    for j, k in current.edges:
        Q, _ = QMatrix(data, j, k)

        magnitudes = np.abs(scipy.linalg.eigvalsh(Q))
        smallest = float(magnitudes.min())
        largest = float(magnitudes.max())

        if largest == 0.0 or smallest <= 1e-10 * Common.FrobeniusNorm(Q):
            raise SingularMatrixError(
                smallest / largest if largest else 0.0,
                f"Q for energy edge '{j}'-'{k}'",
            )

        rcond = min(rcond, smallest / largest)
        factorizations.append(scipy.linalg.lu_factor(Q))

    field_only = _FieldOnlyEnergyMatrix(spec)

    blocks = list(current.blocks)
    R = _InstallBlocks(field_only, data.state_ranges, current)

    history: list[float] = []
    converged = not blocks

    for _ in range(sweeps):
        if converged:
            break

        max_update = 0.0

        for index, ((j, k), factorization) in enumerate(zip(current.edges, factorizations)):
            j_slice = slice(*data.state_ranges[j])
            k_slice = slice(*data.state_ranges[k])

            previous = blocks[index]

            R[j_slice, k_slice] -= previous
            R[k_slice, j_slice] -= previous.T

            K = KApply(data, j, k, R, mode)
            updated = Unvec(-scipy.linalg.lu_solve(factorization, Vec(K)), *previous.shape).copy()

            R[j_slice, k_slice] += updated
            R[k_slice, j_slice] += updated.T

            max_update = max(
                max_update,
                Common.FrobeniusNorm(updated - previous) / (1.0 + Common.FrobeniusNorm(updated)),
            )

            blocks[index] = updated

        history.append(max_update)
        converged = max_update <= tol

    if not converged:
        raise ConvergenceError(sweeps, EdgeUnknowns(current.edges, tuple(blocks)), history)

    return _CreateReport(
        spec,
        task,
        data,
        field_only,
        EdgeUnknowns(current.edges, tuple(blocks)),
        objective_before=objective_before,
        rcond=rcond,
        mode=mode,
        method=OptimizerMethod.fixed_point,
        iterations=len(history),
        residual_history=history,
    )


# ----------------------------------------------------------------------
def Optimize(
    spec: NetworkSpec,
    model: AugmentedModel,
    task: MemoryTask,
    method: OptimizerMethod = OptimizerMethod.global_,
    mode: OptimizerMode = OptimizerMode.standard,
    *,
    sweeps: int = DEFAULT_MAX_SWEEPS,
    tol: float = DEFAULT_FIXED_POINT_TOL,
) -> OptimizerReport:
    if method == OptimizerMethod.global_:
        return SolveGlobal(spec, model, task, mode)

    if method == OptimizerMethod.fixed_point:
        return SolveFixedPoint(spec, model, task, mode, sweeps, tol)

    assert False, method  # pragma: no cover


# ----------------------------------------------------------------------
# |
# |  Private Functions
# |
# ----------------------------------------------------------------------
def _FieldOnlyEnergyMatrix(
    spec: NetworkSpec,
) -> Mat:
    """Assembled R with every R0 block set to zero"""

    return Assemble(
        ReplaceEnergyEdges(spec, [np.zeros_like(edge.R0_jk) for edge in spec.energy_edges]),
    ).R


# ----------------------------------------------------------------------
def _InstallBlocks(
    field_only: Mat,
    state_ranges: dict[str, tuple[int, int]],
    unknowns: EdgeUnknowns,
    skip: Optional[int] = None,
) -> Mat:
    R = field_only.copy()

    for index, ((j, k), block) in enumerate(zip(unknowns.edges, unknowns.blocks)):
        if index == skip:
            continue

        j_slice = slice(*state_ranges[j])
        k_slice = slice(*state_ranges[k])

        R[j_slice, k_slice] += block
        R[k_slice, j_slice] += block.T

    return R


# ----------------------------------------------------------------------
def _ResidualBlocks(
    data: ObjectiveData,
    field_only: Mat,
    candidate: EdgeUnknowns,
    mode: OptimizerMode,
) -> list[Mat]:
    results: list[Mat] = []

    for index, ((j, k), block) in enumerate(zip(candidate.edges, candidate.blocks)):
        R_breve = _InstallBlocks(field_only, data.state_ranges, candidate, skip=index)

        results.append(GApply(data, j, k, block) + KApply(data, j, k, R_breve, mode))

    return results


# ----------------------------------------------------------------------
def _CreateReport(
    spec: NetworkSpec,
    task: MemoryTask,
    data: ObjectiveData,
    field_only: Mat,
    solution: EdgeUnknowns,
    *,
    objective_before: float,
    rcond: float,
    mode: OptimizerMode,
    method: OptimizerMethod,
    non_unique: bool = False,
    iterations: int = 0,
    residual_history: Optional[Iterable[float]] = None,
) -> OptimizerReport:
    optimized_spec = ReplaceEnergyEdges(spec, solution.blocks)
    optimized_model = Assemble(optimized_spec)

    residuals = _ResidualBlocks(data, field_only, solution, mode)

    return OptimizerReport(
        solution=solution,
        optimized_spec=optimized_spec,
        per_edge_residual_norms=[Common.FrobeniusNorm(residual) for residual in residuals],
        objective_before=objective_before,
        objective_after=Objective(optimized_model, task, mode),
        global_system_rcond=rcond,
        mode=mode,
        method=method,
        non_unique=non_unique,
        iterations=iterations,
        residual_history=list(residual_history or []),
    )
