# ----------------------------------------------------------------------
# |
# |  Isolation.py
# |
# |  David Brownell <db@DavidBrownell.com>
# |      2024-09-05 13:48:02
# |
# ----------------------------------------------------------------------
# |
# |  Copyright David Brownell 2024
# |  Distributed under the MIT License.
# |
# ----------------------------------------------------------------------
"""\
Partially isolated subnetworks.

When FB = 0, the variables phi = FX are not driven by the input fields directly; they only feel
them through the complementary variables psi = TX. phi then evolves as a noise-free linear ODE with
coefficient G = 2 F Theta R and the decoherence time scales as sqrt(eps) instead of eps.
"""

import math

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
import scipy.linalg

from OscillatorMemory.Errors import (
    DegenerateAsymptoticsError,
    DimensionError,
    DomainError,
    InsufficientIsolationError,
    ModeMismatchError,
    NotIsolatingError,
    SingularMatrixError,
)
from OscillatorMemory.Impl import Common
from OscillatorMemory.MatKernel import Antisym, LeftNullspace, Mat, NumericalRank, ToMat
from OscillatorMemory.MemoryMetrics import MemoryTask
from OscillatorMemory.NetworkModel import AugmentedModel


# ----------------------------------------------------------------------
# |
# |  Public Types
# |
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class IsolationResult:
    """Coordinates S = [F; T] that split the network into phi = FX and psi = TX"""

    d: int
    F: Mat  # s x n
    T: Mat  # (n - s) x n
    S: Mat  # n x n

    # S A S^-1 = [[a11, a12], [a21, a22]]
    a11: Mat
    a12: Mat
    a21: Mat
    a22: Mat

    b: Mat  # T B
    G: Mat  # 2 F Theta R

    fb_norm: float
    phidot_residual: float  # ||F A - G||
    per_node_fb01: dict[str, float]  # ||sum_j F_j Theta_j M_kj^T|| for each node k

    # ----------------------------------------------------------------------
    @property
    def s(self) -> int:
        return self.F.shape[0]


# ----------------------------------------------------------------------
# |
# |  Public Functions
# |
# ----------------------------------------------------------------------
def IsolationDim(
    model: AugmentedModel,
) -> int:
    return model.n - NumericalRank(model.M)


# ----------------------------------------------------------------------
def IsolatingF(
    model: AugmentedModel,
    s: Optional[int] = None,
) -> Mat:
    """Returns s orthonormal rows spanning part of the left null space of B"""

    d = IsolationDim(model)

    if s is None:
        s = d

    if s < 1:
        if d == 0:
            raise InsufficientIsolationError(1, d)

        raise DomainError(f"At least one isolating row must be requested ({s}).")

    if s > d:
        raise InsufficientIsolationError(s, d)

    nullspace = LeftNullspace(model.B)

    if nullspace.shape[0] < s:
        raise InsufficientIsolationError(s, nullspace.shape[0])

    if s == nullspace.shape[0]:
        return nullspace

    return _OrderByNoncommutativity(nullspace, model.Theta)[:s].copy()


# ----------------------------------------------------------------------
def GMatrix(
    model: AugmentedModel,
    F: Mat,
) -> Mat:
    """G = 2 F Theta R, the drift of phi = FX when FB = 0"""

    return 2.0 * F @ model.Theta @ model.R


# ----------------------------------------------------------------------
def Decompose(
    model: AugmentedModel,
    F: Iterable,
) -> IsolationResult:
    F = ToMat(F, "F")

    if F.shape[1] != model.n:
        raise DimensionError(f"F must have {model.n} columns ({F.shape[1]}).")

    fb = F @ model.B
    fb_norm = Common.FrobeniusNorm(fb)

    if not Common.IsIsolating(F, model.B):
        raise NotIsolatingError(fb_norm)

    # Orthonormal rows orthogonal to the rows of F
    T = scipy.linalg.null_space(F).T
    S = np.vstack([F, T])

    if S.shape != (model.n, model.n):
        raise DimensionError(f"F must have full row rank (S is {S.shape[0]}x{S.shape[1]}).")

    rcond = 1.0 / float(np.linalg.cond(S))
    if not math.isfinite(rcond) or rcond < 1e-12:
        raise SingularMatrixError(rcond, "S = [F; T]")

    if Common.FrobeniusNorm(S @ S.T - np.eye(model.n)) <= Common.STRUCTURAL_TOL:
        S_inv = S.T
    else:
        S_inv = scipy.linalg.inv(S)

    a = S @ model.A @ S_inv
    s = F.shape[0]

    G = GMatrix(model, F)

    per_node_fb01 = {
        node_id: 0.5 * Common.FrobeniusNorm(fb[:, model.FieldSlice(node_id)]) for node_id in model.node_ids
    }

    return IsolationResult(
        d=IsolationDim(model),
        F=F,
        T=T,
        S=S,
        a11=a[:s, :s],
        a12=a[:s, s:],
        a21=a[s:, :s],
        a22=a[s:, s:],
        b=T @ model.B,
        G=G,
        fb_norm=fb_norm,
        phidot_residual=Common.FrobeniusNorm(F @ model.A - G),
        per_node_fb01=per_node_fb01,
    )


# ----------------------------------------------------------------------
def TauSqrt(
    F: Mat,
    G: Mat,
    P: Mat,
    eps: float,
) -> float:
    """tau(eps) ~ ||F sqrt(P)|| / ||G sqrt(P)|| sqrt(eps) as eps -> 0"""

    if not math.isfinite(eps) or eps <= 0.0:
        raise DomainError(f"The fidelity level must be positive ({eps}).")

    f_squared = float(np.trace(F @ P @ F.T))
    if f_squared <= 0.0:
        raise DomainError("F sqrt(P) must be nonzero.")

    g_squared = float(np.trace(G @ P @ G.T))
    if g_squared <= Common.CLAMP_TOL * Common.FrobeniusNorm(G) ** 2 * Common.FrobeniusNorm(P):
        raise DegenerateAsymptoticsError()

    return math.sqrt(f_squared / g_squared) * math.sqrt(eps)


# ----------------------------------------------------------------------
def TauSqrtFromModel(
    model: AugmentedModel,
    task: MemoryTask,
    eps: float,
) -> float:
    _EnsureIsolating(model, task.F)

    return TauSqrt(task.F, GMatrix(model, task.F), task.P, eps)


# ----------------------------------------------------------------------
def IsolatedDeltaSecond(
    model: AugmentedModel,
    task: MemoryTask,
) -> float:
    """Delta''(0) = 2 ||G sqrt(P)||^2 for an isolating F"""

    _EnsureIsolating(model, task.F)

    G = GMatrix(model, task.F)
    return 2.0 * float(np.trace(G @ task.P @ G.T))


# ----------------------------------------------------------------------
def IsolatedObjective(
    model: AugmentedModel,
    F: Mat,
    P: Mat,
) -> float:
    """1/2 ||F Theta R sqrt(P)||^2, which is Delta''(0) / 16 when FB = 0"""

    F_Theta_R = F @ model.Theta @ model.R
    return 0.5 * float(np.trace(F_Theta_R @ P @ F_Theta_R.T))


# ----------------------------------------------------------------------
# |
# |  Private Functions
# |
# ----------------------------------------------------------------------
def _EnsureIsolating(
    model: AugmentedModel,
    F: Mat,
) -> None:
    if not Common.IsIsolating(F, model.B):
        raise ModeMismatchError(
            "The isolated regime requires FB = 0 (||FB||={:.3e}).".format(Common.FrobeniusNorm(F @ model.B)),
        )


# ----------------------------------------------------------------------
def _OrderByNoncommutativity(
    nullspace: Mat,
    Theta: Mat,
) -> Mat:
    """\
    Rotates the null space rows into conjugate pairs (f, g) with f Theta g^T = omega, ordered by
    descending omega; directions that commute with all others come last.
    """

    C = Antisym(nullspace @ Theta @ nullspace.T)
    scale = Common.FrobeniusNorm(C)

    if scale <= Common.TAYLOR_TOL * Common.FrobeniusNorm(Theta):
        return nullspace

    # C = Z T Z^T with T block diagonal, so the rows of Z^T N have Gram matrix T
    T, Z = scipy.linalg.schur(C, output="real")
    rotated = Z.T @ nullspace

    blocks: list[tuple[float, list[int]]] = []

    index = 0
    while index < C.shape[0]:
        if index + 1 < C.shape[0] and abs(T[index + 1, index]) > Common.STRUCTURAL_TOL * scale:
            blocks.append((math.sqrt(abs(T[index, index + 1] * T[index + 1, index])), [index, index + 1]))
            index += 2
        else:
            blocks.append((0.0, [index]))
            index += 1

    # Stable sort; contributions equal to within tolerance keep their Schur order
    tie_width = Common.STRUCTURAL_TOL * scale
    blocks.sort(key=lambda block: -math.floor(block[0] / tie_width))

    return rotated[[row for _, rows in blocks for row in rows]]
