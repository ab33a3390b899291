# ----------------------------------------------------------------------
# |
# |  MatKernel.py
# |
# |  David Brownell <db@DavidBrownell.com>
# |      2024-09-03 09:30:55
# |
# ----------------------------------------------------------------------
# |
# |  Copyright David Brownell 2024
# |  Distributed under the MIT License.
# |
# ----------------------------------------------------------------------
"""\
Dense real linear algebra used by the rest of the package.

Complex quantities are never stored natively; they are carried as (real, imaginary) pairs of
real matrices.
"""

import math
import warnings

from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional

import numpy as np
import numpy.typing as npt
import scipy.linalg

from OscillatorMemory.Errors import DimensionError, DomainError, SingularMatrixError
from OscillatorMemory.Impl import Common


# ----------------------------------------------------------------------
# |
# |  Public Types
# |
# ----------------------------------------------------------------------
Mat = npt.NDArray[np.float64]


# ----------------------------------------------------------------------
class GramianMethod(str, Enum):
    """Algorithm used to compute finite-horizon Gramians"""

    vanloan = "vanloan"  # Block matrix exponential
    ode = "ode"  # Fixed-step RK4 integration of the Lyapunov ODE


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class LinearSolution:
    """Solution of a square linear system along with its reciprocal condition estimate"""

    x: Mat
    rcond: float


# ----------------------------------------------------------------------
# |
# |  Public Functions
# |
# ----------------------------------------------------------------------
def ToMat(
    values: Any,
    name: str = "matrix",
    *,
    allow_empty: bool = False,
) -> Mat:
    """Creates a 2-D float64 matrix, validating its dimensions and entries"""

    try:
        result = np.array(values, dtype=np.float64)
    except (TypeError, ValueError) as ex:
        raise DimensionError(f"The {name} is not a rectangular numeric matrix.") from ex

    if result.ndim != 2:
        raise DimensionError(f"The {name} must be 2-dimensional (ndim={result.ndim}).")

    if not allow_empty and 0 in result.shape:
        raise DimensionError(f"The {name} must not be empty (shape={result.shape}).")

    if not np.all(np.isfinite(result)):
        raise DomainError(f"The {name} contains non-finite values.")

    return result


# ----------------------------------------------------------------------
def Sym(
    M: Mat,
) -> Mat:
    _EnsureSquare(M)
    return (M + M.T) / 2.0


# ----------------------------------------------------------------------
def Antisym(
    M: Mat,
) -> Mat:
    _EnsureSquare(M)
    return (M - M.T) / 2.0


# ----------------------------------------------------------------------
def Kron(
    A: Mat,
    B: Mat,
) -> Mat:
    return np.kron(A, B)


# ----------------------------------------------------------------------
def Vec(
    M: Mat,
) -> Mat:
    """Stacks the columns of M into a single column"""

    return M.reshape(-1, 1, order="F")


# ----------------------------------------------------------------------
def Unvec(
    v: Mat,
    rows: int,
    cols: int,
) -> Mat:
    """Inverse of Vec"""

    if v.size != rows * cols:
        raise DimensionError(f"A vector of size {v.size} cannot be reshaped to {rows}x{cols}.")

    return v.reshape(rows, cols, order="F")


# ----------------------------------------------------------------------
def CommutationMatrix(
    p: int,
    q: int,
) -> Mat:
    """Permutation matrix T with T @ Vec(N) == Vec(N.T) for every p x q matrix N"""

    if p < 1 or q < 1:
        raise DimensionError(f"Invalid commutation matrix dimensions ({p}, {q}).")

    # positions[i, j] is the index of N[i, j] within Vec(N)
    positions = np.arange(p * q).reshape(p, q, order="F")

    return np.eye(p * q)[positions.T.reshape(-1, order="F")]


# ----------------------------------------------------------------------
def Expm(
    A: Mat,
) -> Mat:
    _EnsureSquare(A)
    return scipy.linalg.expm(A)


# ----------------------------------------------------------------------
def Gramian(
    A: Mat,
    Q: Mat,
    t: float,
    method: GramianMethod = GramianMethod.vanloan,
    *,
    steps: Optional[int] = None,
) -> Mat:
    """Returns the integral of expm(sA) Q expm(sA^T) for s in [0, t]"""

    _EnsureSquare(A)
    _EnsureSquare(Q)

    if A.shape != Q.shape:
        raise DimensionError(f"The drift {A.shape} and weight {Q.shape} matrices do not conform.")

    if t < 0:
        raise DomainError(f"The time horizon must be nonnegative ({t}).")

    if t == 0:
        return np.zeros_like(Q)

    if method == GramianMethod.vanloan:
        return _GramianVanLoan(A, Q, t)

    if method == GramianMethod.ode:
        return _GramianRk4(A, Q, t, steps)

    assert False, method  # pragma: no cover


# ----------------------------------------------------------------------
def NumericalRank(
    M: Mat,
    tol: float = Common.RANK_TOL,
) -> int:
    if M.size == 0:
        return 0

    singular_values = scipy.linalg.svd(M, compute_uv=False)

    if singular_values[0] == 0.0:
        return 0

    return int(np.sum(singular_values > tol * singular_values[0]))


# ----------------------------------------------------------------------
def LeftNullspace(
    B: Mat,
    tol: float = Common.RANK_TOL,
) -> Mat:
    """Returns a matrix whose orthonormal rows span {v : v B = 0}"""

    rows, cols = B.shape

    if rows == 0 or cols == 0:
        return np.eye(rows)

    U, singular_values, _ = scipy.linalg.svd(B, full_matrices=True)

    if singular_values[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(singular_values > tol * singular_values[0]))

    return U[:, rank:].T.copy()


# ----------------------------------------------------------------------
def SolveLinear(
    A: Mat,
    b: Mat,
) -> LinearSolution:
    """Solves Ax = b with pivoted LU; raises if A is numerically singular"""

    _EnsureSquare(A)

    if b.shape[0] != A.shape[0]:
        raise DimensionError(f"The right-hand side {b.shape} does not conform to {A.shape}.")

    with warnings.catch_warnings():
        # Singularity is reported through rcond
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, pivots = scipy.linalg.lu_factor(A)

    anorm = float(np.linalg.norm(A, 1))
    if anorm == 0.0:
        rcond = 0.0
    else:
        rcond, info = scipy.linalg.lapack.dgecon(lu, anorm, norm="1")
        rcond = float(rcond) if info == 0 else 0.0

    if not math.isfinite(rcond) or rcond < Common.RCOND_MIN:
        raise SingularMatrixError(rcond)

    return LinearSolution(scipy.linalg.lu_solve((lu, pivots), b), rcond)


# ----------------------------------------------------------------------
def MinSymmetricEigenvalue(
    S: Mat,
) -> float:
    _EnsureSquare(S)

    if Common.FrobeniusNorm(S - S.T) > Common.SYMMETRY_TOL * Common.FrobeniusNorm(S):
        raise DomainError("The matrix is not symmetric.")

    return float(scipy.linalg.eigvalsh(Sym(S), subset_by_index=[0, 0])[0])


# ----------------------------------------------------------------------
def HermitianEmbedding(
    real: Mat,
    imag: Mat,
) -> Mat:
    """Real symmetric matrix with the same spectrum (doubled) as the Hermitian matrix real + i imag"""

    return np.block([[real, -imag], [imag, real]])


# ----------------------------------------------------------------------
# |
# |  Private Functions
# |
# ----------------------------------------------------------------------
def _EnsureSquare(
    M: Mat,
) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"A square matrix is required (shape={M.shape}).")


# ----------------------------------------------------------------------
def _GramianVanLoan(
    A: Mat,
    Q: Mat,
    t: float,
) -> Mat:
    n = A.shape[0]

    # expm(-h A^T) grows quickly for stable A, so exponentiate over a short horizon and double
    doublings = max(0, math.ceil(math.log2(max(t * Common.FrobeniusNorm(A), 1.0))))
    h = t / (2**doublings)

    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = A
    block[:n, n:] = Q
    block[n:, n:] = -A.T

    exponential = scipy.linalg.expm(h * block)

    transition = exponential[:n, :n]
    result = exponential[:n, n:] @ transition.T

    # Gramian(2h) = Gramian(h) + expm(hA) Gramian(h) expm(hA)^T
    for _ in range(doublings):
        result = result + transition @ result @ transition.T
        transition = transition @ transition

    return result


# ----------------------------------------------------------------------
def _GramianRk4(
    A: Mat,
    Q: Mat,
    t: float,
    steps: Optional[int],
) -> Mat:
    if steps is None:
        # Keeps h * ||X -> AX + XA^T|| at or below 0.005
        steps = max(64, math.ceil(400.0 * t * Common.FrobeniusNorm(A)))

    h = t / steps
    AT = A.T

    # ----------------------------------------------------------------------
    def Derivative(
        X: Mat,
    ) -> Mat:
        return A @ X + X @ AT + Q

    # ----------------------------------------------------------------------

    X = np.zeros_like(Q)

    for _ in range(steps):
        k1 = Derivative(X)
        k2 = Derivative(X + (h / 2.0) * k1)
        k3 = Derivative(X + (h / 2.0) * k2)
        k4 = Derivative(X + h * k3)

        X = X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    return X
