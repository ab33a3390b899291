# ----------------------------------------------------------------------
# |
# |  Common.py
# |
# |  David Brownell <db@DavidBrownell.com>
# |      2024-09-03 09:02:47
# |
# ----------------------------------------------------------------------
# |
# |  Copyright David Brownell 2024
# |  Distributed under the MIT License.
# |
# ----------------------------------------------------------------------
"""Tolerances and helpers shared by the numerical modules and the command line"""

import math

import numpy as np


# ----------------------------------------------------------------------
# |
# |  Public Types
# |
# ----------------------------------------------------------------------
# Relative tolerance for structural checks (orthonormality, DOD/DJD, symmetry of assembled blocks)
STRUCTURAL_TOL = 1e-10

# Relative symmetry tolerance for node energy matrices and symmetric eigenvalue inputs
SYMMETRY_TOL = 1e-12

# Singular values below RANK_TOL * sigma_max are treated as zero
RANK_TOL = 1e-10

# Reciprocal condition numbers below this value are singular
RCOND_MIN = 1e-14

# Mean-square values down to -CLAMP_TOL are roundoff
CLAMP_TOL = 1e-12

# Guard used to avoid divisions by zero in time-scale heuristics
ETA = 1e-12

# ||FB|| <= ISOLATION_TOL * ||F||_2 * ||B|| means F isolates the subnetwork; ||F||_2 = 1 for orthonormal rows
ISOLATION_TOL = 1e-10

# ||FB|| <= TAYLOR_TOL * ||F|| * ||B|| means the Taylor expansion of tau is unavailable
TAYLOR_TOL = 1e-12

BJ = np.array([[0.0, 1.0], [-1.0, 0.0]])
BJ.flags.writeable = False


# ----------------------------------------------------------------------
# |
# |  Public Functions
# |
# ----------------------------------------------------------------------
def FrobeniusNorm(
    value: np.ndarray,
) -> float:
    if value.size == 0:
        return 0.0

    return float(np.linalg.norm(value, "fro"))


# ----------------------------------------------------------------------
def IsIsolating(
    F: np.ndarray,
    B: np.ndarray,
    tol: float = ISOLATION_TOL,
) -> bool:
    """True if FB vanishes relative to the scale of B (measured against the spectral norm of F)"""

    if B.size == 0:
        return True

    if F.size == 0:
        return True

    return FrobeniusNorm(F @ B) <= tol * float(np.linalg.norm(F, 2)) * FrobeniusNorm(B)


# ----------------------------------------------------------------------
def MatToJson(
    value: np.ndarray,
) -> list[list[float]]:
    # float() strips numpy scalar types; json writes the shortest repr that round trips exactly
    return [[float(item) for item in row] for row in np.atleast_2d(value)]


# ----------------------------------------------------------------------
def FloatToJson(
    value: float | None,
) -> float | None:
    if value is None:
        return None

    value = float(value)

    # Infinity is not valid json
    if math.isinf(value) or math.isnan(value):
        return None

    return value


# ----------------------------------------------------------------------
def FormatCsvFloat(
    value: float,
) -> str:
    return format(float(value), ".17g")


# ----------------------------------------------------------------------
def RangeToJson(
    value: tuple[int, int],
) -> list[int]:
    return [value[0], value[1]]
