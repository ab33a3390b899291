# ----------------------------------------------------------------------
# |
# |  Errors.py
# |
# |  David Brownell <db@DavidBrownell.com>
# |      2024-09-03 08:41:12
# |
# ----------------------------------------------------------------------
# |
# |  Copyright David Brownell 2024
# |  Distributed under the MIT License.
# |
# ----------------------------------------------------------------------
"""Exceptions raised by the library; each one knows the exit code the command line should use."""

from typing import Any, Optional, TYPE_CHECKING

if TYPE_CHECKING:
    from OscillatorMemory.NetworkModel import Violation  # pragma: no cover


# ----------------------------------------------------------------------
# |
# |  Public Types
# |
# ----------------------------------------------------------------------
EXIT_CODE_VALIDATION = 2
EXIT_CODE_NUMERICAL = 3
EXIT_CODE_IO = 4


# ----------------------------------------------------------------------
class OscillatorMemoryError(Exception):
    """Base class for all errors raised by this package"""

    exit_code = EXIT_CODE_NUMERICAL


# ----------------------------------------------------------------------
# |  Validation errors
class DimensionError(OscillatorMemoryError):
    """Non-square or non-conforming matrices"""

    exit_code = EXIT_CODE_VALIDATION


# ----------------------------------------------------------------------
class DomainError(OscillatorMemoryError):
    """A value lies outside of the domain of an operation"""

    exit_code = EXIT_CODE_VALIDATION


# ----------------------------------------------------------------------
class ValidationError(OscillatorMemoryError):
    """A network specification was rejected"""

    exit_code = EXIT_CODE_VALIDATION

    # ----------------------------------------------------------------------
    def __init__(
        self,
        violations: list["Violation"],
    ):
        assert violations

        super(ValidationError, self).__init__(
            "The network specification is not valid:\n{}".format(
                "\n".join("    - {}".format(violation) for violation in violations),
            ),
        )

        self.violations = violations


# ----------------------------------------------------------------------
class ConfigError(OscillatorMemoryError):
    """The configuration document does not match the schema"""

    exit_code = EXIT_CODE_VALIDATION


# ----------------------------------------------------------------------
class UnknownNodeError(OscillatorMemoryError):
    """A node id did not resolve"""

    exit_code = EXIT_CODE_VALIDATION

    # ----------------------------------------------------------------------
    def __init__(
        self,
        node_id: str,
    ):
        super(UnknownNodeError, self).__init__(f"'{node_id}' is not a valid node id.")
        self.node_id = node_id


# ----------------------------------------------------------------------
# |  Numerical errors
class SingularMatrixError(OscillatorMemoryError):
    """A linear system is numerically singular"""

    # ----------------------------------------------------------------------
    def __init__(
        self,
        rcond: float,
        context: Optional[str] = None,
    ):
        message = f"The matrix is numerically singular (rcond={rcond:.3e})"
        if context:
            message += f" [{context}]"

        super(SingularMatrixError, self).__init__(message + ".")

        self.rcond = rcond
        self.context = context


# ----------------------------------------------------------------------
class IsolatedRegimeError(OscillatorMemoryError):
    """FB = 0, so the linear-in-epsilon expansion does not apply"""

    # ----------------------------------------------------------------------
    def __init__(self):
        super(IsolatedRegimeError, self).__init__(
            "FB = 0: the selected variables are isolated from the input fields and the "
            "decoherence time grows as sqrt(eps); use the isolation analysis instead.",
        )


# ----------------------------------------------------------------------
class ModeMismatchError(OscillatorMemoryError):
    """The isolated optimizer mode was requested for a non-isolating F"""


# ----------------------------------------------------------------------
class InsufficientIsolationError(OscillatorMemoryError):
    """More isolating rows were requested than are available"""

    # ----------------------------------------------------------------------
    def __init__(
        self,
        requested: int,
        d: int,
    ):
        super(InsufficientIsolationError, self).__init__(
            f"{requested} isolating rows were requested, but the isolation dimension is {d}.",
        )

        self.requested = requested
        self.d = d


# ----------------------------------------------------------------------
class NotIsolatingError(OscillatorMemoryError):
    """F does not annihilate B"""

    # ----------------------------------------------------------------------
    def __init__(
        self,
        fb_norm: float,
    ):
        super(NotIsolatingError, self).__init__(f"F does not isolate the subnetwork (||FB||={fb_norm:.3e}).")
        self.fb_norm = fb_norm


# ----------------------------------------------------------------------
class DegenerateAsymptoticsError(OscillatorMemoryError):
    """G sqrt(P) = 0"""

    # ----------------------------------------------------------------------
    def __init__(self):
        super(DegenerateAsymptoticsError, self).__init__(
            "G sqrt(P) = 0: the deviation grows beyond quadratic order and the sqrt(eps) asymptotics are unavailable.",
        )


# ----------------------------------------------------------------------
class OptimizationError(OscillatorMemoryError):
    """Neither the direct nor the least-squares solve produced a solution"""

    # ----------------------------------------------------------------------
    def __init__(
        self,
        message: str,
        diagnostics: Optional[dict[str, Any]] = None,
    ):
        super(OptimizationError, self).__init__(message)
        self.diagnostics = diagnostics or {}


# ----------------------------------------------------------------------
class ConvergenceError(OscillatorMemoryError):
    """The fixed-point iteration did not converge"""

    # ----------------------------------------------------------------------
    def __init__(
        self,
        sweeps: int,
        last_iterate: Any,
        residual_history: list[float],
    ):
        super(ConvergenceError, self).__init__(
            "The fixed-point iteration did not converge in {} sweeps (last update {}).".format(
                sweeps,
                "{:.3e}".format(residual_history[-1]) if residual_history else "n/a",
            ),
        )

        self.sweeps = sweeps
        self.last_iterate = last_iterate
        self.residual_history = residual_history


# ----------------------------------------------------------------------
# |  I/O errors
class ConfigParseError(OscillatorMemoryError):
    """The configuration file could not be read or parsed"""

    exit_code = EXIT_CODE_IO

    # ----------------------------------------------------------------------
    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
    ):
        if line is not None:
            message = f"{message} (line {line}, column {column})"

        super(ConfigParseError, self).__init__(message)

        self.line = line
        self.column = column
