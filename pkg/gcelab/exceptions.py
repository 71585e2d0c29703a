"""Error hierarchy shared by the library and the command line"""

from typing import Optional


class GceLabError(Exception):
    """Base class for every error raised by gcelab."""

    exit_code: int = 1


class InputError(GceLabError, ValueError):
    """Malformed or unsupported input (exit code 2)."""

    exit_code = 2


class FrameMismatchError(InputError):
    pass


class DegreeUnderflowError(InputError):
    pass


class DegreeUnsupportedError(InputError):
    pass


class UnsupportedValenceError(InputError):
    pass


class UnsupportedDimensionError(InputError):
    pass


class FrameParseError(InputError):
    pass


class UnknownModelError(InputError):
    pass


class InvalidParameterError(InputError):
    pass


class InvalidConformalFactorError(InputError):
    pass


class ConfigurationError(InputError):
    pass


class InvariantViolationError(GceLabError, ValueError):
    """A structure failed one of its defining invariants (exit code 3)."""

    exit_code = 3

    def __init__(self, invariant: str, residual: Optional[float] = None, detail: str = ""):
        self.invariant = invariant
        self.residual = residual
        message = f"invariant '{invariant}' violated"
        if residual is not None:
            message += f" (residual {residual:.3e})"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class InvalidSasakianError(InvariantViolationError):
    pass


class NoCharacteristicConnectionError(GceLabError):
    pass


class PreconditionViolationError(GceLabError):
    pass


class NoLeeDirectionError(GceLabError):
    pass


class DecompositionFailureError(GceLabError):
    pass


class InvalidModificationError(GceLabError, ValueError):
    pass
