"""
Error hierarchy shared by the services, the CLI and the HTTP layer.

Each error carries the process exit code the CLI reports for it and the
status code the API answers with.
"""
from typing import Optional, Tuple

from pydantic import ValidationError


class MedsError(Exception):
    exit_code: int = 3
    http_status: int = 422

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ParameterError(MedsError):
    """A numeric argument is outside its admissible range."""


class ConfigurationError(MedsError):
    """An experiment or encoder configuration is inconsistent."""


class ShapeError(MedsError):
    """Two sequences or grids that must line up do not."""


class DomainError(MedsError):
    """An operation is undefined for the given value (e.g. zero norm)."""


class UnsupportedStartError(MedsError):
    """The input starts outside the modulo range."""


class BoundaryError(MedsError):
    """An index window reaches outside the available trigger times."""


class InsufficientDataError(MedsError):
    """Too few trigger times for the requested operation."""


class PreconditionError(MedsError):
    """A recovery precondition does not hold."""


class DensityViolationError(PreconditionError):
    def __init__(self, max_gap: float, limit: float):
        super().__init__(
            f"trigger density too low: max gap {max_gap:.6g} s exceeds pi/Omega = {limit:.6g} s"
        )
        self.max_gap = max_gap
        self.limit = limit


class DivergenceError(MedsError):
    """The reconstruction iteration is not a contraction for these parameters."""


class DetectionFailureError(MedsError):
    exit_code = 2
    http_status = 409

    def __init__(self, message: str, pair: Optional[Tuple[int, int]] = None):
        super().__init__(message)
        self.pair = pair


class IngestionError(MedsError):
    exit_code = 4
    http_status = 400


def build_model(model_cls, **data):
    """Construct a pydantic model, reporting invalid input as ParameterError."""
    try:
        return model_cls(**data)
    except ValidationError as e:
        details = "; ".join(err["msg"] for err in e.errors())
        raise ParameterError(f"invalid {model_cls.__name__}: {details}") from e
