"""Error hierarchy. Each class carries the CLI exit code it maps to."""

from __future__ import annotations


class HyperEtaError(Exception):
    exit_code = 1


class ConversionError(HyperEtaError):
    exit_code = 10

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message if residual is None else f"{message} (residual {residual:.3e})")
        self.residual = residual


class NotLoxodromicError(HyperEtaError):
    exit_code = 11


class DistanceError(HyperEtaError):
    exit_code = 12


class ReductionError(HyperEtaError):
    """No distance-decreasing face pairing, or the final word check failed."""

    exit_code = 20


class DivergenceError(HyperEtaError):
    exit_code = 21


class DataError(HyperEtaError):
    exit_code = 30


class NoSpinStructureError(HyperEtaError):
    exit_code = 31


class PositiveB1Error(HyperEtaError):
    exit_code = 32


class AdmissibilityError(HyperEtaError):
    exit_code = 40


class UnsupportedError(HyperEtaError):
    exit_code = 41


class MissingSignError(HyperEtaError):
    exit_code = 42


class AssumptionError(HyperEtaError):
    exit_code = 43


class InvalidRangeError(HyperEtaError):
    exit_code = 44


class InconclusiveError(HyperEtaError):
    exit_code = 50


class AmbiguousError(HyperEtaError):
    exit_code = 51


class PresentationError(HyperEtaError):
    exit_code = 60


class ParseError(HyperEtaError):
    exit_code = 70

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.field = field


class ValidationError(HyperEtaError):
    exit_code = 71
