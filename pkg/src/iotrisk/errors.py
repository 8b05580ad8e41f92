"""Exception and warning types shared by every module.

Each error carries the CLI exit code it maps to: 2 for input that cannot be
parsed, 3 for input that parses but violates an invariant, 4 for failures
during computation or I/O.
"""

from __future__ import annotations


class IoTRiskError(Exception):
    exit_code = 4

    def __init__(self, message: str, *, field: str | None = None, line: int | None = None):
        super().__init__(message)
        self.message = message
        self.field = field
        self.line = line

    def __str__(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.field:
            where.append(self.field)
        if where:
            return f"{', '.join(where)}: {self.message}"
        return self.message

    def record(self) -> dict:
        """Machine-readable form written to stderr by the CLI."""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "field": self.field,
            "line": self.line,
            "exit_code": self.exit_code,
        }


class ParseError(IoTRiskError):
    exit_code = 2


class ValidationError(IoTRiskError, ValueError):
    exit_code = 3


class DanglingReference(ValidationError):
    pass


class EmptyHistory(ValidationError):
    pass


class NoValuation(IoTRiskError, ValueError):
    pass


class ZeroControl(IoTRiskError, ValueError):
    pass


class OutOfRange(IoTRiskError, ValueError):
    pass


class TooManyAssets(IoTRiskError, ValueError):
    pass


class BadGrid(IoTRiskError, ValueError):
    pass


class WrongHorizon(IoTRiskError, ValueError):
    pass


class IoError(IoTRiskError):
    pass


class ClampWarning(UserWarning):
    """A micromort rate above 10^6 was clamped to probability 1."""


class InconsistentReduction(UserWarning):
    """per_capita_risk_reduction x population is not one statistical death."""
