"""Exception hierarchy shared by the library and the command line.

Every error carries an ``exit_code`` used by the CLI and a ``details`` dict
that is merged into the JSON error document written to stderr.
"""

from __future__ import annotations

from typing import Any


class ScenarioRiskError(Exception):
    exit_code = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict[str, Any]:
        payload = {
            "error": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
        }
        payload.update({k: _jsonable(v) for k, v in self.details.items()})
        return payload


class InvalidInputError(ScenarioRiskError, ValueError):
    exit_code = 2


class NotFoundError(ScenarioRiskError, LookupError):
    exit_code = 2

    def __str__(self) -> str:
        # LookupError would otherwise repr() the message
        return self.message


class AxiomViolationError(ScenarioRiskError):
    exit_code = 1


class CapExceededError(ScenarioRiskError):
    exit_code = 3


class DegenerateDenominatorError(ScenarioRiskError):
    exit_code = 1


class InsufficientDataError(ScenarioRiskError):
    exit_code = 4


class AlignmentError(ScenarioRiskError):
    exit_code = 5


class DataFormatError(ScenarioRiskError):
    exit_code = 4


class CsvParseError(DataFormatError):
    pass


class DuplicateDateError(DataFormatError):
    pass


class NonPositivePriceError(DataFormatError):
    pass


def _jsonable(value: Any) -> Any:
    if hasattr(value, "isoformat"):
        return value.isoformat()
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value
