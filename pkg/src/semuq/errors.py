"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SemuqError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SemuqError):
    """A record, file, or argument violated a data invariant."""


class DegenerateInputError(SemuqError):
    """Input carries no usable mass (empty samples, all-zero vector, zero total)."""


class ParameterError(SemuqError):
    """A parameter is out of range or inconsistent with its companions."""


class DegeneracyError(SemuqError):
    """The spectrum is too collapsed for a first-order perturbative treatment."""


class NumericalError(SemuqError):
    """A linear-algebra routine failed to converge."""


class TransportError(SemuqError):
    """The entailment service stayed unreachable through every configured attempt."""


class ProtocolError(SemuqError):
    """The entailment service answered with an unusable payload."""

    def __init__(self, message: str, raw_response: str | None = None):
        super().__init__(message)
        self.raw_response = raw_response


class UndefinedMetricError(SemuqError):
    """The requested metric has no defined value on the given labels."""


class PipelineStageError(SemuqError):
    """A named pipeline stage failed while scoring one question."""

    def __init__(self, stage: str, question_id: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed for question '{question_id}': {cause}")
        self.stage = stage
        self.question_id = question_id
        self.cause = cause


class ConvergenceWarning(UserWarning):
    """The optimizer hit its iteration cap before reaching the stopping tolerance."""
