"""Exception types shared across the package."""

from __future__ import annotations


class NormkitError(Exception):
    """Base class for all errors raised by this package."""


class IntervalError(NormkitError, ValueError):
    """Belief interval bounds outside 0 <= alpha <= beta <= 1."""


class TotalConflictError(NormkitError):
    """Dempster combination of flatly contradictory beliefs."""


class ParseError(NormkitError):
    """Syntax or load-time validation failure, annotated with a position."""

    def __init__(self, message: str, line: int | None = None,
                 column: int | None = None, path: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.path = path
        super().__init__(str(self))

    def __str__(self) -> str:
        prefix = []
        if self.path is not None:
            prefix.append(str(self.path))
        if self.line is not None:
            prefix.append(str(self.line))
            if self.column is not None:
                prefix.append(str(self.column))
        if prefix:
            return ":".join(prefix) + ": " + self.message
        return self.message


class ValidationError(NormkitError):
    """A programmatically built value violates a structural invariant."""


class UnknownGoalError(NormkitError):
    """No decomposition template matches the submitted goal."""


class ResolutionError(NormkitError):
    """An action step could not be grounded against the scene."""


class EncodingError(NormkitError):
    """A scenario cannot be encoded as a description group."""


class MoralRejectionError(NormkitError):
    """Every reachable script variant resembles a norm violation most.

    Carries the least-objectionable scenario found during the search and
    the name of the precedent that blocked it.
    """

    def __init__(self, message: str, scenario=None, precedent: str | None = None):
        super().__init__(message)
        self.scenario = scenario
        self.precedent = precedent


class NoPrecedentError(MoralRejectionError):
    """Strict policy: an empty case library cannot certify any scenario."""
