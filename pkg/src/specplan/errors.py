"""Exception types shared across the package.

The CLI maps these onto exit codes, so new failure modes should reuse an
existing class (or subclass one) rather than raising bare exceptions.
"""

from __future__ import annotations


class SpecPlanError(Exception):
    """Base class for all errors raised by this package."""


class MissingInputError(SpecPlanError):
    """A mandatory profile file is absent from the input directory."""


class MalformedRowError(SpecPlanError):
    """A CSV row failed to parse; names the file, line and column."""

    def __init__(self, file: str, line: int, column: str, problem: str):
        self.file = file
        self.line = line
        self.column = column
        super().__init__(f"{file}:{line}: column {column}: {problem}")


class DuplicateKeyError(SpecPlanError):
    """Two records in one store share a key that must be unique."""


class IntegrityError(SpecPlanError):
    """Loaded data violates a store invariant (dangling reference etc.)."""


class NotFoundError(SpecPlanError, KeyError):
    """A lookup named a record the store does not contain."""

    def __str__(self) -> str:  # KeyError would repr() the message
        return self.args[0] if self.args else ""


class DomainError(SpecPlanError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class UndefinedCostError(DomainError):
    """Cost efficiency requested with a zero verifier price."""


class NoPowerDataError(SpecPlanError):
    """Energy requested for a variant that carries no power measurement."""


class InfeasibleObjectiveError(SpecPlanError):
    """No candidate configuration can satisfy the requested objective."""
