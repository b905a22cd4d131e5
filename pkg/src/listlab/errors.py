"""Exception types shared across the package.

The CLI maps these onto exit codes: invalid input -> 2, budget exceeded -> 3,
verification failure -> 4.
"""

from __future__ import annotations

from typing import Any


class InvalidArgument(ValueError):
    """Malformed input or a precondition the caller is responsible for."""


class PreconditionViolation(InvalidArgument):
    """An instance lies outside the hypotheses an operation needs.

    ``violations`` lists every failed condition, not just the first.
    """

    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = list(violations or [])


class ResourceLimit(RuntimeError):
    """A configured search budget was exhausted before a verdict was reached."""

    def __init__(self, message: str, stats: dict[str, Any] | None = None):
        super().__init__(message)
        self.stats = dict(stats or {})


class InternalInconsistency(RuntimeError):
    """A property guaranteed by the underlying theory failed at runtime."""

    def __init__(self, message: str, state: dict[str, Any] | None = None):
        super().__init__(message)
        self.state = dict(state or {})


class VerificationFailure(RuntimeError):
    """A produced or supplied certificate did not check out."""


class StageFailure(RuntimeError):
    """A pipeline stage could not proceed and exact fallback was disabled."""

    def __init__(self, stage: str, message: str, details: dict[str, Any] | None = None):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.details = dict(details or {})
