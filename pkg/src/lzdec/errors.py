"""Exception types shared across the package.

Every error that callers are expected to handle programmatically has its
own class so that the CLI can map them onto stable exit codes.
"""

from __future__ import annotations


class LzdecError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(LzdecError, ValueError):
    """A parameter, state, or configuration value is out of domain."""


class InvalidProfileError(InvalidInputError):
    """A bias profile is malformed or queried outside its domain."""


class UndefinedRotationError(InvalidInputError):
    """The gap-aligned rotation is undefined because the gap vanishes."""


class NonConvergenceError(LzdecError, RuntimeError):
    """The integrator exhausted its step budget.

    Carries the partial result (up to the last accepted step) in
    ``partial_result``.
    """

    def __init__(self, message: str, partial_result=None):
        super().__init__(message)
        self.partial_result = partial_result


class InstabilityError(LzdecError, RuntimeError):
    """The conserved/contracting norm grew beyond the allowed slack."""


class UnidentifiableFitError(LzdecError, RuntimeError):
    """The fit objective carries no usable information about gamma_d.

    Carries the diagnostics gathered before giving up in ``details``.
    """

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = details or {}


class ConfigError(InvalidInputError):
    """A run-configuration file is malformed."""
