"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class GmolError(Exception):
    """Base class for all package errors."""


class DomainError(GmolError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class AccuracyError(GmolError, ArithmeticError):
    """A series or iteration could not reach the requested accuracy."""


class EvaluationError(GmolError, ArithmeticError):
    """An objective or intermediate quantity was non-finite."""


class RangeError(GmolError, ArithmeticError):
    """A result under- or overflowed the representable range."""


class MomentError(DomainError):
    """The requested moment does not exist for the given shape."""


class InitializationError(GmolError, RuntimeError):
    """The optimizer could not find a finite starting simplex."""


class OptimizerError(GmolError, RuntimeError):
    """The optimizer failed; carries diagnostic details."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class DegenerateComparisonError(GmolError, ArithmeticError):
    """Per-observation log-likelihood differences have zero spread."""


class DesignError(GmolError, ValueError):
    """A censored regression design cannot identify its coefficients."""


class CalibrationError(GmolError, RuntimeError):
    """Bisection for the censoring bound could not bracket the target."""
