"""Exception types shared by the numerical modules, the controller and the CLI."""

from __future__ import annotations

from typing import Any, Mapping, Optional


class S2ContactError(Exception):
    """Base class for every error raised on purpose by this package."""


class PoleError(S2ContactError, ValueError):
    """Raised when a function is evaluated on (or numerically at) one of its poles."""

    def __init__(self, message: str, argument: Optional[float] = None) -> None:
        super().__init__(message)
        self.argument = argument


class DomainError(S2ContactError, ValueError):
    """Raised when an argument lies outside the domain of a conversion or formula."""


class AngularMomentumOverflowError(S2ContactError, OverflowError):
    """Raised when angular momenta exceed the precomputed factorial table."""


class InsufficientOrderError(S2ContactError, ValueError):
    """Raised when a quadrature order cannot integrate the requested integrand exactly."""


class EmptyBasisError(S2ContactError, ValueError):
    """Raised when a cutoff admits no coupled basis state."""


class ConvergenceError(S2ContactError, RuntimeError):
    """Raised when an extrapolation ladder fails its consistency check."""


class BracketError(S2ContactError, RuntimeError):
    """Raised when a root cannot be bracketed on the requested branch."""

    def __init__(
        self, message: str, diagnostics: Optional[Mapping[str, Any]] = None
    ) -> None:
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class SelectionRuleError(S2ContactError, ValueError):
    """Raised for spin/isospin channels that cannot feel the contact interaction."""


class SchemaError(S2ContactError, ValueError):
    """Raised when a halo system file or a fit report is malformed."""


class VersionMismatchError(S2ContactError, ValueError):
    """Raised when a fit report was produced from a different data-file version."""


class FitError(S2ContactError, RuntimeError):
    """Base class for failures while fitting (a, R) to measured levels."""


class NoBracketError(FitError):
    """Raised when the radius scan finds no sign change."""


class PoleCollisionError(FitError):
    """Raised when a level's x(E, R) runs into a pole of its band during a fit."""

    def __init__(self, message: str, radius: float) -> None:
        super().__init__(message)
        self.radius = radius


class TooManyFailuresError(FitError):
    """Raised when more than the tolerated share of Monte-Carlo samples fail."""

    def __init__(self, message: str, failures: int, samples: int) -> None:
        super().__init__(message)
        self.failures = failures
        self.samples = samples


__all__ = [
    "S2ContactError",
    "PoleError",
    "DomainError",
    "AngularMomentumOverflowError",
    "InsufficientOrderError",
    "EmptyBasisError",
    "ConvergenceError",
    "BracketError",
    "SelectionRuleError",
    "SchemaError",
    "VersionMismatchError",
    "FitError",
    "NoBracketError",
    "PoleCollisionError",
    "TooManyFailuresError",
]
