# -*- coding: utf-8 -*-
"""
expdyn error hierarchy.

Every numerical failure derives from ExpDynError; the CLI maps it to exit
code 2. Contract violations also derive from ValueError (exit code 1).
"""
from typing import Any, Optional


class ExpDynError(RuntimeError):
    """Base class of numerical failures."""


class ConfigError(ValueError):
    """Malformed configuration file, unknown key or out-of-range value."""


class PreconditionViolation(ExpDynError, ValueError):
    """An operation was called outside its documented input contract."""


class EscapeRight(ExpDynError):
    """An orbit point lies right of the escape threshold."""

    def __init__(self, message: str, index: Optional[int] = None, point: Optional[complex] = None):
        super().__init__(message)
        self.index = index
        self.point = point


class NoConvergence(ExpDynError):
    """A Newton iteration did not reach its tolerance."""

    def __init__(self, message: str, steps: int = 0, residual: float = float("inf")):
        super().__init__(message)
        self.steps = steps
        self.residual = residual


class DerivativeOverflow(ExpDynError):
    """A derivative cocycle is too large to reconstruct as a complex number."""


class SingularDerivative(ExpDynError):
    """Newton met a vanishing derivative."""


class NotContractive(ExpDynError):
    """No disk in the radius schedule is mapped strictly into itself."""


class NoDeepLeftEntry(ExpDynError):
    """The singular orbit never lands deep enough in the left half-plane."""


class ContainmentFailed(ExpDynError):
    """The propagated trap ball is not contained in the initial ball."""


class NotRepelling(ExpDynError):
    """The cycle reached by the singular orbit is attracting or indifferent."""


class BelowModulusBound(ExpDynError):
    """|lambda| <= 1/e, where the unit disk is forward invariant."""


class VerificationFailed(ExpDynError):
    """Re-iteration of a certificate drifted beyond tolerance."""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class ZeroPoint(ExpDynError):
    """An orbit contains the point 0."""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class BranchViolation(ExpDynError):
    """A principal logarithm left the admissible branch strip."""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class DeviationBlowup(ExpDynError):
    """The shadowing orbit separated from the reference orbit."""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class CascadeStuck(ExpDynError):
    """No sample point of a grid square maps onto a full square further right."""

    def __init__(self, message: str, square: Any = None):
        super().__init__(message)
        self.square = square


class NoSuchN(ExpDynError):
    """No iterate within budget reaches the requested image diameter."""


class ReportError(ExpDynError):
    """A report cannot be serialized (NaN / infinity) or written."""
