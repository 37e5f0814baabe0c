"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class PlecticaError(Exception):
    """Base class for library errors."""


class SpecMismatch(PlecticaError, ValueError):
    """Operands live over different ring specifications."""


class NotAUnit(PlecticaError, ArithmeticError):
    """Inversion requested for an element that is not a unit."""


class NotComposable(PlecticaError, ValueError):
    """An inner series of a composition has a nonzero constant term."""


class InsufficientPrecision(PlecticaError, ArithmeticError):
    """The requested result cannot be certified at the working precision."""


class PrecisionOverflow(PlecticaError, ValueError):
    """The modulus needed for a computation does not fit machine integers."""


class TruncationLoss(PlecticaError, ArithmeticError):
    """A known term falls outside the representable exponent window."""

    def __init__(self, message: str, exponent: tuple[int, ...] | None = None):
        super().__init__(message)
        self.exponent = exponent


class NotEtale(PlecticaError, ValueError):
    """A structure matrix is not invertible at the stored truncation."""


class Inconclusive(PlecticaError, RuntimeError):
    """A bounded search ended before it could certify its answer."""


class PreconditionFailed(PlecticaError, ValueError):
    """Input data violates a documented precondition."""


class Unsupported(PlecticaError, ValueError):
    """The input lies outside the symbolically decidable fragment."""


class NotIntegral(PlecticaError, ValueError):
    """A negative exponent appeared where only integral elements are allowed."""
