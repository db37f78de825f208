# gelfand/errors.py
"""
Exception hierarchy.

All domain failures derive from GelfandError, itself a ValueError, so callers
that only care about "bad input" can keep catching ValueError.
Property checks never raise on a failed property; they return report dicts.
"""

from typing import List, Optional


class GelfandError(ValueError):
    """Base class for every error raised by the toolkit."""


class IndexSetMismatch(GelfandError):
    """Operands live over different index sets or dimensions."""


class EmptyVector(GelfandError):
    """An operation needs a vector with nonempty support."""


class ParseError(GelfandError):
    """Malformed JSON input (vectors, operators, configs)."""


class InvalidInterval(GelfandError):
    """Interval with a >= b, negative endpoints, or an unusable cut set."""


class InvalidRange(GelfandError):
    """Index range with m > n or m < 1."""


class InvalidExponent(GelfandError):
    """Lebesgue exponent outside (1, inf)."""


class NotSelfAdjoint(GelfandError):
    """Operator or form fails the Hermitian check."""


class NotInjective(GelfandError):
    """Spectrum touches zero: the operator has a kernel.

    A self-adjoint operator has dense range exactly when it is injective, and
    ker G splits off as an orthogonal summand; restrict to cl(ran G) first if
    that is intended.
    """


class NotInvertible(GelfandError):
    """A matrix that must be invertible is numerically singular."""


class EigenResidualError(GelfandError):
    """The eigensolver returned pairs violating the residual bound."""


class ComponentLeak(GelfandError):
    """A vector handed to one spectral component has mass in the other."""


class SelectionExhausted(GelfandError):
    """Greedy Cesaro selection ran out of candidates before N picks."""

    def __init__(self, message: str, partial: Optional[List[int]] = None):
        super().__init__(message)
        self.partial = list(partial or [])


class ConfigError(GelfandError):
    """Unknown suite names or unusable verification config."""
