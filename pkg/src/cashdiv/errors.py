"""Exception hierarchy shared by the pricing modules."""

from __future__ import annotations


class PricingError(Exception):
    """Base class for every error raised by :mod:`cashdiv`."""


class DomainError(PricingError, ValueError):
    """An input lies outside the domain of the requested operation."""


class CapabilityError(PricingError, NotImplementedError):
    """The request asks for an order or feature that is not implemented."""


class NumericalDegeneracyError(PricingError, ArithmeticError):
    """A ratio denominator underflowed (option is effectively a forward or worthless)."""


class AdjustmentOverflowError(PricingError, ArithmeticError):
    """Adjusted spot or strike became non-positive: dividends too large for the proxy."""


class FitError(PricingError, ArithmeticError):
    """Moment matching has no solution in the shifted-lognormal family."""


class FormulaBreakdownError(PricingError, ArithmeticError):
    """A closed-form approximation produced an invalid quantity (e.g. negative variance)."""
