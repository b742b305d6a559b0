"""Closed-form Black-Scholes primitives.

Prices and partial derivatives in spot and strike for European options on a
non-dividend-paying stock with flat rate and volatility. Every function accepts
scalars or numpy arrays for ``spot`` and ``strike``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import ndtr

from .errors import CapabilityError, DomainError

OptionKind = Literal["call", "put"]

MAX_SPOT_ORDER = 4
MAX_STRIKE_ORDER = 2
MAX_TOTAL_ORDER = 4

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def norm_cdf(x):
    """Standard normal CDF (Cephes ``ndtr``; absolute error below 1e-15)."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("norm_cdf requires finite input")
    out = ndtr(arr)
    return float(out) if out.ndim == 0 else out


def norm_pdf(x):
    out = _INV_SQRT_2PI * np.exp(-0.5 * np.square(x))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class BsInputs:
    spot: float
    strike: float
    tenor: float
    rate: float
    vol: float

    def __post_init__(self) -> None:
        _validate(self.spot, self.strike, self.tenor, self.vol)

    def price(self, kind: OptionKind = "call") -> float:
        return bs_price(self.spot, self.strike, self.tenor, self.rate, self.vol, kind)

    def d_values(self) -> tuple[float, float]:
        return d_values(self.spot, self.strike, self.tenor, self.rate, self.vol)

    def derivative(self, spot_order: int, strike_order: int = 0, kind: OptionKind = "call") -> float:
        return bs_derivative(
            self.spot, self.strike, self.tenor, self.rate, self.vol,
            spot_order, strike_order, kind,
        )


def _validate(spot, strike, tenor, vol) -> None:
    if not np.all(np.asarray(spot) > 0.0):
        raise DomainError("spot must be positive")
    if not np.all(np.asarray(strike) > 0.0):
        raise DomainError("strike must be positive")
    if not tenor > 0.0:
        raise DomainError("tenor must be positive")
    if not vol > 0.0:
        raise DomainError("vol must be positive")


def _check_kind(kind: str) -> None:
    if kind not in ("call", "put"):
        raise DomainError(f"unknown option kind {kind!r}")


def d_values(spot, strike, tenor: float, rate: float, vol: float):
    """Return ``(d1, d2)`` with ``d2 = d1 - vol*sqrt(tenor)``."""
    _validate(spot, strike, tenor, vol)
    vst = vol * math.sqrt(tenor)
    d1 = (np.log(np.divide(spot, strike)) + (rate + 0.5 * vol * vol) * tenor) / vst
    d2 = d1 - vst
    if np.ndim(d1) == 0:
        return float(d1), float(d2)
    return d1, d2


def d_at(t, d1: float, tenor: float, vol: float):
    """Interpolated ``d(t) = d1 - vol*t/sqrt(tenor)``; ``d(0)=d1`` and ``d(tenor)=d2``."""
    return d1 - vol * np.asarray(t, dtype=float) / math.sqrt(tenor)


def bs_price(spot, strike, tenor: float, rate: float, vol: float, kind: OptionKind = "call"):
    _check_kind(kind)
    d1, d2 = d_values(spot, strike, tenor, rate, vol)
    df = math.exp(-rate * tenor)
    if kind == "call":
        out = spot * ndtr(d1) - strike * df * ndtr(d2)
    else:
        out = strike * df * ndtr(-d2) - spot * ndtr(-d1)
    return float(out) if np.ndim(out) == 0 else out


# Orders >= 2 are written as sum over (p, q) of pdf(d1) * S**p * K**q * P_pq(d1).
# Differentiating one term in S (or K) yields another term of the same shape, since
# dd1/dS = 1/(S v) and dd1/dK = -1/(K v) with v = vol*sqrt(tenor).

def _diff_spot(terms: dict, v: float) -> dict:
    x = Polynomial([0.0, 1.0])
    out: dict = {}
    for (p, q), poly in terms.items():
        new = (poly.deriv() - x * poly) / v + p * poly
        key = (p - 1, q)
        out[key] = out[key] + new if key in out else new
    return out


def _diff_strike(terms: dict, v: float) -> dict:
    x = Polynomial([0.0, 1.0])
    out: dict = {}
    for (p, q), poly in terms.items():
        new = -(poly.deriv() - x * poly) / v + q * poly
        key = (p, q - 1)
        out[key] = out[key] + new if key in out else new
    return out


def _higher_order_terms(spot_order: int, strike_order: int, v: float) -> dict:
    if strike_order == 0:
        terms = {(-1, 0): Polynomial([1.0 / v])}
        remaining = spot_order - 2
    elif strike_order == 1:
        terms = {(0, -1): Polynomial([-1.0 / v])}
        remaining = spot_order - 1
    else:
        terms = {(1, -2): Polynomial([1.0 / v])}
        remaining = spot_order
    for _ in range(remaining):
        terms = _diff_spot(terms, v)
    return terms


def bs_derivative(
    spot,
    strike,
    tenor: float,
    rate: float,
    vol: float,
    spot_order: int,
    strike_order: int = 0,
    kind: OptionKind = "call",
):
    """Analytic partial derivative of the Black-Scholes price.

    Supports ``spot_order <= 4``, ``strike_order <= 2`` and total order at most 4.
    Orders of two and above coincide for calls and puts.
    """
    _check_kind(kind)
    if (
        spot_order < 0
        or strike_order < 0
        or spot_order > MAX_SPOT_ORDER
        or strike_order > MAX_STRIKE_ORDER
        or spot_order + strike_order > MAX_TOTAL_ORDER
    ):
        raise CapabilityError(f"derivative order ({spot_order}, {strike_order}) not supported")
    total = spot_order + strike_order
    if total == 0:
        return bs_price(spot, strike, tenor, rate, vol, kind)
    d1, d2 = d_values(spot, strike, tenor, rate, vol)
    if total == 1:
        if spot_order == 1:
            out = ndtr(d1) if kind == "call" else ndtr(d1) - 1.0
        else:
            df = math.exp(-rate * tenor)
            out = -df * ndtr(d2) if kind == "call" else df * ndtr(-d2)
        return float(out) if np.ndim(out) == 0 else out

    v = vol * math.sqrt(tenor)
    phi = norm_pdf(d1)
    s = np.asarray(spot, dtype=float)
    k = np.asarray(strike, dtype=float)
    out = 0.0
    for (p, q), poly in _higher_order_terms(spot_order, strike_order, v).items():
        out = out + phi * s**p * k**q * poly(d1)
    return float(out) if np.ndim(out) == 0 else out
