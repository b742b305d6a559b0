"""Second-order spot/strike adjustment proxy for discrete cash dividends.

The call is priced as ``BS(S*, K*)`` where ``S*`` and ``K*`` are quadratic in the
dividend amounts. Coefficients are chosen so that the first and second derivatives
of the proxy in the amounts at zero equal the exact dividend sensitivities, while
``S* - K* e^{-rT}`` carries the dividends' present value (call-put parity).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .baselines import bv_terms
from .bs import bs_price, d_values, norm_pdf
from .errors import AdjustmentOverflowError, NumericalDegeneracyError
from .market import DividendSchedule, MarketParams, OptionSpec, check_inside, pv_dividends

DEGENERACY_THRESHOLD = 1e-300


def _band(lo, hi):
    """``N(hi) - N(lo)`` for ``lo <= hi``, taken on whichever tail avoids cancellation."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    right = lo > 0.0
    return np.where(right, ndtr(-lo) - ndtr(-hi), ndtr(hi) - ndtr(lo))


@dataclass(frozen=True)
class _Base:
    d1: float
    d2: float
    band: float  # N(d1) - N(d2)
    pdf1: float
    pdf2: float
    sqrt_t: float


def _base(market: MarketParams, option: OptionSpec) -> _Base:
    d1, d2 = d_values(market.spot, option.strike, option.maturity, market.rate, market.vol)
    band = float(_band(d2, d1))
    if not band > DEGENERACY_THRESHOLD:
        raise NumericalDegeneracyError(
            f"N(d1) - N(d2) = {band:.3e} underflows; option is effectively a forward or worthless"
        )
    return _Base(d1, d2, band, norm_pdf(d1), norm_pdf(d2), math.sqrt(option.maturity))


def _first_order(market, option, base: _Base, t):
    r, T = market.rate, option.maturity
    t = np.asarray(t, dtype=float)
    d_t = base.d1 - market.vol * t / base.sqrt_t
    lower = _band(base.d2, d_t)  # N(d(t)) - N(d2)
    upper = _band(d_t, base.d1)  # N(d1) - N(d(t))
    a = -np.exp(-r * t) * lower / base.band
    b = np.exp(r * (T - t)) * upper / base.band
    return a, b, lower, upper


def first_order_coeffs(market: MarketParams, option: OptionSpec, t: float) -> tuple[float, float]:
    """``(a_i, b_i)`` for a dividend paid at ``t``; ``(-1, 0)`` at ``t=0`` and ``(0, 1)`` at ``t=T``."""
    base = _base(market, option)
    a, b, _, _ = _first_order(market, option, base, t)
    return float(a), float(b)


@dataclass(frozen=True)
class ClosedFormScalars:
    gamma: float
    a: float
    b: float
    c: float
    d: float


def _scalars(market: MarketParams, base: _Base) -> ClosedFormScalars:
    n1, n2 = base.pdf1, base.pdf2
    nd1, nd2 = float(ndtr(base.d1)), float(ndtr(base.d2))
    cross = nd2 * n1 - nd1 * n2
    dpdf = n1 - n2
    gamma = market.vol * market.spot * base.sqrt_t * n1 * base.band**3
    if not abs(gamma) > DEGENERACY_THRESHOLD:
        raise NumericalDegeneracyError(f"gamma = {gamma:.3e} underflows")
    return ClosedFormScalars(
        gamma=gamma,
        a=-(cross**2),
        b=dpdf * cross,
        c=-(dpdf**2),
        d=n1 * base.band**2,
    )


def _pair_matrix(market, base: _Base, scalars: ClosedFormScalars, t, lower, upper):
    """Symmetric matrix of second-order spot coefficients ``a_{i,j}``.

    Uses ``a + b(N_i + N_j) + c N_i N_j = -u_i u_j`` with
    ``u_i = N'(d1)(N(d_i) - N(d2)) + N'(d2)(N(d1) - N(d_i))``, the same polynomial as the
    printed bracket written with band differences.
    """
    r, vol = market.rate, market.vol
    u = base.pdf1 * lower + base.pdf2 * upper
    t_min = np.minimum.outer(t, t)
    t_sum = np.add.outer(t, t)
    bracket = -np.outer(u, u) + scalars.d * np.exp(vol**2 * t_min) * norm_pdf(
        base.d1 - vol * t_sum / base.sqrt_t
    )
    return np.exp(-r * t_sum) * bracket / scalars.gamma


def second_order_coeffs(
    market: MarketParams, option: OptionSpec, ti: float, tj: float
) -> tuple[float, float]:
    """``(a_{i,j}, b_{i,j})``; the variance factor is carried by the earlier date."""
    base = _base(market, option)
    scalars = _scalars(market, base)
    t = np.array(sorted((float(ti), float(tj))))
    _, _, lower, upper = _first_order(market, option, base, t)
    a = float(_pair_matrix(market, base, scalars, t, lower, upper)[0, 1])
    return a, math.exp(market.rate * option.maturity) * a


@dataclass(frozen=True)
class AdjustmentCoefficients:
    times: np.ndarray
    first_a: np.ndarray
    first_b: np.ndarray
    pair_a: np.ndarray  # symmetric; pair_b = e^{rT} * pair_a
    scalars: ClosedFormScalars
    growth: float  # e^{rT}

    @property
    def pair_b(self) -> np.ndarray:
        return self.growth * self.pair_a

    def first_order(self, i: int) -> tuple[float, float]:
        return float(self.first_a[i]), float(self.first_b[i])

    def second_order(self, i: int, j: int) -> tuple[float, float]:
        a = float(self.pair_a[i, j])
        return a, self.growth * a


def adjustment_coefficients(
    market: MarketParams, option: OptionSpec, schedule: DividendSchedule
) -> AdjustmentCoefficients:
    check_inside(schedule, option)
    base = _base(market, option)
    scalars = _scalars(market, base)
    t = schedule.t
    a1, b1, lower, upper = _first_order(market, option, base, t)
    pair = _pair_matrix(market, base, scalars, t, lower, upper)
    return AdjustmentCoefficients(
        times=t,
        first_a=a1,
        first_b=b1,
        pair_a=pair,
        scalars=scalars,
        growth=math.exp(market.rate * option.maturity),
    )


@dataclass(frozen=True)
class AdjustedTerms:
    spot: float
    strike: float
    fallback: bool = False  # True when the first-order Bos-Vandermark adjustment was used


def adjusted_terms(
    market: MarketParams, option: OptionSpec, schedule: DividendSchedule
) -> AdjustedTerms:
    """Adjusted spot and strike ``(S*, K*)``.

    The quadratic part is ``1/2 * sum_{i,j} a_{i,j} C_i C_j`` over ordered pairs,
    i.e. each unordered pair once and each diagonal term with weight 1/2.
    """
    check_inside(schedule, option)
    if not len(schedule):
        return AdjustedTerms(market.spot, option.strike)
    try:
        coeffs = adjustment_coefficients(market, option, schedule)
    except NumericalDegeneracyError as exc:
        warnings.warn(f"falling back to first-order adjustment: {exc}", RuntimeWarning, stacklevel=2)
        spot, strike = bv_terms(market, option, schedule)
        fallback = True
    else:
        c = schedule.c
        quad = 0.5 * float(c @ coeffs.pair_a @ c)
        spot = market.spot + float(coeffs.first_a @ c) + quad
        strike = option.strike + float(coeffs.first_b @ c) + coeffs.growth * quad
        fallback = False
    if not (spot > 0.0 and strike > 0.0):
        raise AdjustmentOverflowError(
            f"adjusted spot {spot:.6g} / strike {strike:.6g} not positive; dividends too large"
        )
    return AdjustedTerms(spot, strike, fallback)


def proxy_price(market: MarketParams, option: OptionSpec, schedule: DividendSchedule) -> float:
    terms = adjusted_terms(market, option, schedule)
    T, r = option.maturity, market.rate
    call = bs_price(terms.spot, terms.strike, T, r, market.vol, "call")
    if option.kind == "call":
        return call
    forward_pv = market.spot - option.strike * math.exp(-r * T) - pv_dividends(schedule, r)
    return call - forward_pv
