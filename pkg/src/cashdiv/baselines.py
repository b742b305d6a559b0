"""Literature approximations used as accuracy baselines.

* three-moment matching onto a shifted lognormal,
* Bos-Vandermark spot/strike adjustment,
* Bos-Gairat-Shepeleva volatility adjustment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.optimize import brentq

from .bs import bs_price, norm_cdf
from .errors import AdjustmentOverflowError, DomainError, FitError, FormulaBreakdownError
from .market import DividendSchedule, MarketParams, OptionSpec, check_inside, pv_dividends

_V_UPPER = 1e6


def terminal_moments(
    market: MarketParams, schedule: DividendSchedule, horizon: float
) -> tuple[float, float, float]:
    """First three raw moments of ``S_T`` with dividends always paid in full (no absorption).

    Rolls the moments forward date by date: ``U_j = U_{j-1} X_j - C_j`` with ``X_j`` an
    independent lognormal growth factor, so ``E[U_j^m]`` follows from the binomial
    expansion and ``E[X^p] = exp(p r dt + p(p-1) vol^2 dt / 2)``.
    """
    if horizon <= 0.0:
        raise DomainError("horizon must be positive")
    if len(schedule) and schedule.times[-1] >= horizon:
        raise DomainError("dividend dates must precede the horizon")
    r, var = market.rate, market.vol**2
    moments = [1.0, market.spot, market.spot**2, market.spot**3]
    prev = 0.0
    for t, cash in [*schedule, (horizon, 0.0)]:
        dt = t - prev
        grown = [moments[p] * math.exp(p * r * dt + 0.5 * p * (p - 1) * var * dt) for p in range(4)]
        moments = [
            math.fsum(comb(m, p) * grown[p] * (-cash) ** (m - p) for p in range(m + 1))
            for m in range(4)
        ]
        prev = t
    return moments[1], moments[2], moments[3]


@dataclass(frozen=True)
class ShiftedLognormalParams:
    shift: float
    scale: float
    vol: float

    def __post_init__(self) -> None:
        if not (self.scale > 0.0 and self.vol > 0.0 and self.shift + self.scale > 0.0):
            raise FitError("shifted lognormal parameters out of range")

    def moments(self, horizon: float) -> tuple[float, float, float]:
        lam, m, v = self.shift, self.scale, math.exp(self.vol**2 * horizon)
        # E[Y^p] = M^p v^{p(p-1)/2}
        y = [1.0, m, m * m * v, m**3 * v**3]
        return tuple(
            math.fsum(comb(k, p) * y[p] * lam ** (k - p) for p in range(k + 1)) for k in (1, 2, 3)
        )


def fit_shifted_lognormal(mu1: float, mu2: float, mu3: float, horizon: float) -> ShiftedLognormalParams:
    variance = mu2 - mu1 * mu1
    if not variance > 0.0:
        raise FitError(f"non-positive variance {variance:.3e}")
    central3 = mu3 - 3.0 * mu1 * mu2 + 2.0 * mu1**3
    skew = central3 / variance**1.5
    if not skew > 0.0:
        raise FitError(f"non-positive skewness {skew:.3e}")

    def residual(v: float) -> float:
        return (v + 2.0) * math.sqrt(v - 1.0) - skew

    if residual(_V_UPPER) < 0.0:
        raise FitError(f"skewness {skew:.3e} too large to fit")
    v = brentq(residual, 1.0, _V_UPPER, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    if not v > 1.0:
        raise FitError("skewness too small: fit degenerates to a Gaussian")
    scale = math.sqrt(variance / (v - 1.0))
    return ShiftedLognormalParams(
        shift=mu1 - scale, scale=scale, vol=math.sqrt(math.log(v) / horizon)
    )


def moment_match_price(market: MarketParams, option: OptionSpec, schedule: DividendSchedule) -> float:
    check_inside(schedule, option)
    T, r = option.maturity, market.rate
    mu1, mu2, mu3 = terminal_moments(market, schedule, T)
    if not len(schedule):
        # pure lognormal: the fit is exact, skip the root-finder round-off
        params = ShiftedLognormalParams(0.0, mu1, market.vol)
    else:
        params = fit_shifted_lognormal(mu1, mu2, mu3, T)
    df = math.exp(-r * T)
    shifted_strike = option.strike - params.shift
    if shifted_strike <= 0.0:
        call = df * (mu1 - option.strike)
    else:
        # Black on the forward M: BS with spot M e^{-rT}
        call = bs_price(params.scale * df, shifted_strike, T, r, params.vol, "call")
    if option.kind == "call":
        return call
    return call - df * (mu1 - option.strike)


def bv_terms(market: MarketParams, option: OptionSpec, schedule: DividendSchedule) -> tuple[float, float]:
    T, r = option.maturity, market.rate
    t, c = schedule.t, schedule.c
    spot = market.spot - float(np.sum((1.0 - t / T) * c * np.exp(-r * t)))
    strike = option.strike + float(np.sum((t / T) * c * np.exp(r * (T - t))))
    return spot, strike


def bv_price(market: MarketParams, option: OptionSpec, schedule: DividendSchedule) -> float:
    check_inside(schedule, option)
    spot, strike = bv_terms(market, option, schedule)
    if spot <= 0.0:
        raise AdjustmentOverflowError(f"adjusted spot {spot:.6g} not positive")
    return bs_price(spot, strike, option.maturity, market.rate, market.vol, option.kind)


@dataclass(frozen=True)
class BgsTerms:
    adjusted_spot: float
    adjusted_vol: float
    a: float
    b: float


def bgs_terms(market: MarketParams, option: OptionSpec, schedule: DividendSchedule) -> BgsTerms:
    """Spot and volatility adjustment of Bos, Gairat and Shepeleva.

    The spot is the escrowed spot ``S0 - PV(dividends)``. With
    ``a = (ln(S*/K) + (r + vol^2/2) T) / (vol sqrt(T))`` and ``b = a + vol sqrt(T)/2``::

        vol*^2 = vol^2 + vol sqrt(pi/(2T)) * (
            4 e^{a^2/2} / S* * sum_i w_i [N(a) - N(a - vol t_i/sqrt(T))]
            + e^{b^2/2} / S*^2 * sum_ij w_i w_j [N(b) - N(b - 2 vol min(t_i, t_j)/sqrt(T))])

    where ``w_i = C_i e^{-r t_i}``.
    """
    check_inside(schedule, option)
    T, r, vol = option.maturity, market.rate, market.vol
    spot = market.spot - pv_dividends(schedule, r)
    if spot <= 0.0:
        raise AdjustmentOverflowError(f"adjusted spot {spot:.6g} not positive")
    sqrt_t = math.sqrt(T)
    a = (math.log(spot / option.strike) + (r + 0.5 * vol**2) * T) / (vol * sqrt_t)
    b = a + 0.5 * vol * sqrt_t
    if not len(schedule):
        return BgsTerms(spot, vol, a, b)
    t, c = schedule.t, schedule.c
    w = c * np.exp(-r * t)
    single = float(np.sum(w * (norm_cdf(a) - norm_cdf(a - vol * t / sqrt_t))))
    t_min = np.minimum.outer(t, t)
    double = float(w @ (norm_cdf(b) - norm_cdf(b - 2.0 * vol * t_min / sqrt_t)) @ w)
    var = vol**2 + vol * math.sqrt(math.pi / (2.0 * T)) * (
        4.0 * math.exp(0.5 * a * a) / spot * single + math.exp(0.5 * b * b) / spot**2 * double
    )
    if not var > 0.0:
        raise FormulaBreakdownError(f"adjusted variance {var:.3e} is not positive")
    return BgsTerms(spot, math.sqrt(var), a, b)


def bgs_price(market: MarketParams, option: OptionSpec, schedule: DividendSchedule) -> float:
    terms = bgs_terms(market, option, schedule)
    call = bs_price(
        terms.adjusted_spot, option.strike, option.maturity, market.rate, terms.adjusted_vol, "call"
    )
    if option.kind == "call":
        return call
    r, T = market.rate, option.maturity
    return call - (market.spot - option.strike * math.exp(-r * T) - pv_dividends(schedule, r))
