"""Exact dividend sensitivities at zero dividends and Taylor-series prices.

The k-th mixed derivative of the option price in the cash amounts, taken at zero
dividends, is a k-th spot derivative of the Black-Scholes price at a shifted spot.
Dates are sorted ascending before evaluation because the variance weighting of the
later dates depends on their rank.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .bs import bs_derivative, bs_price
from .errors import CapabilityError, DomainError
from .market import DividendSchedule, MarketParams, OptionSpec, check_inside

MAX_SENSITIVITY_ORDER = 3


@dataclass(frozen=True)
class SensitivityRequest:
    market: MarketParams
    option: OptionSpec
    div_times: tuple[float, ...]

    def __post_init__(self) -> None:
        times = tuple(sorted(float(t) for t in self.div_times))
        if len(times) > MAX_SENSITIVITY_ORDER:
            raise CapabilityError(
                f"sensitivity order {len(times)} exceeds {MAX_SENSITIVITY_ORDER}"
            )
        for t in times:
            if not 0.0 < t < self.option.maturity:
                raise DomainError(f"dividend time {t} outside (0, maturity)")
        object.__setattr__(self, "div_times", times)


def _sensitivity(market: MarketParams, option: OptionSpec, times) -> float:
    k = len(times)
    m, o = market, option
    if k == 0:
        return bs_price(m.spot, o.strike, o.maturity, m.rate, m.vol, o.kind)
    total = math.fsum(times)
    ranked = math.fsum(q * t for q, t in enumerate(times))
    shifted_spot = m.spot * math.exp(-m.vol**2 * total)
    deriv = bs_derivative(shifted_spot, o.strike, o.maturity, m.rate, m.vol, k, 0, o.kind)
    return (-1) ** k * deriv * math.exp(-m.rate * total - m.vol**2 * ranked)


def dividend_sensitivity(req: SensitivityRequest) -> float:
    """Partial derivative of the price in the dividends at ``req.div_times``, at zero dividends."""
    return _sensitivity(req.market, req.option, req.div_times)


def sensitivity(market: MarketParams, option: OptionSpec, *div_times: float) -> float:
    return dividend_sensitivity(SensitivityRequest(market, option, tuple(div_times)))


def taylor_price(
    order: int, market: MarketParams, option: OptionSpec, schedule: DividendSchedule
) -> float:
    """Multivariate Taylor polynomial of the price in the dividend amounts, at zero.

    Summed over sorted index tuples; a tuple with multiplicities m_1..m_p carries the
    weight 1/(m_1!...m_p!), which equals the ordered-tuple sum divided by k!.
    """
    if order not in (1, 2, 3):
        raise CapabilityError("Taylor order must be 1, 2 or 3")
    check_inside(schedule, option)
    times, amounts = schedule.times, schedule.amounts
    total = _sensitivity(market, option, ())
    for k in range(1, order + 1):
        for idx in itertools.combinations_with_replacement(range(len(times)), k):
            weight = 1.0
            for mult in Counter(idx).values():
                weight /= math.factorial(mult)
            coeff = math.prod(amounts[i] for i in idx)
            if coeff == 0.0:
                continue
            total += weight * coeff * _sensitivity(market, option, [times[i] for i in idx])
    return total


@dataclass(frozen=True)
class MartingaleCheck:
    sample_mean: float
    stderr: float
    reference: float


def martingale_check(
    market: MarketParams,
    option: OptionSpec,
    t: float,
    k: int,
    a: float,
    n_paths: int,
    seed: int,
) -> MartingaleCheck:
    """Monte Carlo test that the shifted k-th spot derivative process is a martingale.

    Samples ``Z_t = d^k P/dS^k(S_t e^{k vol^2 (t-a)}, T-t) e^{(k-1)(r + k vol^2/2) t}``
    and returns its sample mean with standard error next to ``Z_0``.
    """
    if not 0.0 < t < option.maturity:
        raise DomainError("t must lie in (0, maturity)")
    if k < 0 or a < 0.0:
        raise DomainError("k and a must be non-negative")
    r, vol, tau = market.rate, market.vol, option.maturity
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n_paths)
    s_t = market.spot * np.exp((r - 0.5 * vol**2) * t + vol * math.sqrt(t) * z)
    growth = math.exp((k - 1) * (r + 0.5 * k * vol**2) * t)
    shifted = s_t * math.exp(k * vol**2 * (t - a))
    samples = growth * bs_derivative(shifted, option.strike, tau - t, r, vol, k, 0, option.kind)
    reference = bs_derivative(
        market.spot * math.exp(-k * vol**2 * a), option.strike, tau, r, vol, k, 0, option.kind
    )
    return MartingaleCheck(
        sample_mean=float(np.mean(samples)),
        stderr=float(np.std(samples, ddof=1) / math.sqrt(n_paths)),
        reference=float(reference),
    )
