"""Reference prices under the piecewise-lognormal model.

``pde_price`` solves the Black-Scholes PDE in log-spot with Crank-Nicolson between
ex-dates and maps the solution through the liquidator dividend policy at each date.
``mc_price`` simulates exact lognormal increments between dates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.linalg import solve_banded

from .errors import DomainError
from .market import (
    DividendSchedule,
    MarketParams,
    OptionSpec,
    apply_dividend,
    check_inside,
    pv_dividends,
)


@dataclass(frozen=True)
class GridConfig:
    space_nodes: int = 800
    steps_per_year: int = 200
    space_width: float = 7.0  # half-width of the log grid in units of vol*sqrt(T)
    rannacher_steps: int = 4  # implicit Euler half-steps after the payoff and each jump

    def __post_init__(self) -> None:
        if self.space_nodes < 200:
            raise DomainError("space_nodes must be at least 200")
        if self.steps_per_year < 100:
            raise DomainError("steps_per_year must be at least 100")
        if self.space_width < 6:
            raise DomainError("space_width must be at least 6")
        if self.rannacher_steps < 2:
            raise DomainError("rannacher_steps must be at least 2")

    def refined(self, factor: int = 2) -> "GridConfig":
        return GridConfig(
            self.space_nodes * factor,
            self.steps_per_year * factor,
            self.space_width,
            self.rannacher_steps,
        )


@dataclass
class PdeResult:
    price: float
    spots: np.ndarray
    values: np.ndarray
    warnings: list[str] = field(default_factory=list)
    error_estimate: float | None = None


@dataclass
class _JumpRecord:
    index: int
    before: np.ndarray  # grid values at T_i^- (after mapping)
    after: np.ndarray  # grid values at T_i^+


def _log_grid(market, option, schedule, grid: GridConfig) -> tuple[np.ndarray, int]:
    s0, vol, T = market.spot, market.vol, option.maturity
    half = grid.space_width * vol * math.sqrt(T)
    ex_div = max(s0 - pv_dividends(schedule, market.rate), 1e-3 * s0)
    x_lo = math.log(ex_div) - half
    x_hi = math.log(s0) + half
    n = grid.space_nodes
    dx = (x_hi - x_lo) / (n - 1)
    j0 = int(round((math.log(s0) - x_lo) / dx))
    x = math.log(s0) + (np.arange(n) - j0) * dx
    return x, j0


def _monotone_interp(x, y) -> Callable[[np.ndarray], np.ndarray]:
    # flat zero stretches of the payoff make pchip's harmonic mean divide by zero
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return PchipInterpolator(x, y, extrapolate=False)


class _Stepper:
    """theta-scheme for ``V_tau = 0.5 vol^2 V_xx + (r - vol^2/2) V_x - r V`` on a uniform grid."""

    def __init__(self, x: np.ndarray, rate: float, vol: float) -> None:
        dx = x[1] - x[0]
        drift = rate - 0.5 * vol**2
        self.lower = 0.5 * vol**2 / dx**2 - 0.5 * drift / dx
        self.diag = -(vol**2) / dx**2 - rate
        self.upper = 0.5 * vol**2 / dx**2 + 0.5 * drift / dx
        self.m = x.size - 2
        self._cache: dict[tuple[float, float], np.ndarray] = {}

    def _banded(self, dt: float, theta: float) -> np.ndarray:
        key = (dt, theta)
        ab = self._cache.get(key)
        if ab is None:
            ab = np.empty((3, self.m))
            ab[0, :] = -theta * dt * self.upper
            ab[1, :] = 1.0 - theta * dt * self.diag
            ab[2, :] = -theta * dt * self.lower
            ab[0, 0] = 0.0
            ab[2, -1] = 0.0
            self._cache[key] = ab
        return ab

    def step(self, v: np.ndarray, dt: float, theta: float, lo_new: float, hi_new: float) -> np.ndarray:
        ex = (1.0 - theta) * dt
        rhs = v[1:-1] + ex * (self.lower * v[:-2] + self.diag * v[1:-1] + self.upper * v[2:])
        rhs[0] += theta * dt * self.lower * lo_new
        rhs[-1] += theta * dt * self.upper * hi_new
        out = np.empty_like(v)
        out[1:-1] = solve_banded((1, 1), self._banded(dt, theta), rhs, check_finite=False)
        out[0] = lo_new
        out[-1] = hi_new
        return out


def _boundaries(option, rate, schedule, s_lo, s_hi, t):
    """Dirichlet values at calendar time ``t`` from the asymptotes of call and put."""
    tau = option.maturity - t
    disc_k = option.strike * math.exp(-rate * tau)
    pending = schedule.t > t
    pv_left = float(np.sum(schedule.c[pending] * np.exp(-rate * (schedule.t[pending] - t))))
    if option.kind == "call":
        return 0.0, max(s_hi - pv_left - disc_k, 0.0)
    return max(disc_k - max(s_lo - pv_left, 0.0), 0.0), 0.0


def _solve(
    market: MarketParams,
    option: OptionSpec,
    schedule: DividendSchedule,
    grid: GridConfig,
    record: set[int] | None = None,
    grid_schedule: DividendSchedule | None = None,
):
    check_inside(schedule, option)
    r, T, K = market.rate, option.maturity, option.strike
    x, j0 = _log_grid(market, option, grid_schedule or schedule, grid)
    s = np.exp(x)
    s_lo, s_hi = s[0], s[-1]
    stepper = _Stepper(x, r, market.vol)
    if option.kind == "call":
        v = np.maximum(s - K, 0.0)
    else:
        v = np.maximum(K - s, 0.0)

    records: list[_JumpRecord] = []
    warnings: list[str] = []
    times = [0.0, *schedule.times, T]
    amounts = [0.0, *schedule.amounts]
    half_steps = grid.rannacher_steps
    # march backward through segments (times[i], times[i+1])
    for seg in range(len(times) - 2, -1, -1):
        t_start, t_end = times[seg], times[seg + 1]
        length = t_end - t_start
        n_steps = max(1, math.ceil(length * grid.steps_per_year - 1e-9))
        dt = length / n_steps
        # Rannacher: the first ceil(half_steps/2) full steps become implicit half-steps
        smooth_full = min(n_steps, math.ceil(half_steps / 2))
        if smooth_full == n_steps and n_steps > 1:
            warnings.append(f"segment ending at t={t_end:.6g} is entirely implicit Euler")
        t_now = t_end
        for k in range(n_steps):
            if k < smooth_full:
                sub = dt / 2.0
                for _ in range(2):
                    t_now -= sub
                    lo, hi = _boundaries(option, r, schedule, s_lo, s_hi, t_now)
                    v = stepper.step(v, sub, 1.0, lo, hi)
            else:
                t_now -= dt
                lo, hi = _boundaries(option, r, schedule, s_lo, s_hi, t_now)
                v = stepper.step(v, dt, 0.5, lo, hi)
        if seg == 0:
            break
        # ex-date times[seg] = T_i with i = seg - 1
        cash = amounts[seg]
        i = seg - 1
        after = v
        v = _map_dividend(s, after, cash, option, r, t_start)
        if record is not None and i in record:
            records.append(_JumpRecord(i, v.copy(), after.copy()))
    return s, v, j0, records, warnings


def _value_at_zero(option, rate, t) -> float:
    if option.kind == "call":
        return 0.0
    return option.strike * math.exp(-rate * (option.maturity - t))


def _map_dividend(s, after, cash, option, rate, t) -> np.ndarray:
    """Values at ``T_i^-``: ``V(S, T_i^-) = V(D(S), T_i^+)`` under the liquidator policy."""
    if cash == 0.0:
        return after.copy()
    post = apply_dividend(s, cash)
    out = np.empty_like(after)
    v0 = _value_at_zero(option, rate, t)
    on_grid = post >= s[0]
    interp = _monotone_interp(np.log(s), after)
    out[on_grid] = interp(np.log(post[on_grid]))
    below = ~on_grid
    # between S=0 (absorbed) and the first node: linear in S
    w = post[below] / s[0]
    out[below] = (1.0 - w) * v0 + w * after[0]
    return out


def pde_solve(
    market: MarketParams,
    option: OptionSpec,
    schedule: DividendSchedule,
    grid: GridConfig | None = None,
    tolerance: float | None = None,
) -> PdeResult:
    """Solve on ``grid``; with ``tolerance`` set, also estimate the discretisation error.

    The estimate compares against a 2x refined solve and adds an accuracy warning when
    the relative error exceeds ``tolerance``.
    """
    grid = grid or GridConfig()
    s, v, j0, _, warnings = _solve(market, option, schedule, grid)
    result = PdeResult(price=float(v[j0]), spots=s, values=v, warnings=warnings)
    if tolerance is not None:
        fine = pde_price(market, option, schedule, grid.refined(2))
        extrapolated = fine + (fine - result.price) / 3.0
        result.error_estimate = abs(result.price - extrapolated) / max(abs(extrapolated), 1e-300)
        if result.error_estimate > tolerance:
            result.warnings.append(
                f"grid too coarse: estimated relative error {result.error_estimate:.2e}"
                f" exceeds {tolerance:.2e}"
            )
    return result


def pde_price(
    market: MarketParams,
    option: OptionSpec,
    schedule: DividendSchedule,
    grid: GridConfig | None = None,
) -> float:
    return pde_solve(market, option, schedule, grid).price


def pde_bump_sensitivity(
    market: MarketParams,
    option: OptionSpec,
    div_times,
    step: float | None = None,
    grid: GridConfig | None = None,
) -> float:
    """Finite-difference dividend sensitivity at zero dividends from PDE prices.

    Amounts cannot go negative, so one-sided stencils are used: a second-order forward
    difference for one date, and a Richardson-corrected forward cross difference for
    two distinct dates. The grid is pinned to the zero-dividend layout so every bump
    is priced on identical nodes.
    """
    grid = grid or GridConfig()
    times = tuple(sorted(float(t) for t in div_times))
    h = step if step is not None else 1e-2 * market.spot / 100.0
    anchor = DividendSchedule()

    def price(amounts) -> float:
        merged: dict[float, float] = {}
        for t, c in zip(times, amounts):
            merged[t] = merged.get(t, 0.0) + c
        sched = DividendSchedule(tuple(merged), tuple(merged.values()))
        _, v, j0, _, _ = _solve(market, option, sched, grid, grid_schedule=anchor)
        return float(v[j0])

    if len(times) == 1:
        f0, f1, f2 = price([0.0]), price([h]), price([2 * h])
        return (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h)
    if len(times) == 2:
        f00 = price([0.0, 0.0])

        def cross(step_: float) -> float:
            return (
                price([step_, step_]) - price([step_, 0.0]) - price([0.0, step_]) + f00
            ) / step_**2

        return 2.0 * cross(h) - cross(2.0 * h)
    raise DomainError("bump sensitivities support one or two dates")


def pde_richardson(
    market: MarketParams,
    option: OptionSpec,
    schedule: DividendSchedule,
    grid: GridConfig | None = None,
) -> tuple[float, float]:
    """Second-order Richardson extrapolation from ``grid`` and its 2x refinement.

    Returns ``(extrapolated_price, relative_error_estimate_of_base_grid)``.
    """
    grid = grid or GridConfig()
    coarse = pde_price(market, option, schedule, grid)
    fine = pde_price(market, option, schedule, grid.refined(2))
    extrapolated = fine + (fine - coarse) / 3.0
    return extrapolated, abs(coarse - extrapolated) / abs(extrapolated)


def continuity_gaps(
    market: MarketParams,
    option: OptionSpec,
    schedule: DividendSchedule,
    grid: GridConfig | None = None,
    indices=None,
) -> dict[int, float]:
    """Round-trip jump mismatch for several ex-dates from a single backward solve."""
    grid = grid or GridConfig()
    indices = set(range(len(schedule)) if indices is None else indices)
    for i in indices:
        if not 0 <= i < len(schedule):
            raise DomainError(f"dividend index {i} out of range")
    s, _, _, records, _ = _solve(market, option, schedule, grid, record=indices)
    x = np.log(s)
    gaps = {}
    for rec in records:
        shifted = s[1:-1] + schedule.amounts[rec.index]
        inside = shifted <= s[-2]
        before = _monotone_interp(x, rec.before)(np.log(shifted[inside]))
        gap = np.abs(before - rec.after[1:-1][inside])
        gaps[rec.index] = float(gap.max()) if gap.size else 0.0
    return dict(sorted(gaps.items()))


def continuity_check(
    market: MarketParams,
    option: OptionSpec,
    schedule: DividendSchedule,
    grid: GridConfig | None,
    i: int,
) -> float:
    """Largest mismatch between ``V(S_j, T_i^+)`` and ``V(S_j + C_i, T_i^-)`` over the grid.

    The pre-dividend grid is read back at the shifted spots with the same monotone
    cubic used to build it, so the gap measures the round-trip interpolation error.
    """
    return continuity_gaps(market, option, schedule, grid, [i])[i]


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 1_000_000
    seed: int = 12345
    antithetic: bool = True

    def __post_init__(self) -> None:
        if self.n_paths < 10_000:
            raise DomainError("n_paths must be at least 10000")
        if self.antithetic and self.n_paths % 2:
            raise DomainError("n_paths must be even with antithetic sampling")


@dataclass(frozen=True)
class McResult:
    price: float
    stderr: float


_CHUNK = 1 << 16


def _simulate(
    market: MarketParams,
    schedule: DividendSchedule,
    horizon: float,
    mc: McConfig,
    payoff: Callable[[np.ndarray], np.ndarray],
) -> tuple[float, float]:
    """Mean and standard error of ``payoff(S_T)``.

    Paths are generated in fixed-size chunks, chunk ``c`` drawing from a Philox stream
    keyed by ``(seed, c)``; results do not depend on evaluation order. Antithetic
    pairs are averaged before the variance is taken.
    """
    r, vol = market.rate, market.vol
    times = [*schedule.times, horizon]
    amounts = [*schedule.amounts, 0.0]
    n_units = mc.n_paths // 2 if mc.antithetic else mc.n_paths
    total = 0.0
    total_sq = 0.0
    for c, start in enumerate(range(0, n_units, _CHUNK)):
        m = min(_CHUNK, n_units - start)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([mc.seed, c])))
        spots = [np.full(m, market.spot)]
        if mc.antithetic:
            spots.append(np.full(m, market.spot))
        prev = 0.0
        for t, cash in zip(times, amounts):
            dt = t - prev
            z = rng.standard_normal(m)
            drift = (r - 0.5 * vol**2) * dt
            diffusion = vol * math.sqrt(dt)
            spots[0] = spots[0] * np.exp(drift + diffusion * z)
            if mc.antithetic:
                spots[1] = spots[1] * np.exp(drift - diffusion * z)
            if cash:
                spots = [apply_dividend(sp, cash) for sp in spots]
            prev = t
        values = payoff(spots[0])
        if mc.antithetic:
            values = 0.5 * (values + payoff(spots[1]))
        total += float(np.sum(values))
        total_sq += float(np.sum(values * values))
    mean = total / n_units
    var = max(total_sq / n_units - mean * mean, 0.0) * n_units / (n_units - 1)
    return mean, math.sqrt(var / n_units)


def mc_price(
    market: MarketParams,
    option: OptionSpec,
    schedule: DividendSchedule,
    mc: McConfig | None = None,
) -> McResult:
    mc = mc or McConfig()
    check_inside(schedule, option)
    K = option.strike
    if option.kind == "call":
        payoff = lambda s: np.maximum(s - K, 0.0)  # noqa: E731
    else:
        payoff = lambda s: np.maximum(K - s, 0.0)  # noqa: E731
    mean, err = _simulate(market, schedule, option.maturity, mc, payoff)
    df = math.exp(-market.rate * option.maturity)
    return McResult(df * mean, df * err)


def mc_terminal_mean(
    market: MarketParams,
    schedule: DividendSchedule,
    horizon: float,
    mc: McConfig | None = None,
) -> McResult:
    """``E[S_T]`` under the liquidator policy (absorption included)."""
    mc = mc or McConfig()
    mean, err = _simulate(market, schedule, horizon, mc, lambda s: s)
    return McResult(mean, err)
