"""Acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL`` line that is echoed in the pytest terminal
summary (see ``conftest.py``). Run directly with ``python tests/test_acceptance.py``
to print only these lines.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from cashdiv import (
    DividendSchedule,
    MarketParams,
    OptionSpec,
    bs_price,
    pv_dividends,
    sensitivity,
)
from cashdiv.bench import BenchConfig, figure_sweep, price_with, run_table
from cashdiv.oracles import McConfig, pde_bump_sensitivity
from cashdiv.proxy import adjusted_terms, proxy_price
from cashdiv.sensitivities import martingale_check

from conftest import LOW_BGS, LOW_FD, LOW_GS, LOW_MM, RATIOS

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
RESULTS: list[str] = []


def report(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} [{number:2d}] {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _worst(pairs):
    return max(abs(a - b) for a, b in pairs)


@pytest.fixture(scope="module")
def low_table():
    config = BenchConfig.from_json(CONFIGS / "low_frequency.json")
    t0 = time.perf_counter()
    table = run_table(config)
    return table, time.perf_counter() - t0


def test_01_low_frequency_table(low_table):
    table, elapsed = low_table
    fd, gs = [], []
    for T, row in LOW_FD.items():
        for ratio, printed_fd, printed_gs in zip(RATIOS, row, LOW_GS[T]):
            fd.append((table.get(T, ratio, "pde").price, printed_fd))
            gs.append((table.get(T, ratio, "gs").price, printed_gs))
    ok = _worst(fd) <= 0.05 and _worst(gs) <= 0.02 and elapsed < 300.0 and len(fd) == 28
    report(1, "low-frequency table", ok,
           f"max |pde-FD|={_worst(fd):.4f} (<=0.05), max |gs-GS|={_worst(gs):.4f} (<=0.02), "
           f"runtime {elapsed:.1f}s (<300s)")


def test_02_high_frequency_table():
    config = BenchConfig.from_json(CONFIGS / "high_frequency.json")
    data = config.to_dict()
    data["methods"] = ["pde", "gs"]
    table = run_table(BenchConfig.from_dict(data))
    fd = table.get(20.0, 0.5, "pde").price
    gs = table.get(20.0, 0.5, "gs").price
    worst = max(abs(r.rel_err_pct) for r in table.rows if r.method == "gs")
    ok = abs(fd - 1260.33) <= 1.5 and abs(gs - 1264.53) <= 1.0 and worst <= 0.40
    report(2, "high-frequency table", ok,
           f"T=20 K/S0=0.5 pde={fd:.2f} (1260.33+-1.5) gs={gs:.2f} (1264.53+-1.0); "
           f"max |gs rel err|={worst:.3f}% (<=0.40%) over {len(table.rows) // 2} cells")


def test_03_baseline_rows(low_table):
    table, _ = low_table
    mm, bgs = [], []
    for T in (5, 20):
        for ratio, printed_mm, printed_bgs in zip(RATIOS, LOW_MM[T], LOW_BGS[T]):
            mm.append((table.get(T, ratio, "mm").price, printed_mm))
            bgs.append((table.get(T, ratio, "bgs").price, printed_bgs))
    ok = _worst(mm) <= 0.05 and _worst(bgs) <= 0.05
    report(3, "moment-matching and BGS rows", ok,
           f"max |mm diff|={_worst(mm):.4f}, max |bgs diff|={_worst(bgs):.4f} (<=0.05)")


def _random_config(rng):
    market = MarketParams(rng.uniform(50, 150), rng.uniform(0.0, 0.06), rng.uniform(0.15, 0.5))
    option = OptionSpec(market.spot * rng.uniform(0.7, 1.4), rng.uniform(1.0, 20.0))
    return market, option


def test_04_second_order_membership():
    # one-sided stencils: amounts cannot go negative
    rng = np.random.default_rng(4)
    worst1 = worst2 = 0.0
    for n in range(20):
        market, option = _random_config(rng)
        T = option.maturity
        ti, tj = sorted(rng.uniform(0.05 * T, 0.95 * T, size=2))
        if n % 5 == 0:
            tj = ti
        h = 1e-3 * market.spot / 100.0

        def f(ci, cj):
            if tj == ti:
                return proxy_price(market, option, DividendSchedule((ti,), (ci + cj,)))
            return proxy_price(market, option, DividendSchedule((ti, tj), (ci, cj)))

        f0 = f(0.0, 0.0)
        first = (-3.0 * f0 + 4.0 * f(h, 0.0) - f(2 * h, 0.0)) / (2 * h)

        def cross(s):
            return (f(s, s) - f(s, 0.0) - f(0.0, s) + f0) / s**2

        second = 2.0 * cross(h) - cross(2 * h)
        worst1 = max(worst1, abs(first - sensitivity(market, option, ti)))
        worst2 = max(worst2, abs(second - sensitivity(market, option, ti, tj)))
    ok = worst1 <= 1e-6 and worst2 <= 1e-6
    report(4, "second-order membership", ok,
           f"20 configs: max |first diff|={worst1:.2e}, max |second diff|={worst2:.2e} (<=1e-6)")


def test_05_parity_identity():
    rng = np.random.default_rng(5)
    worst = 0.0
    sizes = []
    for k in range(100):
        market, option = _random_config(rng)
        n = 1040 if k == 0 else int(rng.integers(1, 1041))
        times = np.sort(rng.uniform(0.0, option.maturity, size=n))
        times = np.unique(times[times > 0.0])
        amounts = rng.uniform(0.0, 0.4 * market.spot / len(times), size=len(times))
        sched = DividendSchedule(tuple(times), tuple(amounts))
        terms = adjusted_terms(market, option, sched)
        df = math.exp(-market.rate * option.maturity)
        gap = terms.spot - terms.strike * df - (market.spot - option.strike * df - pv_dividends(sched, market.rate))
        worst = max(worst, abs(gap))
        sizes.append(len(sched))
    report(5, "parity identity", worst <= 1e-10,
           f"100 schedules (n up to {max(sizes)}): max gap={worst:.2e} (<=1e-10)")


def test_06_exactness_limits():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(20):
        market, option = _random_config(rng)
        total = rng.uniform(0.5, 0.2 * market.spot)
        for kind in ("call", "put"):
            opt = OptionSpec(option.strike, option.maturity, kind)
            early = proxy_price(market, opt, DividendSchedule((1e-6,), (total,)))
            late = proxy_price(market, opt, DividendSchedule((opt.maturity - 1e-6,), (total,)))
            args = (opt.maturity, market.rate, market.vol, kind)
            ref_early = bs_price(market.spot - total, opt.strike, *args)
            ref_late = bs_price(market.spot, opt.strike + total, *args)
            worst = max(worst, abs(early / ref_early - 1.0), abs(late / ref_late - 1.0))
    report(6, "exactness limits", worst <= 1e-6,
           f"40 options at t=1e-6 and t=T-1e-6: max rel diff={worst:.2e} (<=1e-6)")


def test_07_sensitivities_vs_pde_bumps():
    market = MarketParams(100.0, 0.03, 0.3)
    option = OptionSpec(100.0, 10.0)
    rel1 = max(
        abs(pde_bump_sensitivity(market, option, (t,)) / sensitivity(market, option, t) - 1.0)
        for t in (0.5, 2.0, 5.0, 9.0)
    )
    rel2 = max(
        abs(pde_bump_sensitivity(market, option, pair) / sensitivity(market, option, *pair) - 1.0)
        for pair in ((2.0, 7.0), (1.0, 4.0), (5.0, 8.5))
    )
    ok = rel1 <= 1e-3 and rel2 <= 1e-2
    report(7, "sensitivities vs PDE bumps", ok,
           f"10y ATM: k=1 max rel={rel1:.2e} (<=1e-3), k=2 max rel={rel2:.2e} (<=1e-2)")


def test_08_martingale():
    market = MarketParams(100.0, 0.03, 0.3)
    option = OptionSpec(100.0, 10.0)
    t = 3.0
    worst = 0.0
    for k in (0, 1, 2):
        for a in (0.0, t, 2 * t):
            res = martingale_check(market, option, t, k, a, n_paths=100_000, seed=100 + 10 * k + int(a))
            worst = max(worst, abs(res.sample_mean - res.reference) / res.stderr)
    report(8, "martingale property", worst <= 3.0,
           f"k in {{0,1,2}}, a in {{0,t,2t}}, 1e5 paths: max deviation={worst:.2f} stderr (<=3)")


def test_09_figure_shape():
    market = MarketParams(100.0, 0.03, 0.3)
    option = OptionSpec(100.0, 10.0)
    rows = figure_sweep(market, option, 1.0, 0.5, (0.5, 4.0))
    err = {(c, m): e for c, m, e in rows}
    small = max(abs(err[(0.5, "taylor2")]), abs(err[(0.5, "taylor3")]))
    gs4 = abs(err[(4.0, "gs")])
    t4 = min(abs(err[(4.0, "taylor2")]), abs(err[(4.0, "taylor3")]))
    ok = small <= 0.05 and t4 > gs4
    report(9, "figure shape", ok,
           f"C=0.5 max |taylor err|={small:.4f}% (<=0.05%); C=4 min |taylor err|={t4:.4f}% > |gs err|={gs4:.4f}%")


def test_10_reductions():
    market = MarketParams(100.0, 0.03, 0.3)
    empty = DividendSchedule()
    closed = ("gs", "bv", "bgs", "mm", "taylor2", "taylor3")
    worst_closed = worst_pde = worst_mc = 0.0
    for T in (5.0, 10.0, 15.0, 20.0):
        for ratio in RATIOS:
            for kind in ("call", "put"):
                option = OptionSpec(100.0 * ratio, T, kind)
                ref = bs_price(100.0, option.strike, T, 0.03, 0.3, kind)
                for m in closed:
                    worst_closed = max(worst_closed, abs(price_with(m, market, option, empty)[0] / ref - 1.0))
                worst_pde = max(worst_pde, abs(price_with("pde", market, option, empty)[0] / ref - 1.0))
    for kind in ("call", "put"):
        option = OptionSpec(100.0, 10.0, kind)
        price, stderr = price_with("mc", market, option, empty, mc=McConfig(200_000, 10))
        worst_mc = max(worst_mc, abs(price - bs_price(100.0, 100.0, 10.0, 0.03, 0.3, kind)) / stderr)
    ok = worst_closed <= 1e-8 and worst_pde <= 2e-4 and worst_mc <= 3.0
    report(10, "empty-schedule reductions", ok,
           f"56 options: closed forms max rel={worst_closed:.1e} (<=1e-8), pde max rel={100 * worst_pde:.4f}% "
           f"(<=0.02%), mc within {worst_mc:.2f} stderr")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
