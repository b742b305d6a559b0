"""Benchmark harness: price grids of options by several methods and compare to the PDE."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable

from .baselines import bgs_price, bv_price, moment_match_price
from .errors import DomainError, PricingError
from .market import (
    DividendSchedule,
    MarketParams,
    OptionSpec,
    load_schedule_csv,
    schedule_within,
)
from .oracles import GridConfig, McConfig, mc_price, pde_price
from .proxy import proxy_price
from .sensitivities import taylor_price

METHODS = ("pde", "mm", "bgs", "bv", "gs", "mc", "taylor2", "taylor3")
METHOD_LABELS = {
    "pde": "FD (exact price)",
    "mm": "Method of moments",
    "bgs": "Proxy BGS",
    "bv": "Proxy BV",
    "gs": "Proxy GS",
    "mc": "Monte Carlo",
    "taylor2": "Taylor order 2",
    "taylor3": "Taylor order 3",
}
TABLE_COLUMNS = ("maturity", "strike_ratio", "method", "price", "rel_err_pct", "runtime_ms")
FIGURE_COLUMNS = ("dividend_amount", "method", "rel_err_pct")


def parse_number(value) -> float:
    """Accept plain numbers and fractions such as ``"7/365"``."""
    if isinstance(value, (int, float)):
        return float(value)
    try:
        return float(Fraction(str(value).strip()))
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"not a number: {value!r}") from None


@dataclass(frozen=True)
class ScheduleSource:
    """Either a regular schedule (``every``/``amount``/``start``) or a CSV file."""

    every: float | None = None
    amount: float = 0.0
    start: float | None = None
    csv: str | None = None

    def __post_init__(self) -> None:
        if self.csv is None and self.every is None:
            raise DomainError("schedule needs either 'every' or 'csv'")

    def build(self, maturity: float) -> DividendSchedule:
        if self.csv is not None:
            return schedule_within(load_schedule_csv(self.csv), maturity)
        start = self.every if self.start is None else self.start
        return DividendSchedule.regular(self.every, self.amount, start, maturity)


def price_with(
    method: str,
    market: MarketParams,
    option: OptionSpec,
    schedule: DividendSchedule,
    grid: GridConfig | None = None,
    mc: McConfig | None = None,
) -> tuple[float, float | None]:
    """Price by ``method``; the second item is the Monte Carlo standard error, else None."""
    if method == "pde":
        return pde_price(market, option, schedule, grid), None
    if method == "mc":
        res = mc_price(market, option, schedule, mc)
        return res.price, res.stderr
    pricers: dict[str, Callable] = {
        "gs": proxy_price,
        "bv": bv_price,
        "bgs": bgs_price,
        "mm": moment_match_price,
        "taylor2": lambda m, o, s: taylor_price(2, m, o, s),
        "taylor3": lambda m, o, s: taylor_price(3, m, o, s),
    }
    try:
        fn = pricers[method]
    except KeyError:
        raise DomainError(f"unknown method {method!r}; choose from {', '.join(METHODS)}") from None
    return fn(market, option, schedule), None


@dataclass(frozen=True)
class BenchConfig:
    market: MarketParams
    schedule: ScheduleSource
    strike_ratios: tuple[float, ...]
    maturities: tuple[float, ...]
    methods: tuple[str, ...]
    grid: GridConfig = field(default_factory=GridConfig)
    mc: McConfig = field(default_factory=McConfig)
    kind: str = "call"

    def __post_init__(self) -> None:
        if not self.methods:
            raise DomainError("at least one method is required")
        for m in self.methods:
            if m not in METHODS:
                raise DomainError(f"unknown method {m!r}")
        if not self.strike_ratios or not self.maturities:
            raise DomainError("strike_ratios and maturities must be non-empty")

    @classmethod
    def from_dict(cls, data: dict) -> "BenchConfig":
        try:
            sched = dict(data["schedule"])
            for key in ("every", "start", "amount"):
                if sched.get(key) is not None:
                    sched[key] = parse_number(sched[key])
            return cls(
                market=MarketParams(**{k: parse_number(v) for k, v in data["market"].items()}),
                schedule=ScheduleSource(**sched),
                strike_ratios=tuple(parse_number(k) for k in data["strike_ratios"]),
                maturities=tuple(parse_number(t) for t in data["maturities"]),
                methods=tuple(data["methods"]),
                grid=GridConfig(**data.get("grid", {})),
                mc=McConfig(**data.get("mc", {})),
                kind=data.get("kind", "call"),
            )
        except (KeyError, TypeError) as exc:
            raise DomainError(f"invalid bench config: {exc}") from None

    @classmethod
    def from_json(cls, path: str | Path) -> "BenchConfig":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        csv_path = data.get("schedule", {}).get("csv")
        if csv_path is not None and not Path(csv_path).is_absolute():
            data["schedule"]["csv"] = str(path.parent / csv_path)
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["schedule"] = {k: v for k, v in out["schedule"].items() if v is not None}
        return out


@dataclass(frozen=True)
class ReportRow:
    maturity: float
    strike_ratio: float
    method: str
    price: float
    rel_err_pct: float | None
    runtime_ms: float
    error: str | None = None


@dataclass
class PricingReport:
    rows: list[ReportRow]

    def get(self, maturity: float, strike_ratio: float, method: str) -> ReportRow:
        for row in self.rows:
            if (row.maturity, row.strike_ratio, row.method) == (maturity, strike_ratio, method):
                return row
        raise KeyError((maturity, strike_ratio, method))

    def to_csv(self, runtime: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TABLE_COLUMNS)
        for row in self.rows:
            writer.writerow([
                _fmt(row.maturity),
                _fmt(row.strike_ratio),
                row.method,
                _fmt(row.price),
                "" if row.rel_err_pct is None else _fmt(row.rel_err_pct),
                f"{row.runtime_ms:.3f}" if runtime else "",
            ])
        return buf.getvalue()

    def to_markdown(self) -> str:
        """One table per maturity: a price block then a relative-error block."""
        out = []
        for maturity in sorted({r.maturity for r in self.rows}):
            rows = [r for r in self.rows if r.maturity == maturity]
            ratios = sorted({r.strike_ratio for r in rows})
            methods = [m for m in METHODS if any(r.method == m for r in rows)]
            cell = {(r.strike_ratio, r.method): r for r in rows}
            out.append(f"**Maturity={_fmt(maturity)} years**\n")
            out.append("| K/S0 | " + " | ".join(_fmt(k) for k in ratios) + " |")
            out.append("|---" * (len(ratios) + 1) + "|")
            out.append("| **Price:** |" + " |" * len(ratios))
            for m in methods:
                vals = [_md_price(cell.get((k, m))) for k in ratios]
                out.append(f"| {METHOD_LABELS[m]} | " + " | ".join(vals) + " |")
            err_methods = [m for m in methods if m != "pde"]
            if err_methods and "pde" in methods:
                out.append("| **Relative error (in %):** |" + " |" * len(ratios))
                for m in err_methods:
                    vals = [_md_err(cell.get((k, m))) for k in ratios]
                    out.append(f"| {METHOD_LABELS[m]} | " + " | ".join(vals) + " |")
            out.append("")
        return "\n".join(out)


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _md_price(row: ReportRow | None) -> str:
    if row is None:
        return ""
    if row.error:
        return "n/a"
    return f"{row.price:.2f}"


def _md_err(row: ReportRow | None) -> str:
    if row is None or row.rel_err_pct is None:
        return "n/a"
    return f"{row.rel_err_pct:.2f}"


def _price_cell(args) -> tuple[float, float, str, float, float, str | None]:
    config, maturity, ratio, method = args
    option = OptionSpec(ratio * config.market.spot, maturity, config.kind)
    schedule = config.schedule.build(maturity)
    t0 = time.perf_counter()
    try:
        price, _ = price_with(method, config.market, option, schedule, config.grid, config.mc)
        error = None
    except PricingError as exc:
        price, error = math.nan, f"{type(exc).__name__}: {exc}"
    elapsed = (time.perf_counter() - t0) * 1e3
    return maturity, ratio, method, price, elapsed, error


def run_table(config: BenchConfig, jobs: int = 1) -> PricingReport:
    """Price every (maturity, strike ratio, method) cell.

    A failing method is recorded on its row and does not abort the table. Rows are
    ordered by (maturity, strike ratio, method position) whatever the completion order.
    """
    tasks = [
        (config, t, k, m)
        for t in config.maturities
        for k in config.strike_ratios
        for m in config.methods
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_price_cell, tasks))
    else:
        results = [_price_cell(task) for task in tasks]

    reference = {(t, k): p for t, k, m, p, _, err in results if m == "pde" and err is None}
    order = {m: i for i, m in enumerate(METHODS)}
    rows = []
    for t, k, m, p, ms, err in sorted(results, key=lambda r: (r[0], r[1], order[r[2]])):
        ref = reference.get((t, k))
        if m == "pde" and err is None:
            rel = 0.0
        elif ref is None or err is not None:
            rel = None
        else:
            rel = 100.0 * (p - ref) / ref
        rows.append(ReportRow(t, k, m, p, rel, ms, err))
    return PricingReport(rows)


def amount_grid(start: float, stop: float, step: float) -> list[float]:
    if step <= 0.0:
        raise DomainError("amount step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 12) for i in range(n + 1)]


def figure_sweep(
    market: MarketParams,
    option: OptionSpec,
    every: float,
    start: float,
    amounts: Iterable[float],
    methods: Iterable[str] = ("taylor2", "taylor3", "gs"),
    grid: GridConfig | None = None,
    mc: McConfig | None = None,
) -> list[tuple[float, str, float]]:
    """Relative error (in %) against the PDE for a regular dividend of varying size."""
    methods = tuple(methods)
    rows = []
    for amount in amounts:
        schedule = DividendSchedule.regular(every, amount, start, option.maturity)
        ref = pde_price(market, option, schedule, grid)
        for m in methods:
            price, _ = price_with(m, market, option, schedule, grid, mc)
            rows.append((amount, m, 100.0 * (price - ref) / ref))
    return rows


def figure_csv(rows: Iterable[tuple[float, str, float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FIGURE_COLUMNS)
    for amount, method, err in rows:
        writer.writerow([_fmt(amount), method, _fmt(err)])
    return buf.getvalue()
