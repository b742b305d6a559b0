"""Command-line front end.

Subcommands: ``price``, ``table``, ``figure``, ``sens``. Exit status is 0 on success,
1 on usage or input errors and 2 on numerical failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import (
    METHODS,
    BenchConfig,
    amount_grid,
    figure_csv,
    figure_sweep,
    parse_number,
    price_with,
    run_table,
)
from .errors import DomainError, PricingError
from .market import DividendSchedule, MarketParams, OptionSpec, load_schedule_csv, schedule_within
from .oracles import GridConfig, McConfig, pde_bump_sensitivity
from .sensitivities import SensitivityRequest, dividend_sensitivity

EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise UsageError(f"{self.prog}: error: {message}")


def _number(text: str) -> float:
    try:
        return parse_number(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_market(p: argparse.ArgumentParser) -> None:
    p.add_argument("--spot", type=_number, required=True)
    p.add_argument("--rate", type=_number, required=True)
    p.add_argument("--vol", type=_number, required=True)
    p.add_argument("--strike", type=_number, required=True)
    p.add_argument("--maturity", type=_number, required=True)
    p.add_argument("--kind", choices=("call", "put"), default="call")


def _add_schedule(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("dividends")
    g.add_argument("--div-every", type=_number, help="spacing in years, e.g. 1 or 7/365")
    g.add_argument("--div-amount", type=_number, default=0.0)
    g.add_argument("--div-start", type=_number, help="first ex-date (default: one spacing)")
    g.add_argument("--div-csv", type=Path, help="CSV with header time_years,amount")


def _add_numerics(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("numerics")
    g.add_argument("--grid-nodes", type=int, default=GridConfig.space_nodes)
    g.add_argument("--grid-steps", type=int, default=GridConfig.steps_per_year)
    g.add_argument("--grid-width", type=float, default=GridConfig.space_width)
    g.add_argument("--rannacher", type=int, default=GridConfig.rannacher_steps)
    g.add_argument("--mc-paths", type=int, default=McConfig.n_paths)
    g.add_argument("--seed", type=int, default=McConfig.seed)
    g.add_argument("--no-antithetic", action="store_true")


def _grid(args) -> GridConfig:
    return GridConfig(args.grid_nodes, args.grid_steps, args.grid_width, args.rannacher)


def _mc(args) -> McConfig:
    return McConfig(args.mc_paths, args.seed, not args.no_antithetic)


def _schedule(args, maturity: float) -> DividendSchedule:
    if args.div_csv is not None:
        if args.div_every is not None:
            raise UsageError("use either --div-csv or --div-every, not both")
        return schedule_within(load_schedule_csv(args.div_csv), maturity)
    if args.div_every is None:
        return DividendSchedule()
    start = args.div_every if args.div_start is None else args.div_start
    return DividendSchedule.regular(args.div_every, args.div_amount, start, maturity)


def cmd_price(args) -> int:
    market = MarketParams(args.spot, args.rate, args.vol)
    option = OptionSpec(args.strike, args.maturity, args.kind)
    schedule = _schedule(args, option.maturity)
    price, stderr = price_with(args.method, market, option, schedule, _grid(args), _mc(args))
    print(
        f"method={args.method} kind={option.kind} spot={market.spot:g} rate={market.rate:g} "
        f"vol={market.vol:g} strike={option.strike:g} maturity={option.maturity:g} "
        f"dividends={len(schedule)}"
    )
    line = f"price={price:.10g}"
    if stderr is not None:
        line += f" stderr={stderr:.3g}"
    print(line)
    return 0


def cmd_table(args) -> int:
    config = BenchConfig.from_json(args.config)
    if args.methods:
        data = config.to_dict()
        data["methods"] = args.methods.split(",")
        config = BenchConfig.from_dict(data)
    report = run_table(config, jobs=args.jobs)
    csv_text = report.to_csv(runtime=not args.no_timing)
    md_text = report.to_markdown()
    if args.csv:
        args.csv.write_text(csv_text, encoding="utf-8")
    if args.markdown:
        args.markdown.write_text(md_text + "\n", encoding="utf-8")
    if not args.csv and not args.markdown:
        sys.stdout.write(md_text + "\n")
    failures = [r for r in report.rows if r.error]
    for r in failures:
        print(f"T={r.maturity:g} K/S0={r.strike_ratio:g} {r.method}: {r.error}", file=sys.stderr)
    return 0


def cmd_figure(args) -> int:
    market = MarketParams(args.spot, args.rate, args.vol)
    option = OptionSpec(args.strike, args.maturity, args.kind)
    amounts = amount_grid(args.amount_min, args.amount_max, args.amount_step)
    rows = figure_sweep(
        market, option, args.div_every, args.div_start, amounts,
        methods=args.methods.split(","), grid=_grid(args), mc=_mc(args),
    )
    text = figure_csv(rows)
    if args.csv:
        args.csv.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_sens(args) -> int:
    market = MarketParams(args.spot, args.rate, args.vol)
    option = OptionSpec(args.strike, args.maturity, args.kind)
    req = SensitivityRequest(market, option, tuple(args.time))
    exact = dividend_sensitivity(req)
    times = ",".join(f"{t:g}" for t in req.div_times)
    print(f"order={len(req.div_times)} times={times} sensitivity={exact:.12g}")
    if args.check:
        bump = pde_bump_sensitivity(market, option, req.div_times, args.bump, _grid(args))
        diff = exact - bump
        rel = abs(diff) / abs(bump) if bump else float("inf")
        print(f"pde_bump={bump:.12g} difference={diff:.3e} relative={rel:.3e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cashdiv", description="European options with discrete cash dividends.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("price", help="price one option")
    p.add_argument("--method", choices=METHODS, default="gs")
    _add_market(p)
    _add_schedule(p)
    _add_numerics(p)
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("table", help="reproduce an accuracy table from a JSON config")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--methods", help="comma-separated override of the config's methods")
    p.add_argument("--csv", type=Path)
    p.add_argument("--markdown", type=Path)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-timing", action="store_true", help="leave runtime_ms empty (byte-stable CSV)")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("figure", help="relative error of Taylor prices vs dividend size")
    p.add_argument("--spot", type=_number, default=100.0)
    p.add_argument("--rate", type=_number, default=0.03)
    p.add_argument("--vol", type=_number, default=0.30)
    p.add_argument("--strike", type=_number, default=100.0)
    p.add_argument("--maturity", type=_number, default=10.0)
    p.add_argument("--kind", choices=("call", "put"), default="call")
    p.add_argument("--div-every", type=_number, default=1.0)
    p.add_argument("--div-start", type=_number, default=0.5)
    p.add_argument("--amount-min", type=_number, default=0.0)
    p.add_argument("--amount-max", type=_number, default=6.0)
    p.add_argument("--amount-step", type=_number, default=0.25)
    p.add_argument("--methods", default="taylor2,taylor3,gs")
    p.add_argument("--csv", type=Path)
    _add_numerics(p)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("sens", help="exact dividend sensitivity at zero dividends")
    _add_market(p)
    p.add_argument("--time", type=_number, action="append", required=True,
                   help="dividend date; repeat up to three times")
    p.add_argument("--check", action="store_true", help="compare with a PDE bump estimate")
    p.add_argument("--bump", type=_number, default=None, help="bump size (default 1e-4 * spot)")
    _add_numerics(p)
    p.set_defaults(func=cmd_sens)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"cashdiv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PricingError as exc:
        print(f"cashdiv: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"cashdiv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
