"""Market parameters, option terms and discrete cash-dividend schedules."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal

import numpy as np

from .errors import DomainError

OptionKind = Literal["call", "put"]

CSV_HEADER = ("time_years", "amount")


@dataclass(frozen=True)
class MarketParams:
    spot: float
    rate: float
    vol: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.spot) and self.spot > 0.0):
            raise DomainError("spot must be positive")
        if not math.isfinite(self.rate):
            raise DomainError("rate must be finite")
        if not (math.isfinite(self.vol) and self.vol > 0.0):
            raise DomainError("vol must be positive")


@dataclass(frozen=True)
class OptionSpec:
    strike: float
    maturity: float
    kind: OptionKind = "call"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.strike) and self.strike > 0.0):
            raise DomainError("strike must be positive")
        if not (math.isfinite(self.maturity) and self.maturity > 0.0):
            raise DomainError("maturity must be positive")
        if self.kind not in ("call", "put"):
            raise DomainError(f"unknown option kind {self.kind!r}")


@dataclass(frozen=True)
class DividendSchedule:
    """Ex-dates strictly increasing in (0, inf); amounts non-negative.

    Dividends falling on the same date must be merged by the caller.
    """

    times: tuple[float, ...] = ()
    amounts: tuple[float, ...] = ()
    _t: np.ndarray = field(init=False, repr=False, compare=False)
    _c: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        times = tuple(float(t) for t in self.times)
        amounts = tuple(float(c) for c in self.amounts)
        if len(times) != len(amounts):
            raise DomainError("times and amounts must have the same length")
        t = np.array(times, dtype=float)
        c = np.array(amounts, dtype=float)
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(c))):
            raise DomainError("dividend times and amounts must be finite")
        if t.size and t[0] <= 0.0:
            raise DomainError("dividend dates must be strictly positive")
        if np.any(np.diff(t) <= 0.0):
            raise DomainError("dividend dates must be strictly increasing (merge equal dates)")
        if np.any(c < 0.0):
            raise DomainError("dividend amounts must be non-negative")
        t.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "amounts", amounts)
        object.__setattr__(self, "_t", t)
        object.__setattr__(self, "_c", c)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> "DividendSchedule":
        pairs = list(pairs)
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @classmethod
    def regular(
        cls, every: float, amount: float, start: float, horizon: float
    ) -> "DividendSchedule":
        """Dates ``start, start+every, ...`` strictly below ``horizon``."""
        if every <= 0.0:
            raise DomainError("dividend spacing must be positive")
        if start <= 0.0:
            raise DomainError("first dividend date must be positive")
        # index-based generation avoids drift from repeated addition
        n = max(0, math.ceil((horizon - start) / every - 1e-12))
        times = [start + i * every for i in range(n)]
        times = [t for t in times if t < horizon]
        return cls(tuple(times), tuple(amount for _ in times))

    @property
    def t(self) -> np.ndarray:
        return self._t

    @property
    def c(self) -> np.ndarray:
        return self._c

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self):
        return iter(zip(self.times, self.amounts))

    def scaled(self, factor: float) -> "DividendSchedule":
        return DividendSchedule(self.times, tuple(factor * c for c in self.amounts))

    def with_amounts(self, amounts: Iterable[float]) -> "DividendSchedule":
        return DividendSchedule(self.times, tuple(amounts))


def apply_dividend(pre_div_spot, cash):
    """Liquidator policy: pay ``cash`` if the stock is worth more, else absorb at zero."""
    pre = np.asarray(pre_div_spot, dtype=float)
    out = np.where(pre > cash, pre - cash, 0.0)
    return float(out) if out.ndim == 0 else out


def schedule_within(schedule: DividendSchedule, horizon: float) -> DividendSchedule:
    if horizon <= 0.0:
        raise DomainError("horizon must be positive")
    keep = [(t, c) for t, c in schedule if t < horizon]
    return DividendSchedule.from_pairs(keep)


def pv_dividends(schedule: DividendSchedule, rate: float) -> float:
    if not len(schedule):
        return 0.0
    return float(np.sum(schedule.c * np.exp(-rate * schedule.t)))


def check_inside(schedule: DividendSchedule, option: OptionSpec) -> None:
    if len(schedule) and schedule.times[-1] >= option.maturity:
        raise DomainError("every dividend date must precede the option maturity")


def load_schedule_csv(path: str | Path) -> DividendSchedule:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise DomainError(f"{path}: expected header {','.join(CSV_HEADER)}")
        pairs = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise DomainError(f"{path}:{lineno}: expected 2 columns")
            try:
                pairs.append((float(row[0]), float(row[1])))
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: {exc}") from None
    return DividendSchedule.from_pairs(pairs)


def write_schedule_csv(schedule: DividendSchedule, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for t, c in schedule:
            writer.writerow([repr(t), repr(c)])
