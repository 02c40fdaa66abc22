"""Dated level and return series, day counts and CSV ingestion.

Every engine and diagnostic in the package consumes :class:`LevelSeries`.
Dates are plain calendar dates; the observations themselves define the
trading calendar, and calendar-day gaps between them drive cash accrual.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import os
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Literal, Sequence, Union

import numpy as np

from .errors import InputValidationError, MissingRateError

DateLike = Union[date, str]
ReturnKind = Literal["simple", "log"]


def _as_date(value: DateLike) -> date:
    if isinstance(value, date):
        return value
    return date.fromisoformat(str(value).strip())


def _frozen_array(values: Iterable[float]) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


def _check_dates(dates: Sequence[date], label: str) -> None:
    for i in range(1, len(dates)):
        if dates[i] <= dates[i - 1]:
            kind = "duplicate" if dates[i] == dates[i - 1] else "out-of-order"
            raise InputValidationError(
                f"{label}: {kind} date {dates[i].isoformat()} at position {i}"
            )


@dataclass(frozen=True)
class LevelSeries:
    """Strictly positive index or price levels on strictly increasing dates."""

    dates: tuple[date, ...]
    levels: np.ndarray
    label: str = ""

    def __init__(self, dates: Sequence[DateLike], levels: Sequence[float], label: str = ""):
        ds = tuple(_as_date(d) for d in dates)
        lv = _frozen_array(levels)
        if lv.ndim != 1 or len(ds) != len(lv):
            raise InputValidationError(
                f"{label or 'series'}: {len(ds)} dates but {lv.size} levels"
            )
        _check_dates(ds, label or "series")
        bad = np.flatnonzero(~(np.isfinite(lv) & (lv > 0)))
        if bad.size:
            i = int(bad[0])
            raise InputValidationError(
                f"{label or 'series'}: level {lv[i]!r} at position {i} is not a positive finite number"
            )
        object.__setattr__(self, "dates", ds)
        object.__setattr__(self, "levels", lv)
        object.__setattr__(self, "label", label)

    def __len__(self) -> int:
        return len(self.dates)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LevelSeries):
            return NotImplemented
        return (
            self.dates == other.dates
            and self.label == other.label
            and np.array_equal(self.levels, other.levels)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def start(self) -> date:
        return self.dates[0]

    @property
    def end(self) -> date:
        return self.dates[-1]

    def day_gaps(self) -> np.ndarray:
        """Calendar days between consecutive observations (length n-1)."""
        return np.array(
            [(b - a).days for a, b in zip(self.dates[:-1], self.dates[1:])], dtype=np.int64
        )

    def rebased(self, base: float = 100.0) -> "LevelSeries":
        return LevelSeries(self.dates, self.levels * (base / self.levels[0]), self.label)

    def window(self, start: int, stop: int | None = None) -> "LevelSeries":
        return LevelSeries(self.dates[start:stop], self.levels[start:stop], self.label)

    def returns(self, kind: ReturnKind = "simple", n: int = 1) -> "ReturnSeries":
        return to_returns(self, kind, n)


@dataclass(frozen=True)
class ReturnSeries:
    """Returns over a horizon of ``n`` observations, dated at the period end."""

    dates: tuple[date, ...]
    values: np.ndarray
    kind: ReturnKind = "simple"
    n: int = 1

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(_as_date(d) for d in self.dates))
        object.__setattr__(self, "values", _frozen_array(self.values))
        if self.kind not in ("simple", "log"):
            raise InputValidationError(f"unknown return kind {self.kind!r}")
        if len(self.dates) != len(self.values):
            raise InputValidationError("return dates and values differ in length")
        if self.kind == "simple" and np.any(self.values <= -1.0):
            raise InputValidationError("simple returns must be greater than -1")

    def __len__(self) -> int:
        return len(self.values)


def to_returns(series: LevelSeries, kind: ReturnKind = "simple", n: int = 1) -> ReturnSeries:
    """Horizon-``n`` returns ``B_t/B_{t-n} - 1`` or ``ln(B_t/B_{t-n})``.

    Raises:
        InputValidationError: if ``n < 1`` or the series has ``n`` or fewer levels.
    """
    if n < 1:
        raise InputValidationError(f"return horizon must be >= 1, got {n}")
    if len(series) <= n:
        raise InputValidationError(
            f"need more than {n} levels for {n}-observation returns, got {len(series)}"
        )
    ratio = series.levels[n:] / series.levels[:-n]
    if kind == "simple":
        values = ratio - 1.0
    elif kind == "log":
        values = np.log(ratio)
    else:
        raise InputValidationError(f"unknown return kind {kind!r}")
    return ReturnSeries(series.dates[n:], values, kind, n)


def compound(returns: ReturnSeries, base: float) -> np.ndarray:
    """Rebuild levels from one-period simple returns, starting at ``base``."""
    if returns.kind != "simple" or returns.n != 1:
        raise InputValidationError("compounding needs one-period simple returns")
    return base * np.concatenate(([1.0], np.cumprod(1.0 + returns.values)))


class DayCount(enum.Enum):
    ACT_360 = "ACT/360"
    ACT_365 = "ACT/365"

    @property
    def denominator(self) -> int:
        return 360 if self is DayCount.ACT_360 else 365

    @classmethod
    def parse(cls, value: "DayCount | str") -> "DayCount":
        if isinstance(value, DayCount):
            return value
        key = str(value).strip().upper().replace("_", "/")
        for member in cls:
            if member.value == key:
                return member
        raise InputValidationError(f"unknown day count convention {value!r}")


def year_fraction(dc: DayCount | str, d1: DateLike, d2: DateLike) -> float:
    """Actual calendar days from ``d1`` to ``d2`` over the convention's denominator."""
    a, b = _as_date(d1), _as_date(d2)
    if b < a:
        raise InputValidationError(f"end date {b} precedes start date {a}")
    return (b - a).days / DayCount.parse(dc).denominator


@dataclass(frozen=True)
class RateSeries:
    """Annualized money-market rates (decimal per annum) keyed by date.

    Unlike levels, rates may be zero or negative.
    """

    dates: tuple[date, ...]
    rates: np.ndarray
    label: str = ""
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ds = tuple(_as_date(d) for d in self.dates)
        rs = _frozen_array(self.rates)
        if len(ds) != len(rs):
            raise InputValidationError("rate dates and values differ in length")
        _check_dates(ds, self.label or "rates")
        if not np.all(np.isfinite(rs)):
            raise InputValidationError(f"{self.label or 'rates'}: non-finite rate")
        object.__setattr__(self, "dates", ds)
        object.__setattr__(self, "rates", rs)
        object.__setattr__(self, "_index", {d: i for i, d in enumerate(ds)})

    @classmethod
    def flat(cls, rate: float, dates: Sequence[DateLike], label: str = "flat") -> "RateSeries":
        return cls(tuple(dates), np.full(len(dates), float(rate)), label)

    def __len__(self) -> int:
        return len(self.dates)

    def __contains__(self, when: date) -> bool:
        return when in self._index

    def rate_on(self, when: date) -> float:
        try:
            return float(self.rates[self._index[when]])
        except KeyError:
            raise MissingRateError(when) from None


# --- CSV ------------------------------------------------------------------


def _read_rows(path: str | os.PathLike, date_col: str, value_col: str):
    if not os.path.exists(path):
        raise InputValidationError(f"input file not found: {os.fspath(path)}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in (date_col, value_col) if c not in header]
        if missing:
            raise InputValidationError(
                f"{os.fspath(path)}: missing column(s) {missing}; header is {header}"
            )
        rows = []
        # data rows are numbered from 1; the header is line 1 of the file
        for rowno, rec in enumerate(reader, start=1):
            raw_date, raw_value = rec[date_col], rec[value_col]
            try:
                d = date.fromisoformat((raw_date or "").strip())
            except ValueError:
                raise InputValidationError(
                    f"{os.fspath(path)}: row {rowno}: unparseable date {raw_date!r}"
                ) from None
            try:
                v = float((raw_value or "").strip())
            except ValueError:
                raise InputValidationError(
                    f"{os.fspath(path)}: row {rowno}: unparseable number {raw_value!r}"
                ) from None
            rows.append((d, v, rowno))
    if not rows:
        raise InputValidationError(f"{os.fspath(path)}: no data rows")
    rows.sort(key=lambda r: r[0])
    for prev, cur in zip(rows, rows[1:]):
        if prev[0] == cur[0]:
            raise InputValidationError(
                f"{os.fspath(path)}: row {cur[2]}: duplicate date {cur[0].isoformat()}"
            )
    return rows


def ingest_csv(
    path: str | os.PathLike,
    date_col: str = "date",
    level_col: str = "level",
    label: str | None = None,
) -> LevelSeries:
    """Read a ``date,level`` CSV into a validated :class:`LevelSeries`.

    Rows may appear in any order; the result is sorted by date. Errors name
    the offending data row (1-based, header excluded).
    """
    rows = _read_rows(path, date_col, level_col)
    for d, v, rowno in rows:
        if not (math.isfinite(v) and v > 0):
            raise InputValidationError(
                f"{os.fspath(path)}: row {rowno}: level {v!r} must be positive"
            )
    if label is None:
        label = os.path.splitext(os.path.basename(path))[0]
    return LevelSeries([r[0] for r in rows], [r[1] for r in rows], label)


def ingest_rates_csv(
    path: str | os.PathLike, date_col: str = "date", rate_col: str = "rate"
) -> RateSeries:
    """Read a ``date,rate`` CSV (decimal per annum)."""
    rows = _read_rows(path, date_col, rate_col)
    for d, v, rowno in rows:
        if not math.isfinite(v):
            raise InputValidationError(f"{os.fspath(path)}: row {rowno}: rate {v!r} is not finite")
    label = os.path.splitext(os.path.basename(path))[0]
    return RateSeries(tuple(r[0] for r in rows), np.array([r[1] for r in rows]), label)


def format_csv(
    dates: Sequence[date], values: Sequence[float], date_col: str = "date", value_col: str = "level"
) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([date_col, value_col])
    for d, v in zip(dates, values):
        # repr round-trips a double exactly
        writer.writerow([d.isoformat(), repr(float(v))])
    return buf.getvalue()


def write_csv(
    series: LevelSeries, path: str | os.PathLike, date_col: str = "date", level_col: str = "level"
) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_csv(series.dates, series.levels, date_col, level_col))
