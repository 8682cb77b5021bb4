"""Calendars, election-cycle windows, series containers and long differences.

Dates are carried as ``numpy.datetime64[D]`` and months as
``numpy.datetime64[M]``. Every container is immutable after construction:
the value arrays are flagged read-only so estimation code running several
horizons at once can share them safely.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import MissingData, OutOfRange, OverlapError

NO_CYCLE = -1
PARTIES = ("R", "D")
UNITS = ("probability", "log-price", "percent", "percent-change", "count", "pp", "level", "indicator")


def as_date(value) -> np.datetime64:
    """Coerce str / date / datetime64 to ``datetime64[D]``."""
    if isinstance(value, np.datetime64):
        return value.astype("datetime64[D]")
    if isinstance(value, _dt.datetime):
        value = value.date()
    return np.datetime64(value, "D")


def as_month(value) -> np.datetime64:
    if isinstance(value, np.datetime64):
        return value.astype("datetime64[M]")
    if isinstance(value, (_dt.date, _dt.datetime)):
        return np.datetime64(f"{value.year:04d}-{value.month:02d}", "M")
    return np.datetime64(str(value)[:7], "M")


def _frozen(arr) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TradingCalendar:
    """Strictly increasing business dates."""

    dates: np.ndarray

    def __post_init__(self):
        dates = np.asarray(self.dates).astype("datetime64[D]")
        if dates.ndim != 1:
            raise ValueError("calendar dates must be one-dimensional")
        if len(dates) > 1 and not np.all(dates[1:] > dates[:-1]):
            raise ValueError("calendar dates must be strictly increasing")
        object.__setattr__(self, "dates", _frozen(dates))

    @classmethod
    def from_dates(cls, dates: Iterable) -> "TradingCalendar":
        """Build from any iterable of dates, sorting and de-duplicating."""
        arr = np.array([as_date(d) for d in dates], dtype="datetime64[D]")
        return cls(np.unique(arr))

    @classmethod
    def business_days(cls, start, end) -> "TradingCalendar":
        start, end = as_date(start), as_date(end)
        first = np.busday_offset(start, 0, roll="forward")
        n = int(np.busday_count(first, end + 1))
        return cls(np.busday_offset(first, np.arange(n), roll="forward"))

    def __len__(self) -> int:
        return len(self.dates)

    def __contains__(self, date) -> bool:
        d = as_date(date)
        i = np.searchsorted(self.dates, d)
        return bool(i < len(self.dates) and self.dates[i] == d)

    def position(self, date) -> int:
        d = as_date(date)
        i = int(np.searchsorted(self.dates, d))
        if i >= len(self.dates) or self.dates[i] != d:
            raise OutOfRange(f"{d} is not a calendar date")
        return i

    def positions(self, dates) -> np.ndarray:
        """Vectorised :meth:`position`; non-members map to -1."""
        d = np.asarray(dates).astype("datetime64[D]")
        idx = np.searchsorted(self.dates, d)
        ok = idx < len(self.dates)
        ok[ok] = self.dates[idx[ok]] == d[ok]
        return np.where(ok, idx, -1)

    def next_on_or_after(self, date) -> Optional[int]:
        i = int(np.searchsorted(self.dates, as_date(date)))
        return i if i < len(self.dates) else None

    def intersect(self, other: "TradingCalendar") -> "TradingCalendar":
        return TradingCalendar(np.intersect1d(self.dates, other.dates))


def intersect_calendars(**calendars: TradingCalendar):
    """Intersection calendar plus an audit of the dates each source loses.

    Returns ``(calendar, dropped)`` where ``dropped[name]`` holds the dates of
    source ``name`` that are absent from the intersection.
    """
    if not calendars:
        raise ValueError("need at least one calendar")
    common = None
    for cal in calendars.values():
        common = cal.dates if common is None else np.intersect1d(common, cal.dates)
    dropped = {name: np.setdiff1d(cal.dates, common) for name, cal in calendars.items()}
    return TradingCalendar(common), dropped


@dataclass(frozen=True)
class ElectionCycle:
    """One election window.

    ``incumbent`` is the party of the sitting president; a mapping of
    date -> party may be supplied through ``incumbent_changes`` for the rare
    window that straddles an administration change (keys are the first date
    the new party holds office).
    """

    cycle_id: int
    first_date: np.datetime64
    last_date: np.datetime64
    election_date: np.datetime64
    incumbent: str
    winner: Optional[str] = None
    incumbent_changes: Mapping = field(default_factory=dict)

    def __post_init__(self):
        for name in ("first_date", "last_date", "election_date"):
            object.__setattr__(self, name, as_date(getattr(self, name)))
        if not (self.first_date <= self.election_date <= self.last_date):
            raise ValueError(f"cycle {self.cycle_id}: need first <= election <= last")
        if self.incumbent not in PARTIES:
            raise ValueError(f"incumbent must be one of {PARTIES}")
        if self.winner is not None and self.winner not in PARTIES:
            raise ValueError(f"winner must be one of {PARTIES} or None")
        changes = {as_date(k): v for k, v in dict(self.incumbent_changes).items()}
        object.__setattr__(self, "incumbent_changes", changes)

    def contains(self, date) -> bool:
        d = as_date(date)
        return bool(self.first_date <= d <= self.last_date)

    def incumbent_on(self, date) -> str:
        d = as_date(date)
        party = self.incumbent
        for start in sorted(self.incumbent_changes):
            if d >= start:
                party = self.incumbent_changes[start]
        return party


def check_disjoint(cycles: Sequence[ElectionCycle]) -> list:
    ordered = sorted(cycles, key=lambda c: c.first_date)
    for a, b in zip(ordered, ordered[1:]):
        if b.first_date <= a.last_date:
            raise OverlapError(f"cycles {a.cycle_id} and {b.cycle_id} overlap")
    ids = [c.cycle_id for c in ordered]
    if len(set(ids)) != len(ids):
        raise OverlapError("duplicate cycle ids")
    return ordered


def cycle_mask(calendar: TradingCalendar, cycles: Sequence[ElectionCycle]) -> np.ndarray:
    """Cycle id of each calendar date, ``NO_CYCLE`` between cycles."""
    mask = np.full(len(calendar), NO_CYCLE, dtype=np.int64)
    for c in check_disjoint(cycles):
        inside = (calendar.dates >= c.first_date) & (calendar.dates <= c.last_date)
        mask[inside] = c.cycle_id
    return mask


def position_in_cycle(mask: np.ndarray) -> np.ndarray:
    """0-based position of each date inside its cycle run; -1 outside cycles."""
    pos = np.full(len(mask), -1, dtype=np.int64)
    run = -1
    for i, cid in enumerate(mask):
        if cid == NO_CYCLE:
            run = -1
            continue
        run = run + 1 if i > 0 and mask[i - 1] == cid else 0
        pos[i] = run
    return pos


def lag_sufficient(mask: np.ndarray, n_lags: int) -> np.ndarray:
    """True where ``n_lags`` earlier dates exist inside the same cycle."""
    return position_in_cycle(mask) >= n_lags


def pres_r_indicator(calendar: TradingCalendar, cycles: Sequence[ElectionCycle]) -> np.ndarray:
    """1.0 when a Republican holds office, 0.0 for a Democrat, NaN outside cycles."""
    out = np.full(len(calendar), np.nan)
    for c in cycles:
        inside = np.flatnonzero((calendar.dates >= c.first_date) & (calendar.dates <= c.last_date))
        for i in inside:
            out[i] = 1.0 if c.incumbent_on(calendar.dates[i]) == "R" else 0.0
    return out


@dataclass(frozen=True)
class DailySeries:
    """Values on a trading calendar; NaN marks a missing observation."""

    calendar: TradingCalendar
    values: np.ndarray
    unit: str = "level"
    name: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (len(self.calendar),):
            raise ValueError(f"{self.name or 'series'}: {vals.shape[0]} values for "
                             f"{len(self.calendar)} calendar dates")
        if self.unit not in UNITS:
            raise ValueError(f"unknown unit {self.unit!r}")
        if self.unit == "probability":
            present = vals[~np.isnan(vals)]
            if np.any((present < 0) | (present > 1)):
                raise ValueError(f"{self.name or 'series'}: probability outside [0, 1]")
        object.__setattr__(self, "values", _frozen(vals))

    @classmethod
    def from_mapping(cls, calendar: TradingCalendar, data: Mapping, unit="level", name=""):
        """Place ``date -> value`` pairs on ``calendar``; off-calendar keys raise."""
        vals = np.full(len(calendar), np.nan)
        for d, v in data.items():
            vals[calendar.position(d)] = v
        return cls(calendar, vals, unit, name)

    @property
    def dates(self) -> np.ndarray:
        return self.calendar.dates

    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    def __getitem__(self, date) -> float:
        return float(self.values[self.calendar.position(date)])

    def reindex(self, calendar: TradingCalendar) -> "DailySeries":
        """Restrict or extend to another calendar; new dates are missing."""
        vals = np.full(len(calendar), np.nan)
        pos = self.calendar.positions(calendar.dates)
        have = pos >= 0
        vals[have] = self.values[pos[have]]
        return DailySeries(calendar, vals, self.unit, self.name)

    def with_values(self, values, unit=None, name=None) -> "DailySeries":
        return DailySeries(self.calendar, values, unit or self.unit, self.name if name is None else name)


@dataclass(frozen=True)
class MonthlySeries:
    """Values on a contiguous run of months; NaN marks a missing month."""

    months: np.ndarray
    values: np.ndarray
    unit: str = "level"
    name: str = ""

    def __post_init__(self):
        months = np.asarray(self.months).astype("datetime64[M]")
        vals = np.asarray(self.values, dtype=float)
        if months.shape != vals.shape or months.ndim != 1:
            raise ValueError("months and values must be equal-length vectors")
        if len(months) > 1 and not np.all(np.diff(months).astype(int) == 1):
            raise ValueError("months must be strictly increasing and contiguous")
        if self.unit not in UNITS:
            raise ValueError(f"unknown unit {self.unit!r}")
        object.__setattr__(self, "months", _frozen(months))
        object.__setattr__(self, "values", _frozen(vals))

    @classmethod
    def from_mapping(cls, data: Mapping, unit="level", name="") -> "MonthlySeries":
        """Build from ``month -> value``; gaps between months become NaN."""
        if not data:
            return cls(np.array([], dtype="datetime64[M]"), np.array([]), unit, name)
        keyed = {as_month(k): float(v) for k, v in data.items()}
        lo, hi = min(keyed), max(keyed)
        months = np.arange(lo, hi + 1, dtype="datetime64[M]")
        vals = np.array([keyed.get(m, np.nan) for m in months])
        return cls(months, vals, unit, name)

    def position(self, month) -> int:
        m = as_month(month)
        if len(self.months) == 0 or m < self.months[0] or m > self.months[-1]:
            raise OutOfRange(f"{m} outside series months")
        return int((m - self.months[0]).astype(int))

    def __getitem__(self, month) -> float:
        return float(self.values[self.position(month)])

    def reindex(self, months) -> "MonthlySeries":
        months = np.asarray(months).astype("datetime64[M]")
        vals = np.full(len(months), np.nan)
        if len(self.months):
            off = (months - self.months[0]).astype(int)
            ok = (off >= 0) & (off < len(self.months))
            vals[ok] = self.values[off[ok]]
        return MonthlySeries(months, vals, self.unit, self.name)


def long_difference(series, t, h: int) -> float:
    """``y[t+h] - y[t-1]`` with t-1 the previous period of the series.

    Works for :class:`DailySeries` (business-day steps) and
    :class:`MonthlySeries` (month steps).
    """
    if h < 0:
        raise ValueError("horizon must be non-negative")
    if isinstance(series, MonthlySeries):
        p = series.position(t)
        n = len(series.months)
    else:
        p = series.calendar.position(t)
        n = len(series.calendar)
    if p + h >= n:
        raise OutOfRange(f"t+{h} runs past the end of the series")
    if p == 0:
        raise MissingData(f"no period before {t}")
    hi, lo = series.values[p + h], series.values[p - 1]
    if np.isnan(hi) or np.isnan(lo):
        raise MissingData(f"missing endpoint for long difference at {t}, h={h}")
    return float(hi - lo)


def long_differences(values: np.ndarray, h: int) -> np.ndarray:
    """Vectorised long difference; NaN where either endpoint is unavailable."""
    values = np.asarray(values, dtype=float)
    n = len(values)
    out = np.full(n, np.nan)
    if h < 0:
        raise ValueError("horizon must be non-negative")
    if n - h - 1 > 0:
        out[1:n - h] = values[1 + h:] - values[:n - h - 1]
    return out


def lagged_change(values: np.ndarray, span: int, lag: int = 1) -> np.ndarray:
    """``y[t-lag] - y[t-lag-span]`` (e.g. the one-month change dated t-1)."""
    values = np.asarray(values, dtype=float)
    out = np.full(len(values), np.nan)
    k = lag + span
    if len(values) > k:
        out[k:] = values[span:len(values) - lag] - values[:len(values) - k]
    return out


def shift(values: np.ndarray, s: int) -> np.ndarray:
    """``out[t] = values[t - s]`` with NaN fill (s > 0 lags, s < 0 leads)."""
    values = np.asarray(values, dtype=float)
    out = np.full(len(values), np.nan)
    if s == 0:
        out[:] = values
    elif s > 0:
        out[s:] = values[:-s] if s < len(values) else []
    else:
        out[:s] = values[-s:] if -s < len(values) else []
    return out
