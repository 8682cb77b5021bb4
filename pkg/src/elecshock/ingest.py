"""Readers and writers for the market, asset, vintage, release and employment CSVs.

All files are UTF-8, comma separated, ISO dates. Lines starting with ``#``
are comments (output files carry a provenance header there) and are skipped
by every reader.
"""

from __future__ import annotations

import csv
import io
import math
import re
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import DegenerateQuote, NotYetPublished, SchemaError
from .timeline import DailySeries, MonthlySeries, TradingCalendar, as_date, as_month

MARKET_HEADER = ("date", "contract", "last_price", "units")
VINTAGE_HEADER = ("series", "obs_period", "publication_date", "value")
RELEASE_HEADER = ("series", "release_date", "obs_period")
ASSET_HEADER = ("date", "series", "close")
EMPLOYMENT_HEADER = ("month", "industry", "employment")
EVENTS_HEADER = ("date", "label", "description")

_CONTRACT = re.compile(r"^(DEM|REP)(\d{2})_WTA$")

# NAICS groupings used for the monthly employment responses.
INDUSTRIES = {
    "oil_drilling_extraction": ("211", "213111", "213112"),
    "mining_quarrying": ("212", "213113", "213114", "213115"),
    "clean_energy_generation": ("221111", "221112", "221113", "221114", "221115", "221116"),
    "aerospace_manufacturing": ("3364",),
    "ship_manufacturing": ("336992",),
    "tank_manufacturing": ("3366",),
}


def fmt_float(x: float) -> str:
    """Shortest round-tripping text for a float."""
    return repr(float(x))


def _read_rows(source, header: Sequence[str]):
    """Yield ``(line_no, row_dict)`` from a path, text, or file object."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                      and "," not in source and source.strip()):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = str(source)
    lines = [(i + 1, ln) for i, ln in enumerate(text.splitlines())
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        return
    reader = csv.reader([ln for _, ln in lines])
    cols = [c.strip() for c in next(reader)]
    absent = [c for c in header if c not in cols]
    if absent:
        raise SchemaError(f"missing column(s) {absent}; expected header {','.join(header)}")
    for (line_no, _), row in zip(lines[1:], reader):
        if len(row) != len(cols):
            raise SchemaError(f"line {line_no}: expected {len(cols)} fields, got {len(row)}")
        yield line_no, {c: v.strip() for c, v in zip(cols, row)}


def _write_csv(rows, header, path=None, comments=()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


@dataclass(frozen=True, order=True)
class ContractQuote:
    date: np.datetime64
    contract_id: str
    last_price: float
    units_traded: int

    def __post_init__(self):
        object.__setattr__(self, "date", as_date(self.date))
        if not self.last_price >= 0:
            raise ValueError(f"negative price {self.last_price} for {self.contract_id}")
        if self.units_traded < 0:
            raise ValueError(f"negative volume {self.units_traded} for {self.contract_id}")

    @property
    def party(self) -> Optional[str]:
        return contract_party(self.contract_id)


def contract_party(contract_id: str) -> Optional[str]:
    """'D' / 'R' for winner-take-all party contracts, None for anything else."""
    m = _CONTRACT.match(contract_id)
    if not m:
        return None
    return "D" if m.group(1) == "DEM" else "R"


def parse_market_file(source) -> list:
    """Parse a ``date,contract,last_price,units`` file into quotes.

    Malformed rows are collected and reported together with their line numbers.
    """
    quotes, bad, seen = [], [], set()
    for line_no, row in _read_rows(source, MARKET_HEADER):
        try:
            date = as_date(row["date"])
            price = float(row["last_price"])
            units = float(row["units"])
            if not math.isfinite(price) or units != int(units):
                raise ValueError("non-finite price or fractional units")
        except ValueError as exc:
            bad.append(f"line {line_no}: {exc}")
            continue
        if price < 0 or units < 0:
            raise ValueError(f"line {line_no}: negative price or volume")
        key = (date, row["contract"])
        if key in seen:
            bad.append(f"line {line_no}: duplicate quote for {row['contract']} on {date}")
            continue
        seen.add(key)
        quotes.append(ContractQuote(date, row["contract"], price, int(units)))
    if bad:
        raise ValueError("rejected rows:\n" + "\n".join(bad))
    return quotes


def serialize_market(quotes: Iterable[ContractQuote], path=None, comments=()) -> str:
    """Normalised form: sorted by (date, contract), shortest float repr."""
    rows = [(str(q.date), q.contract_id, fmt_float(q.last_price), str(q.units_traded))
            for q in sorted(quotes, key=lambda q: (q.date, q.contract_id))]
    return _write_csv(rows, MARKET_HEADER, path, comments)


def implied_probabilities(dem_price: float, rep_price: float):
    """Two-party normalisation: ``(dem, rep) / (dem + rep)``."""
    if dem_price < 0 or rep_price < 0:
        raise ValueError("prices must be non-negative")
    total = dem_price + rep_price
    if total <= 0:
        raise DegenerateQuote("both party prices are zero")
    return dem_price / total, rep_price / total


def daily_weight(quotes: Iterable[ContractQuote], mode: str = "sum") -> float:
    """Trade volume for one day's quotes.

    ``mode='sum'`` adds both party contracts; ``'rep'`` / ``'dem'`` use a
    single contract. Third-party contracts never count.
    """
    if mode not in ("sum", "rep", "dem"):
        raise ValueError(f"unknown weight mode {mode!r}")
    keep = {"sum": ("D", "R"), "rep": ("R",), "dem": ("D",)}[mode]
    return float(sum(q.units_traded for q in quotes if q.party in keep))


def market_calendar(quotes: Iterable[ContractQuote]) -> TradingCalendar:
    return TradingCalendar.from_dates({q.date for q in quotes if q.party})


def probability_and_volume(quotes: Sequence[ContractQuote], calendar: TradingCalendar,
                           weight_mode: str = "sum"):
    """Republican win probability and daily weight on ``calendar``.

    Days without both party quotes are missing in the probability series and
    carry zero weight.
    """
    by_day = defaultdict(list)
    for q in quotes:
        if q.party:
            by_day[q.date].append(q)
    prob = np.full(len(calendar), np.nan)
    vol = np.zeros(len(calendar))
    for i, d in enumerate(calendar.dates):
        day = by_day.get(d)
        if not day:
            continue
        vol[i] = daily_weight(day, weight_mode)
        dem = [q.last_price for q in day if q.party == "D"]
        rep = [q.last_price for q in day if q.party == "R"]
        if dem and rep and dem[0] + rep[0] > 0:
            prob[i] = implied_probabilities(dem[0], rep[0])[1]
    return (DailySeries(calendar, prob, "probability", "pi_R"),
            DailySeries(calendar, vol, "count", "volume"))


def monthly_volume(quotes: Iterable[ContractQuote], weight_mode: str = "sum") -> dict:
    """Month -> total weight, for the trade-volume report."""
    by_day = defaultdict(list)
    for q in quotes:
        by_day[q.date].append(q)
    out = defaultdict(float)
    for d, day in sorted(by_day.items()):
        out[str(as_month(d))] += daily_weight(day, weight_mode)
    return dict(out)


@dataclass(frozen=True)
class VintageRecord:
    series_id: str
    observation_period: np.datetime64
    publication_date: np.datetime64
    value: float


class VintageStore:
    """Real-time data: ``(series, period, publication date) -> value``."""

    def __init__(self, records: Iterable[VintageRecord] = ()):
        data = defaultdict(dict)
        for r in records:
            period, pub = as_month(r.observation_period), as_date(r.publication_date)
            if pub < (period + 1).astype("datetime64[D]"):
                raise ValueError(f"{r.series_id} {period}: published {pub} before period end")
            slot = data[(r.series_id, period)]
            if pub in slot:
                raise ValueError(f"duplicate vintage for {r.series_id} {period} on {pub}")
            slot[pub] = float(r.value)
        self._data = {}
        for key, slot in data.items():
            pubs = np.array(sorted(slot), dtype="datetime64[D]")
            self._data[key] = (pubs, np.array([slot[p] for p in pubs]))

    def __len__(self):
        return sum(len(p) for p, _ in self._data.values())

    def series_ids(self) -> set:
        return {s for s, _ in self._data}

    def records(self) -> list:
        out = []
        for (s, period), (pubs, vals) in sorted(self._data.items()):
            out += [VintageRecord(s, period, p, v) for p, v in zip(pubs, vals)]
        return out

    def value_as_of(self, series_id: str, observation_period, as_of) -> float:
        """Latest published value with publication date on or before ``as_of``."""
        key = (series_id, as_month(observation_period))
        if key not in self._data:
            raise NotYetPublished(f"{series_id} {key[1]} never published")
        pubs, vals = self._data[key]
        i = int(np.searchsorted(pubs, as_date(as_of), side="right")) - 1
        if i < 0:
            raise NotYetPublished(f"{series_id} {key[1]} not published by {as_date(as_of)}")
        return float(vals[i])

    def pct_change_as_of(self, series_id: str, observation_period, as_of) -> float:
        """One-month percent change of ``observation_period`` using only data known at ``as_of``."""
        period = as_month(observation_period)
        cur = self.value_as_of(series_id, period, as_of)
        prev = self.value_as_of(series_id, period - 1, as_of)
        return 100.0 * (cur / prev - 1.0)


def parse_vintage_file(source) -> VintageStore:
    recs = []
    for line_no, row in _read_rows(source, VINTAGE_HEADER):
        try:
            recs.append(VintageRecord(row["series"], as_month(row["obs_period"]),
                                      as_date(row["publication_date"]), float(row["value"])))
        except ValueError as exc:
            raise ValueError(f"line {line_no}: {exc}") from None
    return VintageStore(recs)


def serialize_vintages(store: VintageStore, path=None, comments=()) -> str:
    rows = [(r.series_id, str(r.observation_period), str(r.publication_date), fmt_float(r.value))
            for r in store.records()]
    return _write_csv(rows, VINTAGE_HEADER, path, comments)


class ReleaseCalendar:
    """Per series, the ordered release dates and the period each reveals."""

    def __init__(self, releases: Mapping[str, Sequence]):
        self._dates, self._periods = {}, {}
        for sid, items in releases.items():
            items = sorted((as_date(d), as_month(p)) for d, p in items)
            dates = np.array([d for d, _ in items], dtype="datetime64[D]")
            if len(dates) > 1 and not np.all(dates[1:] > dates[:-1]):
                raise ValueError(f"{sid}: release dates must be strictly increasing")
            self._dates[sid] = dates
            self._periods[sid] = np.array([p for _, p in items], dtype="datetime64[M]")

    def series_ids(self):
        return sorted(self._dates)

    def dates(self, series_id) -> np.ndarray:
        return self._dates.get(series_id, np.array([], dtype="datetime64[D]"))

    def items(self, series_id):
        return list(zip(self.dates(series_id), self._periods.get(series_id, [])))

    def period_released_on(self, series_id, date) -> Optional[np.datetime64]:
        dates = self.dates(series_id)
        d = as_date(date)
        i = int(np.searchsorted(dates, d))
        if i < len(dates) and dates[i] == d:
            return self._periods[series_id][i]
        return None


def release_indicator(cal: ReleaseCalendar, series_id: str, date) -> int:
    return int(cal.period_released_on(series_id, date) is not None)


def parse_release_file(source) -> ReleaseCalendar:
    items = defaultdict(list)
    for line_no, row in _read_rows(source, RELEASE_HEADER):
        try:
            items[row["series"]].append((as_date(row["release_date"]), as_month(row["obs_period"])))
        except ValueError as exc:
            raise ValueError(f"line {line_no}: {exc}") from None
    return ReleaseCalendar(items)


def serialize_releases(cal: ReleaseCalendar, path=None, comments=()) -> str:
    rows = [(s, str(d), str(p)) for s in cal.series_ids() for d, p in cal.items(s)]
    return _write_csv(rows, RELEASE_HEADER, path, comments)


def parse_asset_file(source) -> dict:
    """``series -> {date: close}``."""
    out = defaultdict(dict)
    for line_no, row in _read_rows(source, ASSET_HEADER):
        try:
            d, close = as_date(row["date"]), float(row["close"])
        except ValueError as exc:
            raise ValueError(f"line {line_no}: {exc}") from None
        if not close > 0:
            raise ValueError(f"line {line_no}: close must be positive")
        if d in out[row["series"]]:
            raise ValueError(f"line {line_no}: duplicate {row['series']} on {d}")
        out[row["series"]][d] = close
    return dict(out)


def serialize_assets(data: Mapping[str, Mapping], path=None, comments=()) -> str:
    rows = sorted((str(as_date(d)), s, fmt_float(v)) for s, m in data.items() for d, v in m.items())
    return _write_csv(rows, ASSET_HEADER, path, comments)


def asset_calendar(data: Mapping[str, Mapping], series: Optional[Sequence[str]] = None) -> TradingCalendar:
    """Dates on which every requested series has a close."""
    names = list(series) if series is not None else list(data)
    common = None
    for s in names:
        dates = set(data[s])
        common = dates if common is None else common & dates
    return TradingCalendar.from_dates(common or ())


def log_price_series(data: Mapping, calendar: TradingCalendar, name: str) -> DailySeries:
    vals = np.full(len(calendar), np.nan)
    for d, close in data.items():
        pos = calendar.positions(np.array([as_date(d)]))[0]
        if pos >= 0:
            vals[pos] = math.log(close)
    return DailySeries(calendar, vals, "log-price", name)


def pct_change_series(data: Mapping, calendar: TradingCalendar, name: str) -> DailySeries:
    """1-day percent change of the close, dated on the later day."""
    vals = np.full(len(calendar), np.nan)
    level = np.array([data.get(d, np.nan) for d in calendar.dates], dtype=float)
    vals[1:] = 100.0 * (level[1:] / level[:-1] - 1.0)
    return DailySeries(calendar, vals, "percent-change", name)


def parse_employment_file(source) -> dict:
    """``industry -> MonthlySeries`` from a ``month,industry,employment`` file."""
    raw = defaultdict(dict)
    for line_no, row in _read_rows(source, EMPLOYMENT_HEADER):
        try:
            m, v = as_month(row["month"]), float(row["employment"])
        except ValueError as exc:
            raise ValueError(f"line {line_no}: {exc}") from None
        if m in raw[row["industry"]]:
            raise ValueError(f"line {line_no}: duplicate {row['industry']} {m}")
        raw[row["industry"]][m] = v
    return {k: MonthlySeries.from_mapping(v, "level", k) for k, v in raw.items()}


def serialize_employment(data: Mapping[str, MonthlySeries], path=None, comments=()) -> str:
    rows = []
    for k, s in sorted(data.items()):
        rows += [(str(m), k, fmt_float(v)) for m, v in zip(s.months, s.values) if not np.isnan(v)]
    return _write_csv(rows, EMPLOYMENT_HEADER, path, comments)


def parse_events_file(source) -> list:
    """Narrative events ``(date, label, description)`` in file order."""
    out = []
    for line_no, row in _read_rows(source, EVENTS_HEADER):
        try:
            out.append((as_date(row["date"]), row["label"], row["description"]))
        except ValueError as exc:
            raise ValueError(f"line {line_no}: {exc}") from None
    return out


def serialize_events(events, path=None, comments=()) -> str:
    return _write_csv([(str(as_date(d)), lbl, desc) for d, lbl, desc in events],
                      EVENTS_HEADER, path, comments)
