"""Election-shock construction.

The Republican win probability is regressed on five daily lags of itself,
contemporaneous and lagged financial/macro news, the incumbency dummy and
news-by-incumbency interactions. The residual, in percentage points, is the
election shock. Narrative, crude and monthly variants derive from it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from importlib import resources
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import InsufficientHistory, NotYetPublished, UnknownOutcome
from .ingest import ReleaseCalendar, VintageStore, parse_events_file
from .regress import INTERCEPT, DesignMatrix, FitResult
from .timeline import (
    NO_CYCLE,
    DailySeries,
    ElectionCycle,
    MonthlySeries,
    TradingCalendar,
    as_date,
    cycle_mask,
    position_in_cycle,
    pres_r_indicator,
)

log = logging.getLogger(__name__)

N_LAGS = 5
FINANCIAL = ("d_yield", "d_sp500")
MACRO = ("emp", "cpi", "ind")
X_NAMES = FINANCIAL + MACRO

# Presidential elections in the sample: (year, first date, election day, incumbent, winner).
US_ELECTIONS = (
    (2000, "2000-05-01", "2000-11-07", "D", "R"),
    (2004, "2004-06-01", "2004-11-02", "R", "R"),
    (2008, "2008-01-01", "2008-11-04", "R", "D"),
    (2012, "2012-01-01", "2012-11-06", "D", "D"),
    (2016, "2016-01-01", "2016-11-08", "D", "R"),
    (2020, "2020-01-01", "2020-11-03", "R", "D"),
    (2024, "2024-01-01", "2024-11-05", "D", "R"),
)


def us_cycles(years: Optional[Sequence[int]] = None) -> list:
    """Election cycles ending on election day, optionally restricted to ``years``."""
    out = []
    for year, first, elec, inc, win in US_ELECTIONS:
        if years is None or year in years:
            out.append(ElectionCycle(year, first, elec, elec, inc, win))
    return out


@dataclass(frozen=True)
class NewsPanel:
    """Daily financial and real-time macro news plus the incumbency dummy.

    ``macro`` holds the most recent one-month percent change known on each
    date (forward filled between releases); ``releases`` flags the release
    days. The regression sees ``releases * macro``, exactly zero off release
    days.
    """

    calendar: TradingCalendar
    d_yield: np.ndarray
    d_sp500: np.ndarray
    macro: np.ndarray
    releases: np.ndarray
    pres_r: np.ndarray

    def __post_init__(self):
        n = len(self.calendar)
        for name in ("d_yield", "d_sp500", "pres_r"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have one value per calendar date")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("macro", "releases"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (n, len(MACRO)):
                raise ValueError(f"{name} must be (n_dates, {len(MACRO)})")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not np.all(np.isin(self.releases, (0.0, 1.0))):
            raise ValueError("release indicators must be 0/1")
        on = self.releases == 1
        if np.any(np.isnan(self.macro[on])):
            raise ValueError("macro value missing on a release day")
        pres = self.pres_r[~np.isnan(self.pres_r)]
        if not np.all(np.isin(pres, (0.0, 1.0))):
            raise ValueError("incumbency dummy must be 0/1")

    def X(self, use_indicators: bool = True) -> np.ndarray:
        """(n_dates, 5) news matrix in the order of ``X_NAMES``."""
        if use_indicators:
            macro = np.where(self.releases == 1, self.macro, 0.0)
        else:
            macro = np.nan_to_num(self.macro, nan=0.0)
        return np.column_stack([self.d_yield, self.d_sp500, macro])


def build_news_panel(calendar: TradingCalendar, d_yield: DailySeries, d_sp500: DailySeries,
                     vintages: VintageStore, releases: ReleaseCalendar,
                     cycles: Sequence[ElectionCycle],
                     macro_ids: Mapping[str, str] = None) -> NewsPanel:
    """Assemble the news panel from daily changes and real-time macro data.

    ``macro_ids`` maps ``emp``/``cpi``/``ind`` to series ids in the vintage
    store and release calendar (defaults to the same names). A release that
    falls on a non-calendar date is attributed to the next calendar date. A
    release whose vintage is not in the store leaves the indicator at 0.
    """
    macro_ids = dict(macro_ids or {k: k for k in MACRO})
    n = len(calendar)
    macro = np.full((n, len(MACRO)), np.nan)
    rel = np.zeros((n, len(MACRO)))
    for j, key in enumerate(MACRO):
        sid = macro_ids[key]
        for date, period in releases.items(sid):
            pos = calendar.next_on_or_after(date)
            if pos is None:
                continue
            try:
                value = vintages.pct_change_as_of(sid, period, date)
            except NotYetPublished:
                log.info("%s %s: vintage missing at release %s", sid, period, date)
                continue
            rel[pos, j] = 1.0
            macro[pos, j] = value
        # forward fill the most recent release
        last = np.nan
        for i in range(n):
            if rel[i, j]:
                last = macro[i, j]
            macro[i, j] = last
    return NewsPanel(calendar, d_yield.reindex(calendar).values, d_sp500.reindex(calendar).values,
                     macro, rel, pres_r_indicator(calendar, cycles))


def design_labels(n_lags: int = N_LAGS, contemporaneous_prob: bool = False) -> tuple:
    first = 0 if contemporaneous_prob else 1
    labels = [INTERCEPT] + [f"pi_l{s}" for s in range(first, n_lags + 1)]
    labels += [f"{x}_l{s}" for x in X_NAMES for s in range(n_lags + 1)]
    labels += ["pres_r"]
    labels += [f"{x}_l{s}_x_pres" for x in X_NAMES for s in range(n_lags + 1)]
    return tuple(labels)


def _ffill_within(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=float)
    for i in range(1, len(out)):
        if np.isnan(out[i]) and mask[i] != NO_CYCLE and mask[i] == mask[i - 1]:
            out[i] = out[i - 1]
    return out


def _lag(values: np.ndarray, s: int) -> np.ndarray:
    out = np.full(values.shape, np.nan)
    out[s:] = values[:len(values) - s] if s else values
    return out


def election_regressors(prob: DailySeries, news: NewsPanel, cycles: Sequence[ElectionCycle],
                        n_lags: int = N_LAGS, use_indicators: bool = True,
                        contemporaneous_prob: bool = False):
    """Full-calendar regressor matrix and the rows eligible for estimation.

    Returns ``(labels, Z, eligible, mask)``. ``eligible`` requires ``n_lags``
    earlier dates in the same cycle, an actually quoted probability on the
    date (carried-forward values only serve as lags) and complete news.
    """
    cal = prob.calendar
    if news.calendar.dates.shape != cal.dates.shape or np.any(news.calendar.dates != cal.dates):
        raise ValueError("probability series and news panel must share a calendar")
    mask = cycle_mask(cal, cycles)
    pos = position_in_cycle(mask)
    for c in cycles:
        if np.sum(mask == c.cycle_id) <= n_lags:
            raise InsufficientHistory(f"cycle {c.cycle_id} has <= {n_lags} calendar days")
    pi = _ffill_within(prob.values, mask)
    X = news.X(use_indicators)
    pres = news.pres_r
    first = 0 if contemporaneous_prob else 1
    cols = [np.ones(len(cal))]
    cols += [_lag(pi, s) for s in range(first, n_lags + 1)]
    for j in range(X.shape[1]):
        cols += [_lag(X[:, j], s) for s in range(n_lags + 1)]
    cols.append(pres)
    for j in range(X.shape[1]):
        cols += [_lag(X[:, j], s) * pres for s in range(n_lags + 1)]
    Z = np.column_stack(cols)
    labels = design_labels(n_lags, contemporaneous_prob)
    eligible = (pos >= n_lags) & ~np.isnan(prob.values) & np.all(np.isfinite(Z), axis=1)
    for c in cycles:
        if np.sum(eligible & (mask == c.cycle_id)) == 0:
            raise InsufficientHistory(f"cycle {c.cycle_id} has no usable rows after {n_lags} lags")
    return labels, Z, eligible, mask


def build_election_design(prob: DailySeries, news: NewsPanel, cycles: Sequence[ElectionCycle],
                          n_lags: int = N_LAGS, use_indicators: bool = True,
                          weights: Optional[DailySeries] = None):
    """Design matrix and response for the probability equation.

    Rows are the eligible dates of :func:`election_regressors`; weights are
    one unless ``weights`` (trade volume) is given.
    """
    labels, Z, eligible, mask = election_regressors(prob, news, cycles, n_lags, use_indicators)
    rows = np.flatnonzero(eligible)
    w = np.ones(len(rows)) if weights is None else np.nan_to_num(weights.values[rows])
    X = DesignMatrix(prob.calendar.dates[rows], labels, Z[rows], w, mask[rows])
    dropped = int(np.sum((mask != NO_CYCLE) & ~eligible))
    log.info("election design: %d rows x %d columns, %d in-cycle dates dropped",
             len(rows), len(labels), dropped)
    return X, prob.values[rows]


def audit_design(X: DesignMatrix, calendar: TradingCalendar, cycles, n_lags: int = N_LAGS) -> bool:
    """True iff every row's dates t-n_lags..t lie in one cycle."""
    mask = cycle_mask(calendar, cycles)
    pos = calendar.positions(X.index)
    if np.any(pos < n_lags):
        return False
    window = mask[pos[:, None] - np.arange(n_lags + 1)[None, :]]
    return bool(np.all(window == window[:, :1]) and np.all(window[:, 0] != NO_CYCLE))


@dataclass(frozen=True)
class ShockSeries:
    """Daily shock values on a calendar with per-day weights.

    ``observed`` marks dates where the value is a genuine observation (for
    the baseline shock: the estimation rows); local projections only use
    observed dates with positive weight.
    """

    calendar: TradingCalendar
    values: np.ndarray
    weights: np.ndarray
    cycle: np.ndarray
    observed: np.ndarray
    unit: str = "pp"
    name: str = "baseline"

    def __post_init__(self):
        n = len(self.calendar)
        for nm, dtype in (("values", float), ("weights", float), ("cycle", np.int64), ("observed", bool)):
            arr = np.array(getattr(self, nm), dtype=dtype)
            if arr.shape != (n,):
                raise ValueError(f"{nm} needs one entry per calendar date")
            arr.setflags(write=False)
            object.__setattr__(self, nm, arr)
        if np.any(self.weights < 0) or np.any(np.isnan(self.weights)):
            raise ValueError("weights must be non-negative")
        if np.any((self.values != 0) & (self.cycle == NO_CYCLE)):
            raise ValueError("shocks must be zero outside election cycles")

    @property
    def dates(self):
        return self.calendar.dates

    def scaled(self, c: float) -> "ShockSeries":
        return replace(self, values=self.values * c)

    def with_weights(self, weights) -> "ShockSeries":
        return replace(self, weights=weights)

    def drop_cycles(self, cycle_ids: Sequence[int]) -> "ShockSeries":
        """Zero the weights of whole cycles (equivalent to removing their rows)."""
        w = np.where(np.isin(self.cycle, list(cycle_ids)), 0.0, self.weights)
        return replace(self, weights=w)

    def sample(self) -> np.ndarray:
        return self.observed & (self.weights > 0)

    def __getitem__(self, date) -> float:
        return float(self.values[self.calendar.position(date)])


def extract_shocks(fit: FitResult, calendar: TradingCalendar, cycles: Sequence[ElectionCycle],
                   weights: Optional[DailySeries] = None) -> ShockSeries:
    """Residuals of the probability equation in percentage points.

    Dates outside the estimation rows are zero; weights default to one on
    cycle dates and are zero between cycles.
    """
    mask = cycle_mask(calendar, cycles)
    pos = calendar.positions(fit.index)
    if np.any(pos < 0):
        raise ValueError("fit rows are not on the calendar")
    values = np.zeros(len(calendar))
    values[pos] = 100.0 * fit.residuals
    observed = np.zeros(len(calendar), dtype=bool)
    observed[pos] = True
    if weights is None:
        w = np.ones(len(calendar))
    else:
        w = np.nan_to_num(weights.reindex(calendar).values, nan=0.0)
    w = np.where(mask == NO_CYCLE, 0.0, w)
    return ShockSeries(calendar, values, w, mask, observed, "pp", "baseline")


@dataclass(frozen=True)
class NarrativeEventList:
    events: tuple

    def __post_init__(self):
        evs = tuple((as_date(d), str(lbl), str(desc)) for d, lbl, desc in self.events)
        dates = [d for d, _, _ in evs]
        if len(set(dates)) != len(dates):
            raise ValueError("narrative event dates must be unique")
        object.__setattr__(self, "events", tuple(sorted(evs, key=lambda e: e[0])))

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def dates(self) -> np.ndarray:
        return np.array([d for d, _, _ in self.events], dtype="datetime64[D]")

    def label_near(self, date) -> tuple:
        """``(label, days apart)`` of the event closest to ``date``."""
        d = as_date(date)
        gaps = np.abs((self.dates - d).astype(int))
        i = int(np.argmin(gaps))
        return self.events[i][1], int(gaps[i])


def load_events(path=None) -> NarrativeEventList:
    """Read an events CSV; without a path, the bundled 2000-2024 event calendar."""
    if path is None:
        text = resources.files("elecshock").joinpath("data/narrative_events.csv").read_text("utf-8")
        return NarrativeEventList(parse_events_file(text))
    return NarrativeEventList(parse_events_file(path))


def event_positions(calendar: TradingCalendar, events: NarrativeEventList, cycles) -> dict:
    """Calendar position of each event (next trading day if off-calendar)."""
    mask = cycle_mask(calendar, cycles)
    out = {}
    for d, label, _ in events:
        p = calendar.next_on_or_after(d)
        inside = [c for c in cycles if c.contains(d)]
        if p is None or not inside or mask[p] != inside[0].cycle_id:
            raise ValueError(f"event {label} on {d} is not inside an election cycle")
        out.setdefault(p, []).append(label)
    return out


def narrative_shocks(shocks: ShockSeries, events: NarrativeEventList, cycles: Sequence[ElectionCycle],
                     window: int = 5) -> ShockSeries:
    """Sum of the shock over ``window`` trading days from each event date.

    The window stops at the end of the event's cycle. Events that land on
    the same trading day count once.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    positions = event_positions(shocks.calendar, events, cycles)
    values = np.zeros(len(shocks.calendar))
    for p in positions:
        cid = shocks.cycle[p]
        stop = p
        while stop + 1 < len(values) and stop + 1 < p + window and shocks.cycle[stop + 1] == cid:
            stop += 1
        values[p] = shocks.values[p:stop + 1].sum()
    observed = shocks.observed.copy()
    observed[list(positions)] = True
    return replace(shocks, values=values, observed=observed, name=f"narrative{window}")


def crude_outcome_series(cycles: Sequence[ElectionCycle], calendar: TradingCalendar,
                         weights: Optional[np.ndarray] = None) -> ShockSeries:
    """+1 on Republican election-day wins, -1 on Democratic wins, 0 elsewhere.

    Every calendar date is an observation; weights default to one.
    """
    mask = cycle_mask(calendar, cycles)
    values = np.zeros(len(calendar))
    for c in cycles:
        if c.winner is None:
            raise UnknownOutcome(f"cycle {c.cycle_id} has no recorded winner")
        p = calendar.next_on_or_after(c.election_date)
        if p is None or mask[p] != c.cycle_id:
            raise ValueError(f"election day {c.election_date} not on the calendar")
        values[p] = 1.0 if c.winner == "R" else -1.0
    w = np.ones(len(calendar)) if weights is None else np.asarray(weights, dtype=float)
    return ShockSeries(calendar, values, w, mask, np.ones(len(calendar), bool), "outcome", "crude")


def monthly_aggregate(shocks: ShockSeries) -> MonthlySeries:
    """Calendar-month sums of the daily shock."""
    cal = shocks.calendar
    if len(cal) == 0:
        return MonthlySeries(np.array([], "datetime64[M]"), np.array([]), shocks.unit, shocks.name)
    months = cal.dates.astype("datetime64[M]")
    span = np.arange(months[0], months[-1] + 1, dtype="datetime64[M]")
    sums = np.zeros(len(span))
    np.add.at(sums, (months - span[0]).astype(int), shocks.values)
    return MonthlySeries(span, sums, shocks.unit, shocks.name)


def resolve_election_day(prob: DailySeries, cycles: Sequence[ElectionCycle]) -> DailySeries:
    """Set the election-day probability to the realised outcome (1 if R wins).

    The election-day shock then measures outcome minus what the lags and news
    predicted.
    """
    vals = np.array(prob.values)
    for c in cycles:
        if c.winner is None:
            continue
        p = prob.calendar.next_on_or_after(c.election_date)
        if p is not None and c.contains(prob.calendar.dates[p]):
            vals[p] = 1.0 if c.winner == "R" else 0.0
    return prob.with_values(vals)


def resolved_probability(prob: DailySeries, cycles: Sequence[ElectionCycle]) -> DailySeries:
    """Probability with post-election dates held at the outcome until the next cycle."""
    vals = np.array(prob.values)
    dates = prob.calendar.dates
    ordered = sorted(cycles, key=lambda c: c.first_date)
    for i, c in enumerate(ordered):
        if c.winner is None:
            continue
        end = ordered[i + 1].first_date if i + 1 < len(ordered) else np.datetime64("9999-12-31")
        after = (dates > c.election_date) & (dates < end) & np.isnan(vals)
        vals[after] = 1.0 if c.winner == "R" else 0.0
    return prob.with_values(vals)
