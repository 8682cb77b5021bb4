import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elecshock import shockgen
from elecshock.errors import InsufficientHistory, UnknownOutcome
from elecshock.regress import fit_wls
from elecshock.shockgen import (
    NarrativeEventList,
    NewsPanel,
    ShockSeries,
    build_election_design,
    crude_outcome_series,
    extract_shocks,
    monthly_aggregate,
    narrative_shocks,
)
from elecshock.timeline import NO_CYCLE, DailySeries, ElectionCycle, TradingCalendar, cycle_mask


def _fixture(rng, days=30, gap=10):
    """Two cycles of ``days`` business days separated by ``gap`` days."""
    cal = TradingCalendar.business_days("2015-01-05", np.busday_offset("2015-01-05", 2 * days + gap - 1))
    d = cal.dates
    c1 = ElectionCycle(1, d[0], d[days - 1], d[days - 1], "D", "R")
    c2 = ElectionCycle(2, d[days + gap], d[-1], d[-1], "R", "D")
    n = len(cal)
    mask = cycle_mask(cal, [c1, c2])
    prob = np.where(mask == NO_CYCLE, np.nan, rng.uniform(0.2, 0.8, n))
    # every series released once a week at staggered offsets
    rel = np.array([[(i + 2 * j) % 7 == 0 for j in range(3)] for i in range(n)], dtype=float)
    macro = rng.normal(size=(n, 3))
    pres = np.where(mask == 1, 0.0, np.where(mask == 2, 1.0, np.nan))
    news = NewsPanel(cal, rng.normal(size=n), rng.normal(size=n), macro, rel, pres)
    return cal, [c1, c2], DailySeries(cal, prob, "probability", "pi_R"), news


def test_67_columns_and_50_rows(rng):
    cal, cycles, prob, news = _fixture(rng)
    X, y = build_election_design(prob, news, cycles)
    assert X.shape == (50, 67)
    assert len(shockgen.design_labels()) == 67
    assert shockgen.audit_design(X, cal, cycles)
    assert np.all(y == prob.values[cal.positions(X.index)])


def test_missing_quote_keeps_lags_but_drops_row(rng):
    cal, cycles, prob, news = _fixture(rng)
    vals = np.array(prob.values)
    vals[12] = np.nan
    X, _ = build_election_design(prob.with_values(vals), news, cycles)
    assert X.shape[0] == 49
    # the carried-forward value serves as the first lag on the next day
    row = list(X.index).index(cal.dates[13])
    assert X.column("pi_l1")[row] == vals[11]


def test_indicators_zero_macro_off_release_days(rng):
    cal, cycles, prob, news = _fixture(rng)
    Xn = news.X(True)
    assert np.all(Xn[:, 2:][news.releases == 0] == 0.0)
    assert np.all(Xn[:, 2:][news.releases == 1] == news.macro[news.releases == 1])


def test_short_cycle_insufficient_history(rng):
    cal, cycles, prob, news = _fixture(rng)
    short = ElectionCycle(3, cal.dates[30], cal.dates[33], cal.dates[33], "D", "D")
    with pytest.raises(InsufficientHistory):
        build_election_design(prob, news, cycles + [short])


def _fit(rng, weighted):
    cal, cycles, prob, news = _fixture(rng, days=60)
    vol = DailySeries(cal, rng.uniform(1, 500, len(cal)).round(), "count", "volume")
    X, y = build_election_design(prob, news, cycles, weights=vol if weighted else None)
    fit = fit_wls(X, y)
    return cal, cycles, X, fit, vol


@given(st.integers(0, 2**32 - 1))
def test_weighted_residual_orthogonality(seed):
    rng = np.random.default_rng(seed)
    cal, cycles, X, fit, vol = _fit(rng, True)
    shocks = extract_shocks(fit, cal, cycles, vol)
    pos = cal.positions(X.index)
    s = shocks.values[pos]
    for j in range(X.shape[1]):
        x = X.values[:, j]
        scale = np.sqrt(np.sum(X.weights * s**2) * np.sum(X.weights * x**2))
        assert abs(np.sum(X.weights * s * x)) <= 1e-8 * scale


def test_shocks_zero_off_design_rows(rng):
    cal, cycles, X, fit, vol = _fit(rng, False)
    sh = extract_shocks(fit, cal, cycles)
    assert sh.observed.sum() == X.shape[0]
    assert np.all(sh.values[~sh.observed] == 0.0)
    assert np.all(sh.weights[sh.cycle == NO_CYCLE] == 0.0)
    assert np.allclose(sh.values[sh.observed], 100 * fit.residuals)


def _flat_shocks(values, cycle_len=None):
    n = len(values)
    cal = TradingCalendar.business_days("2016-10-03", np.busday_offset("2016-10-03", n - 1))
    cyc = ElectionCycle(2016, cal.dates[0], cal.dates[cycle_len - 1 if cycle_len else -1],
                        cal.dates[cycle_len - 1 if cycle_len else -1], "D", "R")
    mask = cycle_mask(cal, [cyc])
    vals = np.where(mask == NO_CYCLE, 0.0, values)
    return ShockSeries(cal, vals, np.ones(n), mask, mask != NO_CYCLE), cyc


def test_narrative_window_sum():
    sh, cyc = _flat_shocks(np.array([0.5, 2, -1, 3, 0, 1, 7, 0, 0, 0]))
    ev = NarrativeEventList([(sh.dates[1], "debate", "")])
    nar = narrative_shocks(sh, ev, [cyc], window=5)
    assert nar.values[1] == 5.0
    assert np.all(np.delete(nar.values, 1) == 0.0)
    one = narrative_shocks(sh, ev, [cyc], window=1)
    assert one.values[1] == sh.values[1]


def test_narrative_window_stops_at_cycle_end():
    sh, cyc = _flat_shocks(np.arange(1.0, 11.0), cycle_len=8)
    ev = NarrativeEventList([(sh.dates[5], "late", "")])
    assert narrative_shocks(sh, ev, [cyc], window=5).values[5] == 6 + 7 + 8


def test_narrative_weekend_event_maps_to_monday():
    sh, cyc = _flat_shocks(np.arange(1.0, 11.0))
    # 2016-10-08 is a Saturday; the next trading day is position 5
    ev = NarrativeEventList([(np.datetime64("2016-10-08"), "weekend", ""),
                             (np.datetime64("2016-10-10"), "monday", "")])
    nar = narrative_shocks(sh, ev, [cyc], window=2)
    assert nar.values[5] == 6 + 7
    assert np.count_nonzero(nar.values) == 1


@given(st.lists(st.floats(-50, 50), min_size=12, max_size=12), st.floats(0.1, 10))
def test_narrative_linear(vals, c):
    sh, cyc = _flat_shocks(np.array(vals))
    ev = NarrativeEventList([(sh.dates[2], "a", ""), (sh.dates[7], "b", "")])
    a = narrative_shocks(sh, ev, [cyc]).values
    b = narrative_shocks(sh.scaled(c), ev, [cyc]).values
    assert np.allclose(b, c * a, rtol=1e-12, atol=1e-12)


def test_crude_outcomes():
    cycles = shockgen.us_cycles()
    cal = TradingCalendar.business_days("2000-01-03", "2024-12-31")
    crude = crude_outcome_series(cycles, cal)
    assert crude["2016-11-08"] == 1.0
    assert crude["2008-11-04"] == -1.0
    assert crude["2016-11-07"] == 0.0
    assert np.count_nonzero(crude.values) == len(cycles)
    for c in cycles:
        assert np.count_nonzero(crude.values[crude.cycle == c.cycle_id]) == 1


def test_crude_needs_outcome():
    cal = TradingCalendar.business_days("2028-01-03", "2028-12-29")
    c = ElectionCycle(2028, "2028-01-03", "2028-11-07", "2028-11-07", "R")
    with pytest.raises(UnknownOutcome):
        crude_outcome_series([c], cal)


def test_monthly_aggregate():
    cal = TradingCalendar.from_dates(["2016-01-28", "2016-01-29", "2016-03-01"])
    c = ElectionCycle(1, "2016-01-01", "2016-03-31", "2016-03-31", "D", "R")
    mask = cycle_mask(cal, [c])
    sh = ShockSeries(cal, [1.5, -0.5, 2.0], np.ones(3), mask, np.ones(3, bool))
    m = monthly_aggregate(sh)
    assert m["2016-01"] == 1.0 and m["2016-02"] == 0.0 and m["2016-03"] == 2.0


@given(st.integers(0, 2**32 - 1))
def test_monthly_mass_conserved(seed):
    rng = np.random.default_rng(seed)
    cal, cycles, X, fit, vol = _fit(rng, False)
    sh = extract_shocks(fit, cal, cycles)
    assert monthly_aggregate(sh).values.sum() == pytest.approx(sh.values.sum(), abs=1e-9)


def test_drop_cycles_zeroes_weights(rng):
    cal, cycles, X, fit, vol = _fit(rng, False)
    sh = extract_shocks(fit, cal, cycles).drop_cycles([1])
    assert np.all(sh.weights[sh.cycle == 1] == 0.0)
    assert np.all(sh.weights[sh.cycle == 2] == 1.0)


def test_election_day_resolution():
    cal = TradingCalendar.business_days("2016-11-01", "2016-11-15")
    c = ElectionCycle(2016, "2016-11-01", "2016-11-08", "2016-11-08", "D", "R")
    vals = np.where(cal.dates <= np.datetime64("2016-11-08"), 0.2, np.nan)
    p = shockgen.resolve_election_day(DailySeries(cal, vals, "probability"), [c])
    assert p["2016-11-08"] == 1.0 and p["2016-11-07"] == 0.2
    r = shockgen.resolved_probability(p, [c])
    assert r["2016-11-15"] == 1.0


def test_bundled_events_inside_us_cycles():
    cal = TradingCalendar.business_days("2000-01-03", "2024-12-31")
    pos = shockgen.event_positions(cal, shockgen.load_events(), shockgen.us_cycles())
    assert sum(len(v) for v in pos.values()) == 61
