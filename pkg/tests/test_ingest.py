from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elecshock import ingest
from elecshock.errors import DegenerateQuote, NotYetPublished, SchemaError
from elecshock.ingest import ContractQuote, VintageRecord, VintageStore
from elecshock.timeline import TradingCalendar

DATA = Path(__file__).parent / "data"


def test_single_row_parses():
    text = "date,contract,last_price,units\n2000-11-01,DEM00_WTA,0.348,210\n"
    (q,) = ingest.parse_market_file(text)
    assert q == ContractQuote(np.datetime64("2000-11-01"), "DEM00_WTA", 0.348, 210)
    assert q.party == "D"


def test_empty_file_gives_empty_list(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("date,contract,last_price,units\n")
    assert ingest.parse_market_file(p) == []


def test_missing_column_is_schema_error():
    with pytest.raises(SchemaError):
        ingest.parse_market_file("date,contract,price\n2000-11-01,DEM00_WTA,0.3\n")


def test_bad_rows_reported_with_line_numbers():
    text = ("date,contract,last_price,units\n2000-11-01,DEM00_WTA,abc,1\n"
            "2000-11-02,DEM00_WTA,0.4,2.5\n")
    with pytest.raises(ValueError, match="line 2") as exc:
        ingest.parse_market_file(text)
    assert "line 3" in str(exc.value)


def test_negative_price_or_volume_rejected():
    with pytest.raises(ValueError):
        ingest.parse_market_file("date,contract,last_price,units\n2000-11-01,DEM00_WTA,-0.1,3\n")
    with pytest.raises(ValueError):
        ingest.parse_market_file("date,contract,last_price,units\n2000-11-01,DEM00_WTA,0.1,-3\n")


def test_golden_round_trip():
    quotes = ingest.parse_market_file(DATA / "market_golden.csv")
    assert len(quotes) == 20
    text = ingest.serialize_market(quotes)
    again = ingest.parse_market_file(text)
    assert sorted(again) == sorted(quotes)
    assert ingest.serialize_market(again) == text


def test_third_party_contract_ignored():
    quotes = ingest.parse_market_file(DATA / "market_golden.csv")
    day = [q for q in quotes if str(q.date) == "2000-11-01"]
    assert ingest.daily_weight(day) == 550.0
    assert ingest.daily_weight(day, "rep") == 340.0
    cal = TradingCalendar.from_dates(["2000-11-01", "2016-11-08", "2016-11-09"])
    prob, vol = ingest.probability_and_volume(quotes, cal)
    assert prob.values[0] == pytest.approx(0.668 / (0.348 + 0.668), abs=1e-15)
    # only one party quoted on 2016-11-08, nothing on 2016-11-09
    assert np.isnan(prob.values[1]) and vol.values[1] == 2400.0
    assert np.isnan(prob.values[2]) and vol.values[2] == 0.0


def test_two_party_price_example():
    d, r = ingest.implied_probabilities(0.348, 0.668)
    assert (round(d, 3), round(r, 3)) == (0.343, 0.657)
    assert ingest.implied_probabilities(0.5, 0.5) == (0.5, 0.5)
    d, r = ingest.implied_probabilities(0.25, 0.50)
    assert d == pytest.approx(1 / 3, abs=1e-15) and r == pytest.approx(2 / 3, abs=1e-15)


def test_zero_prices_degenerate():
    with pytest.raises(DegenerateQuote):
        ingest.implied_probabilities(0.0, 0.0)


@given(st.floats(1e-6, 10), st.floats(1e-6, 10), st.floats(1e-6, 1e6))
def test_normalisation_scale_invariant(p, q, a):
    d1, r1 = ingest.implied_probabilities(p, q)
    d2, r2 = ingest.implied_probabilities(a * p, a * q)
    assert abs(d2 - d1) <= 2 * np.finfo(float).eps
    assert abs(r2 - r1) <= 2 * np.finfo(float).eps
    assert d1 + r1 == pytest.approx(1.0, abs=1e-15)


def test_weights():
    qs = [ContractQuote("2020-01-02", "DEM20_WTA", 0.5, 120), ContractQuote("2020-01-02", "REP20_WTA", 0.5, 80)]
    assert ingest.daily_weight(qs) == 200.0
    assert ingest.daily_weight([]) == 0.0


def _store():
    return VintageStore([
        VintageRecord("emp", "2008-08", "2008-09-05", 137.0),
        VintageRecord("emp", "2008-09", "2008-10-03", 136.8),
        VintageRecord("emp", "2008-09", "2008-11-07", 136.5),
    ])


def test_vintage_strict_ordering():
    s = _store()
    with pytest.raises(NotYetPublished):
        s.value_as_of("emp", "2008-09", "2008-10-02")
    assert s.value_as_of("emp", "2008-09", "2008-10-03") == 136.8
    assert s.value_as_of("emp", "2008-09", "2008-10-20") == 136.8
    assert s.value_as_of("emp", "2008-09", "2008-11-07") == 136.5
    assert s.pct_change_as_of("emp", "2008-09", "2008-10-03") == pytest.approx(100 * (136.8 / 137.0 - 1))


def test_vintage_before_period_end_rejected():
    with pytest.raises(ValueError):
        VintageStore([VintageRecord("emp", "2008-09", "2008-09-15", 1.0)])


@given(st.integers(0, 2**32 - 1))
def test_vintage_matches_linear_scan(seed):
    rng = np.random.default_rng(seed)
    recs = []
    for k in range(int(rng.integers(1, 12))):
        period = np.datetime64("2010-01") + int(rng.integers(0, 3))
        pub = (period + 1).astype("datetime64[D]") + int(rng.integers(0, 200))
        recs.append(VintageRecord("x", period, pub, float(rng.normal())))
    uniq = {(r.observation_period, r.publication_date): r for r in recs}
    store = VintageStore(uniq.values())
    prev = {}
    for q in np.sort(np.datetime64("2010-01-01") + rng.integers(0, 400, 30)):
        for period in np.arange(np.datetime64("2010-01"), np.datetime64("2010-04")):
            cands = [r for r in uniq.values() if r.observation_period == period and r.publication_date <= q]
            if not cands:
                with pytest.raises(NotYetPublished):
                    store.value_as_of("x", period, q)
                continue
            best = max(cands, key=lambda r: r.publication_date)
            assert store.value_as_of("x", period, q) == best.value
            # never an older vintage as as_of moves forward
            assert best.publication_date >= prev.get(period, best.publication_date)
            prev[period] = best.publication_date


def test_vintage_round_trip():
    s = _store()
    text = ingest.serialize_vintages(s)
    assert ingest.serialize_vintages(ingest.parse_vintage_file(text)) == text


def test_release_indicator_fixture_year():
    cal = ingest.parse_release_file(DATA / "releases_emp_2008.csv")
    assert ingest.release_indicator(cal, "emp", "2008-10-03") == 1
    assert ingest.release_indicator(cal, "emp", "2008-10-06") == 0
    days = np.arange(np.datetime64("2008-01-01"), np.datetime64("2009-01-01"))
    assert sum(ingest.release_indicator(cal, "emp", d) for d in days) == 12
    assert cal.period_released_on("emp", "2008-07-03") == np.datetime64("2008-06")
    text = ingest.serialize_releases(cal)
    assert ingest.serialize_releases(ingest.parse_release_file(text)) == text


def test_assets_and_events_round_trip():
    closes = {"energy": {np.datetime64("2020-01-02"): 101.5, np.datetime64("2020-01-03"): 99.25},
              "dgs2": {np.datetime64("2020-01-03"): 1.53}}
    text = ingest.serialize_assets(closes)
    back = ingest.parse_asset_file(text)
    assert ingest.serialize_assets(back) == text
    cal = ingest.asset_calendar(back)
    assert [str(d) for d in cal.dates] == ["2020-01-03"]
    ev = [(np.datetime64("2016-10-07"), "Debate", "")]
    assert ingest.parse_events_file(ingest.serialize_events(ev)) == ev


def test_bundled_events_have_61_entries():
    from elecshock.shockgen import load_events
    ev = load_events()
    assert len(ev) == 61
    assert np.all(np.diff(ev.dates).astype(int) >= 0)
