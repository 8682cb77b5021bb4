from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elecshock import lp, shockgen
from elecshock.errors import DegenerateShock, InsufficientSample, RankDeficient
from elecshock.lp import COVID_EXCLUSION, ImpulseResponse, LpSpec, confidence_bands
from elecshock.regress import fit_wls
from elecshock.shockgen import NewsPanel


def _shocks(sim, weights=True):
    X, y = shockgen.build_election_design(sim.prob, sim.news, sim.cycles)
    return shockgen.extract_shocks(fit_wls(X, y), sim.calendar, sim.cycles,
                                   sim.volume if weights else None)


def test_covid_predicate():
    base = np.array(["2019-12-01", "2020-01-01"], dtype="datetime64[D]")
    target = np.array(["2020-06-01", "2021-01-01"], dtype="datetime64[D]")
    assert COVID_EXCLUSION.hits(base, target).tolist() == [True, False]
    # the base date inside the window does not matter for a target-only rule
    assert not COVID_EXCLUSION.hits(np.array(["2020-05-01"], "datetime64[D]"),
                                    np.array(["2021-02-01"], "datetime64[D]"))[0]


def test_monthly_regressor_count():
    assert lp.monthly_regressor_count() == 62


def test_band_widths_and_nesting():
    ir = ImpulseResponse("baseline", "x", np.arange(3), np.array([1.0, -2.0, 0.5]),
                         np.array([0.3, 0.0, 2.0]), np.ones(3, int), np.zeros(3, int))
    ir = confidence_bands(ir)
    lo68, hi68 = ir.bands[0.68]
    lo90, hi90 = ir.bands[0.90]
    assert np.all(lo90 <= lo68) and np.all(lo68 <= hi68) and np.all(hi68 <= hi90)
    ratio = (hi90[0] - lo90[0]) / (hi68[0] - lo68[0])
    assert ratio == pytest.approx(1.6449 / 0.9945, rel=1e-3)
    # zero SE collapses the bands to the point
    assert lo90[1] == hi90[1] == -2.0


def test_prob_response_is_ten_at_impact(small_sim):
    sh = _shocks(small_sim)
    prob = shockgen.resolved_probability(small_sim.prob, small_sim.cycles)
    ir = lp.run_lp_prob(sh, prob, LpSpec(horizons=5))
    assert ir.coef[0] == pytest.approx(10.0, abs=1e-12)


@settings(max_examples=15)
@given(st.floats(1e-3, 1e3))
def test_normalization_invariance(small_sim, c):
    sh = _shocks(small_sim)
    spec = LpSpec(horizons=8)
    y = small_sim.assets["energy"]
    a = lp.run_lp_daily(sh, y, spec, lp.impact_response(sh, small_sim.prob, spec))
    s2 = sh.scaled(c)
    b = lp.run_lp_daily(s2, y, spec, lp.impact_response(s2, small_sim.prob, spec))
    assert np.all(np.abs(a.coef - b.coef) <= 1e-10 * np.abs(a.coef))
    assert np.allclose(a.se, b.se, rtol=1e-10, atol=0)


def test_zero_weight_rows_and_dropped_cycles(small_sim):
    sh = _shocks(small_sim)
    y = small_sim.assets["clean"]
    spec = LpSpec(horizons=6)
    dropped = lp.run_lp_daily(sh, y, replace(spec, drop_cycles=(small_sim.cycles[0].cycle_id,)))
    # physical removal: the cycle's dates stop being observations
    gone = replace(sh, observed=sh.observed & (sh.cycle != small_sim.cycles[0].cycle_id))
    removed = lp.run_lp_daily(gone, y, spec)
    assert np.array_equal(dropped.coef, removed.coef)
    assert np.array_equal(dropped.se, removed.se)
    assert np.all(dropped.nobs < lp.run_lp_daily(sh, y, spec).nobs)


def test_crude_uses_one_nonzero_per_cycle(small_sim):
    crude = shockgen.crude_outcome_series(small_sim.cycles, small_sim.calendar)
    spec = LpSpec(horizons=0, weighted=False, impact_pp=None)
    sample = crude.sample() & np.isfinite(lp.lagged_change(small_sim.assets["energy"].values, 21))
    assert np.count_nonzero(crude.values[sample]) == len(small_sim.cycles)
    ir = lp.run_lp_daily(crude, small_sim.assets["energy"], spec)
    assert np.isfinite(ir.coef[0])


def test_onestep_equals_twostep_when_controlled(small_sim):
    spec = LpSpec(horizons=15, weighted=False, control_lagged_change=False, impact_pp=None)
    sh = _shocks(small_sim, weights=False)
    for name in ("energy", "defense"):
        two = lp.run_lp_daily(sh, small_sim.assets[name], spec)
        one = lp.run_lp_onestep(small_sim.prob, small_sim.news, small_sim.assets[name],
                                small_sim.cycles, spec)
        assert np.max(np.abs(one.coef - two.coef)) <= 1e-8


def test_onestep_close_with_weights_and_control():
    # weights and the lagged-change control break exact equivalence; the gap
    # is a fraction of the standard error (median over seeds and horizons)
    from elecshock import synth
    ratios = []
    for seed in range(4):
        sim = synth.simulate_dgp(synth.DgpConfig(seed=seed))
        sh = _shocks(sim)
        spec = LpSpec(horizons=20, impact_pp=None)
        for name, y in sim.assets.items():
            two = lp.run_lp_daily(sh, y, spec)
            one = lp.run_lp_onestep(sim.prob, sim.news, y, sim.cycles, spec, weights=sim.volume)
            ratios.append(np.abs(one.coef - two.coef) / two.se)
    ratios = np.concatenate(ratios)
    assert np.median(ratios) < 0.5
    assert ratios.max() < 1.5
    assert ratios.min() > 0


def test_onestep_rank_deficient(small_sim):
    n = small_sim.news
    dup = NewsPanel(n.calendar, n.d_yield, n.d_yield, n.macro, n.releases, n.pres_r)
    with pytest.raises(RankDeficient):
        lp.run_lp_onestep(small_sim.prob, dup, small_sim.assets["energy"], small_sim.cycles,
                          LpSpec(horizons=1, weighted=False))


def test_errors(small_sim):
    sh = _shocks(small_sim)
    y = small_sim.assets["energy"]
    with pytest.raises(DegenerateShock):
        lp.run_lp_daily(sh.scaled(0.0), y, LpSpec(horizons=1))
    with pytest.raises(InsufficientSample):
        lp.run_lp_daily(sh, y, LpSpec(horizons=len(sh.calendar)))
    with pytest.raises(ValueError):
        LpSpec(horizons=-1)


def test_bandwidth_uses_horizon_sample(small_sim):
    from elecshock.regress import nw_bandwidth
    ir = lp.run_lp_daily(_shocks(small_sim), small_sim.assets["energy"], LpSpec(horizons=30))
    assert all(b == nw_bandwidth(n) for b, n in zip(ir.bandwidth, ir.nobs))


def test_csv_rows_follow_schema(small_sim):
    ir = lp.run_lp_daily(_shocks(small_sim), small_sim.assets["energy"], LpSpec(horizons=4))
    rows = ir.to_rows()
    assert len(rows) == 5 and all(len(r) == len(lp.IRF_HEADER) for r in rows)
    for r in rows:
        assert r[7] <= r[5] <= r[6] <= r[8]
