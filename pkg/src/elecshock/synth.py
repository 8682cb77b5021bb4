"""Known-truth data-generating processes and brute-force oracles.

The daily DGP draws election cycles in which the Republican probability
follows the same lag/news/incumbency structure the shock regression
estimates, with an injected residual (the true shock). Log asset prices
respond to the true shock through a configurable kernel. Everything is
driven by an explicit seed; replication ``i`` of an experiment uses the
``i``-th child of ``numpy.random.SeedSequence(seed)``, so results do not
depend on scheduling.
"""

from __future__ import annotations

import configparser
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidConfig
from .ingest import ContractQuote, ReleaseCalendar, VintageRecord, VintageStore
from .lp import LpSpec, impact_response, run_lp_daily, run_lp_monthly, z_value
from .regress import fit_wls
from .shockgen import (
    N_LAGS,
    build_election_design,
    build_news_panel,
    extract_shocks,
    resolve_election_day,
)
from .timeline import (
    NO_CYCLE,
    DailySeries,
    ElectionCycle,
    MonthlySeries,
    TradingCalendar,
    cycle_mask,
    position_in_cycle,
)

MACRO_IDS = {"emp": "emp", "cpi": "cpi", "ind": "ind"}
# first calendar day-of-month on or after which each series is released
RELEASE_DAY = {"emp": 3, "cpi": 13, "ind": 16}

DEFAULT_ASSETS = {
    "energy": (0.0004, 0.0002, 0.0001, 0.0001),
    "clean": (-0.0006, -0.0002),
    "defense": (0.0008,),
}


def _tuple(v):
    return tuple(float(x) for x in v)


@dataclass(frozen=True)
class DgpConfig:
    n_cycles: int = 7
    days_per_cycle: int = 250
    gap_days: int = 90
    shock_vol: float = 2.0
    ar: tuple = (0.7, 0.2)
    news_loading: tuple = (0.3, 0.5, 1.5, -1.0, 0.5)
    interaction_loading: tuple = (0.0, 0.0, -3.0, 1.0, 0.0)
    pres_effect: float = 0.5
    lag_news_loading: float = 0.3
    confound_vol: float = 0.0
    confound_beta: float = 0.002
    market_beta: float = 0.8
    noise_vol: float = 0.01
    kernels: dict = field(default_factory=lambda: dict(DEFAULT_ASSETS))
    yield_vol: float = 2.0
    equity_vol: float = 1.0
    macro_mean: float = 0.1
    macro_vol: float = 0.3
    revision_vol: float = 0.05
    volume_mu: float = 6.0
    volume_sigma: float = 0.8
    resolve_elections: bool = False
    start: str = "2000-01-03"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ar", _tuple(self.ar))
        object.__setattr__(self, "news_loading", _tuple(self.news_loading))
        object.__setattr__(self, "interaction_loading", _tuple(self.interaction_loading))
        object.__setattr__(self, "kernels", {k: _tuple(v) for k, v in dict(self.kernels).items()})
        self.validate()

    def validate(self):
        for name in ("shock_vol", "confound_vol", "noise_vol", "yield_vol", "equity_vol",
                     "macro_vol", "revision_vol", "volume_sigma"):
            if getattr(self, name) < 0:
                raise InvalidConfig(f"{name} must be >= 0")
        if self.n_cycles < 1 or self.days_per_cycle <= N_LAGS + 1:
            raise InvalidConfig("need >= 1 cycle of more than n_lags + 1 days")
        if self.gap_days < 30:
            raise InvalidConfig("gap_days must be >= 30")
        if len(self.ar) > N_LAGS:
            raise InvalidConfig(f"at most {N_LAGS} autoregressive coefficients")
        if self.ar and not ar_stationary(self.ar):
            raise InvalidConfig(f"autoregressive coefficients {self.ar} are not stationary")
        if len(self.news_loading) != 5 or len(self.interaction_loading) != 5:
            raise InvalidConfig("news loadings need 5 entries")
        if not self.kernels:
            raise InvalidConfig("at least one asset kernel required")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig("seed must be an unsigned 64-bit integer")


def ar_stationary(coefs: Sequence[float]) -> bool:
    """Roots of ``1 - a1 z - ... - ap z^p`` all outside the unit circle."""
    poly = np.r_[-np.asarray(coefs, dtype=float)[::-1], 1.0]
    roots = np.roots(poly)
    return bool(np.all(np.abs(roots) > 1.0 + 1e-12))


def load_dgp_config(path_or_text, section: str = "dgp", **overrides) -> DgpConfig:
    """Key-value DGP config (INI section). Tuples are comma separated;
    kernels use ``kernel.<asset> = k0, k1, ...``."""
    cp = configparser.ConfigParser()
    try:
        with open(path_or_text, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, TypeError):
        cp.read_string(str(path_or_text))
    kw = {}
    if cp.has_section(section):
        types = {f.name: f.type for f in fields(DgpConfig)}
        kernels = {}
        for key, raw in cp.items(section):
            if key.startswith("kernel."):
                kernels[key.split(".", 1)[1]] = [float(x) for x in raw.split(",") if x.strip()]
            elif key not in types:
                raise InvalidConfig(f"unknown DGP key {key!r}")
            elif key in ("ar", "news_loading", "interaction_loading"):
                kw[key] = [float(x) for x in raw.split(",") if x.strip()]
            elif key in ("n_cycles", "days_per_cycle", "gap_days", "seed"):
                kw[key] = int(raw)
            elif key == "resolve_elections":
                kw[key] = cp.getboolean(section, key)
            elif key == "start":
                kw[key] = raw.strip()
            else:
                kw[key] = float(raw)
        if kernels:
            kw["kernels"] = kernels
    kw.update(overrides)
    try:
        return DgpConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(str(exc)) from None


@dataclass(frozen=True)
class SimData:
    calendar: TradingCalendar
    cycles: list
    prob: DailySeries
    news: object
    assets: dict
    volume: DailySeries
    true_shocks: np.ndarray
    confound: np.ndarray
    vintages: VintageStore
    releases: ReleaseCalendar
    yield_level: np.ndarray
    equity_level: np.ndarray
    rep_share: np.ndarray


def _calendar_and_cycles(cfg: DgpConfig):
    total = cfg.gap_days + cfg.n_cycles * (cfg.days_per_cycle + cfg.gap_days)
    start = np.busday_offset(np.datetime64(cfg.start, "D"), 0, roll="forward")
    cal = TradingCalendar(np.busday_offset(start, np.arange(total), roll="forward"))
    cycles = []
    for i in range(cfg.n_cycles):
        lo = cfg.gap_days + i * (cfg.days_per_cycle + cfg.gap_days)
        hi = lo + cfg.days_per_cycle - 1
        cycles.append(ElectionCycle(2000 + 4 * i, cal.dates[lo], cal.dates[hi], cal.dates[hi],
                                    "D" if i % 2 == 0 else "R"))
    return cal, cycles


def _macro_data(cfg: DgpConfig, cal: TradingCalendar, rng):
    """Vintage store and release calendar for emp/cpi/ind (levels)."""
    months = np.unique(cal.dates.astype("datetime64[M]"))
    records, releases = [], {}
    for key, sid in MACRO_IDS.items():
        rel = []
        for m in months:
            first = m.astype("datetime64[D]") + (RELEASE_DAY[key] - 1)
            pos = cal.next_on_or_after(first)
            if pos is not None and cal.dates[pos].astype("datetime64[M]") == m:
                rel.append((cal.dates[pos], m - 1))
        level = 100.0
        base_period = rel[0][1] - 1
        records.append(VintageRecord(sid, base_period, rel[0][0], level))
        prev_level = level
        for k, (date, period) in enumerate(rel):
            g = rng.normal(cfg.macro_mean, cfg.macro_vol)
            level = prev_level * (1.0 + g / 100.0)
            records.append(VintageRecord(sid, period, date, level))
            if k + 1 < len(rel) and cfg.revision_vol > 0:
                revised = level * (1.0 + rng.normal(0.0, cfg.revision_vol) / 100.0)
                records.append(VintageRecord(sid, period, rel[k + 1][0], revised))
                level = revised
            prev_level = level
        releases[sid] = rel
    return VintageStore(records), ReleaseCalendar(releases)


def simulate_dgp(cfg: DgpConfig, seed: Optional[object] = None) -> SimData:
    """Draw one dataset. ``seed`` (int or SeedSequence) overrides ``cfg.seed``."""
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    cal, cycles = _calendar_and_cycles(cfg)
    n = len(cal)
    mask = cycle_mask(cal, cycles)
    pos = position_in_cycle(mask)
    inside = mask != NO_CYCLE

    d_yield = rng.normal(0.0, cfg.yield_vol, n)
    d_equity = rng.normal(0.0, cfg.equity_vol, n)
    d_yield[0] = d_equity[0] = 0.0
    yield_level = 2.0 * np.cumprod(1.0 + d_yield / 100.0)
    equity_level = 1000.0 * np.cumprod(1.0 + d_equity / 100.0)
    vintages, releases = _macro_data(cfg, cal, rng)
    news = build_news_panel(cal, DailySeries(cal, d_yield, "percent-change", "d_yield"),
                            DailySeries(cal, d_equity, "percent-change", "d_sp500"),
                            vintages, releases, cycles, MACRO_IDS)
    X = news.X(use_indicators=True)
    pres = np.nan_to_num(news.pres_r)

    eps = np.where(inside, rng.normal(0.0, cfg.shock_vol, n), 0.0)
    confound = np.where(inside, rng.normal(0.0, cfg.confound_vol, n), 0.0) if cfg.confound_vol else np.zeros(n)
    load = np.asarray(cfg.news_loading)
    inter = np.asarray(cfg.interaction_loading)
    # news effect in pp: contemporaneous plus a damped first lag
    news_pp = X @ load + pres * (X @ inter)
    news_pp[1:] += cfg.lag_news_loading * news_pp[:-1]
    a = np.asarray(cfg.ar)
    const = 0.5 * (1.0 - a.sum())
    pi = np.full(n, np.nan)
    for i in np.flatnonzero(inside):
        lags = [pi[i - s] if pos[i] >= s else 0.5 for s in range(1, len(a) + 1)]
        pi[i] = (const + float(np.dot(a, lags))
                 + (news_pp[i] + cfg.pres_effect * pres[i] + eps[i] + confound[i]) / 100.0)
    if np.any((pi[inside] <= 0) | (pi[inside] >= 1)):
        raise InvalidConfig("configuration drives the probability outside (0, 1)")
    winners = []
    for c in cycles:
        last = cal.position(c.election_date)
        winners.append(replace(c, winner="R" if pi[last] >= 0.5 else "D"))
    cycles = winners
    prob = DailySeries(cal, pi, "probability", "pi_R")
    if cfg.resolve_elections:
        prob = resolve_election_day(prob, cycles)

    volume = np.where(inside, np.round(np.exp(rng.normal(cfg.volume_mu, cfg.volume_sigma, n))), 0.0)
    volume = np.where(inside, np.maximum(volume, 1.0), 0.0)
    rep_share = rng.uniform(0.3, 0.7, n)

    assets = {}
    for name in sorted(cfg.kernels):
        k = np.asarray(cfg.kernels[name])
        response = np.convolve(eps, k)[:n]
        ret = (response + cfg.market_beta * d_equity / 100.0 + cfg.confound_beta * confound
               + rng.normal(0.0, cfg.noise_vol, n))
        ret[0] = 0.0
        assets[name] = DailySeries(cal, math.log(100.0) + np.cumsum(ret), "log-price", name)
    return SimData(cal, cycles, prob, news, assets,
                   DailySeries(cal, volume, "count", "volume"), eps, confound,
                   vintages, releases, yield_level, equity_level, rep_share)


def true_irf(cfg: DgpConfig, horizons: int, asset: Optional[str] = None, impact_pp: float = 10.0) -> np.ndarray:
    """Percent response of ``y[t+h] - y[t-1]`` to an ``impact_pp`` shock, h = 0..horizons."""
    name = asset if asset is not None else sorted(cfg.kernels)[0]
    k = np.zeros(horizons + 1)
    kern = np.asarray(cfg.kernels[name])[: horizons + 1]
    k[: len(kern)] = kern
    return 100.0 * impact_pp * np.cumsum(k)


def oracle_hac(residuals, X, weights, L: int) -> np.ndarray:
    """Literal double-sum Bartlett sandwich; for cross-checking only (small n)."""
    X = np.asarray(X, dtype=float)
    e = np.asarray(residuals, dtype=float)
    w = np.asarray(weights, dtype=float)
    keep = w > 0
    X, e, w = X[keep], e[keep], w[keep]
    n, k = X.shape
    xtwx = np.zeros((k, k))
    for t in range(n):
        xtwx += w[t] * np.outer(X[t], X[t])
    bread = np.linalg.inv(xtwx)
    meat = np.zeros((k, k))
    for t in range(n):
        st = w[t] * e[t] * X[t]
        for s in range(max(0, t - L), min(n, t + L + 1)):
            ss = w[s] * e[s] * X[s]
            meat += (1.0 - abs(t - s) / (L + 1.0)) * np.outer(st, ss)
    return bread @ meat @ bread


def estimate_from_sim(sim: SimData, spec: LpSpec, asset: Optional[str] = None):
    """Shock extraction and the daily local projection on one simulated dataset."""
    name = asset if asset is not None else sorted(sim.assets)[0]
    X, resp = build_election_design(sim.prob, sim.news, sim.cycles)
    fit = fit_wls(X, resp)
    shocks = extract_shocks(fit, sim.calendar, sim.cycles, sim.volume)
    impact = impact_response(shocks, sim.prob, spec)
    return run_lp_daily(shocks, sim.assets[name], spec, impact), shocks


def recovery_correlation(sim: SimData) -> float:
    """Correlation of extracted and injected shocks on the estimation rows."""
    X, resp = build_election_design(sim.prob, sim.news, sim.cycles)
    fit = fit_wls(X, resp)
    shocks = extract_shocks(fit, sim.calendar, sim.cycles)
    rows = shocks.observed
    return float(np.corrcoef(shocks.values[rows], sim.true_shocks[rows])[0, 1])


def _rep(args):
    cfg, child, spec, asset = args
    sim = simulate_dgp(cfg, seed=child)
    ir, _ = estimate_from_sim(sim, spec, asset)
    return ir.coef, ir.se


@dataclass
class MonteCarloResult:
    horizons: np.ndarray
    coefs: np.ndarray
    ses: np.ndarray
    truth: np.ndarray

    def coverage(self, level: float) -> np.ndarray:
        z = z_value(level)
        return np.mean(np.abs(self.coefs - self.truth) <= z * self.ses, axis=0)

    def coverage_se(self, level: float) -> np.ndarray:
        p = self.coverage(level)
        return np.sqrt(p * (1 - p) / len(self.coefs))

    def mean(self) -> np.ndarray:
        return self.coefs.mean(axis=0)

    def mean_se(self) -> np.ndarray:
        return self.coefs.std(axis=0, ddof=1) / np.sqrt(len(self.coefs))


def monte_carlo(cfg: DgpConfig, n_reps: int, horizons: int = 20, asset: Optional[str] = None,
                spec: Optional[LpSpec] = None, n_jobs: int = 1) -> MonteCarloResult:
    """Replicate simulate -> shocks -> local projection ``n_reps`` times."""
    spec = spec or LpSpec(horizons=horizons)
    spec = replace(spec, horizons=horizons)
    children = np.random.SeedSequence(cfg.seed).spawn(n_reps)
    jobs = [(cfg, c, spec, asset) for c in children]
    if n_jobs == 1:
        out = [_rep(j) for j in jobs]
    else:
        with ProcessPoolExecutor(n_jobs) as pool:
            out = list(pool.map(_rep, jobs, chunksize=max(1, n_reps // (4 * n_jobs))))
    coefs = np.array([c for c, _ in out])
    ses = np.array([s for _, s in out])
    truth = true_irf(cfg, horizons, asset, spec.impact_pp or 10.0)
    return MonteCarloResult(np.arange(horizons + 1), coefs, ses, truth)


def coverage_experiment(cfg: DgpConfig, n_reps: int, levels=(0.68, 0.90), horizons: int = 20,
                        asset: Optional[str] = None, n_jobs: int = 1) -> dict:
    """Per-horizon share of replications whose bands contain the true response.

    Returns ``{level: (coverage, mc_se)}``.
    """
    if n_reps < 100:
        raise ValueError("coverage needs n_reps >= 100")
    mc = monte_carlo(cfg, n_reps, horizons, asset, n_jobs=n_jobs)
    return {lv: (mc.coverage(lv), mc.coverage_se(lv)) for lv in levels}


# ---------------------------------------------------------------- monthly DGP

@dataclass(frozen=True)
class MonthlyDgpConfig:
    n_months: int = 400
    start: str = "1990-01"
    shock_vol: float = 1.0
    active_share: float = 0.4
    kernel: tuple = (0.001, 0.002, 0.003, 0.003, 0.002, 0.001, 0.0005,
                     -0.002, -0.003, -0.003, -0.002, -0.001)
    noise_vol: float = 0.003
    control_ar: float = 0.8
    control_vol: float = 0.2
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kernel", _tuple(self.kernel))
        if self.n_months < 100:
            raise InvalidConfig("n_months must be >= 100")
        if not 0 < self.active_share <= 1:
            raise InvalidConfig("active_share must be in (0, 1]")

    def true_peak(self, horizons: int = 12) -> int:
        k = np.zeros(horizons + 1)
        k[: min(len(self.kernel), horizons + 1)] = self.kernel[: horizons + 1]
        return int(np.argmax(np.cumsum(k)))


def simulate_monthly(cfg: MonthlyDgpConfig, seed=None):
    """Monthly shock sums, log employment responding through ``kernel``, and four controls.

    Shocks are zero in inactive (non-election) months, mimicking the gaps
    between cycles.
    """
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    n = cfg.n_months
    months = np.arange(np.datetime64(cfg.start, "M"), np.datetime64(cfg.start, "M") + n)
    active = rng.uniform(size=n) < cfg.active_share
    shock = np.where(active, rng.normal(0.0, cfg.shock_vol, n), 0.0)
    dy = np.convolve(shock, np.asarray(cfg.kernel))[:n] + rng.normal(0.0, cfg.noise_vol, n)
    y = math.log(1000.0) + np.cumsum(dy)
    controls = {}
    for name in ("unrate", "dlog_cpi", "dlog_pce", "dlog_ip"):
        v = np.zeros(n)
        e = rng.normal(0.0, cfg.control_vol, n)
        for t in range(1, n):
            v[t] = cfg.control_ar * v[t - 1] + e[t]
        if name == "unrate":
            v += 5.0
        controls[name] = MonthlySeries(months, v, "level", name)
    return (MonthlySeries(months, shock, "pp", "shock_m"),
            MonthlySeries(months, y, "level", "employment"), controls)


def monthly_peak_hits(cfg: MonthlyDgpConfig, n_reps: int, tolerance: int = 1, horizons: int = 12):
    """Share of replications whose estimated peak horizon is within ``tolerance`` of the truth."""
    spec = LpSpec.monthly(horizons=horizons, exclusions=(), sample_start=None, sample_end=None,
                          impact_pp=None)
    truth = cfg.true_peak(horizons)
    hits = []
    for child in np.random.SeedSequence(cfg.seed).spawn(n_reps):
        shock, y, controls = simulate_monthly(cfg, child)
        ir = run_lp_monthly(shock, y, controls, spec)
        hits.append(abs(int(np.argmax(ir.coef)) - truth) <= tolerance)
    return float(np.mean(hits)), truth


def synthetic_quotes(sim: SimData) -> list:
    """Winner-take-all quotes reproducing ``sim.prob`` after normalisation."""
    quotes = []
    inside = ~np.isnan(sim.prob.values)
    for i in np.flatnonzero(inside):
        d = sim.calendar.dates[i]
        cid = [c.cycle_id for c in sim.cycles if c.contains(d)][0]
        tag = f"{cid % 100:02d}"
        p = float(sim.prob.values[i])
        vol = int(sim.volume.values[i])
        rep_units = int(round(vol * sim.rep_share[i]))
        quotes.append(ContractQuote(d, f"REP{tag}_WTA", p, rep_units))
        quotes.append(ContractQuote(d, f"DEM{tag}_WTA", 1.0 - p, vol - rep_units))
    return quotes


def dgp_summary(cfg: DgpConfig) -> dict:
    return asdict(cfg)
