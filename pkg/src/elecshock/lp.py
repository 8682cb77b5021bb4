"""Local-projection impulse responses to election shocks.

Daily responses regress the long difference ``y[t+h] - y[t-1]`` of a log
price on the shock with trade-volume weights; monthly responses use the
monthly shock sum and twelve lags of a control vector. Coefficients are
rescaled so that the shock raises the Republican win probability by
``impact_pp`` percentage points on impact.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from statistics import NormalDist
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import DegenerateShock, InsufficientSample
from .regress import INTERCEPT, DesignMatrix, fit_wls, hac_se, nw_bandwidth
from .shockgen import NewsPanel, ShockSeries, election_regressors
from .timeline import DailySeries, MonthlySeries, as_date, lagged_change, long_differences, shift

IRF_HEADER = ("spec", "series", "horizon", "coef", "se", "lo68", "hi68", "lo90", "hi90", "nobs", "bandwidth")
DEFAULT_LEVELS = (0.68, 0.90)
SHOCK = "shock"


@dataclass(frozen=True)
class Exclusion:
    """Drop rows whose ``target`` date (t+h) or any ``endpoint`` (t-1 or t+h)
    falls in ``[start, end]``."""

    start: np.datetime64
    end: np.datetime64
    on: str = "endpoints"

    def __post_init__(self):
        object.__setattr__(self, "start", as_date(self.start))
        object.__setattr__(self, "end", as_date(self.end))
        if self.on not in ("target", "endpoints"):
            raise ValueError("Exclusion.on must be 'target' or 'endpoints'")
        if self.end < self.start:
            raise ValueError("exclusion end precedes start")

    def hits(self, base_dates, target_dates) -> np.ndarray:
        def inside(d):
            d = np.asarray(d).astype("datetime64[D]")
            return (d >= self.start) & (d <= self.end)

        out = inside(target_dates)
        if self.on == "endpoints":
            out |= inside(base_dates)
        return out

    def describe(self) -> str:
        return f"{self.on}:{self.start}..{self.end}"


COVID_EXCLUSION = Exclusion("2020-03-01", "2020-12-31", "target")


@dataclass(frozen=True)
class LpSpec:
    horizons: int = 65
    variant: str = "baseline"
    weighted: bool = True
    control_lagged_change: bool = True
    month_days: int = 21
    impact_pp: Optional[float] = 10.0
    exclusions: tuple = ()
    drop_cycles: tuple = ()
    sample_start: Optional[str] = None
    sample_end: Optional[str] = None
    n_control_lags: int = 12
    levels: tuple = DEFAULT_LEVELS

    def __post_init__(self):
        if self.horizons < 0:
            raise ValueError("horizons must be >= 0")
        object.__setattr__(self, "exclusions", tuple(self.exclusions))
        object.__setattr__(self, "drop_cycles", tuple(self.drop_cycles))

    @classmethod
    def monthly(cls, **kw) -> "LpSpec":
        defaults = dict(horizons=12, variant="monthly", weighted=False,
                        exclusions=(COVID_EXCLUSION,), sample_start="2002-01-01",
                        sample_end="2024-03-31")
        defaults.update(kw)
        return cls(**defaults)

    def describe(self) -> dict:
        return {
            "variant": self.variant, "horizons": self.horizons, "weighted": self.weighted,
            "control_lagged_change": self.control_lagged_change, "impact_pp": self.impact_pp,
            "exclusions": [e.describe() for e in self.exclusions],
            "drop_cycles": list(self.drop_cycles),
            "sample": [self.sample_start, self.sample_end],
        }


@dataclass(frozen=True)
class ImpulseResponse:
    spec: str
    series: str
    horizons: np.ndarray
    coef: np.ndarray
    se: np.ndarray
    nobs: np.ndarray
    bandwidth: np.ndarray
    bands: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def scaled(self, c: float) -> "ImpulseResponse":
        bands = {lv: tuple(np.sort(np.vstack([lo * c, hi * c]), axis=0)) for lv, (lo, hi) in self.bands.items()}
        return replace(self, coef=self.coef * c, se=self.se * abs(c), bands=bands)

    def band(self, level: float):
        return self.bands[level]

    def to_rows(self) -> list:
        lo68, hi68 = self.bands[0.68]
        lo90, hi90 = self.bands[0.90]
        return [
            (self.spec, self.series, int(h), float(b), float(s), float(a), float(c),
             float(d), float(e), int(n), int(L))
            for h, b, s, a, c, d, e, n, L in zip(self.horizons, self.coef, self.se, lo68, hi68,
                                                   lo90, hi90, self.nobs, self.bandwidth)
        ]


def z_value(level: float) -> float:
    """Two-sided normal critical value."""
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    return NormalDist().inv_cdf(0.5 + level / 2.0)


def confidence_bands(ir: ImpulseResponse, levels: Sequence[float] = DEFAULT_LEVELS) -> ImpulseResponse:
    bands = {}
    for lv in levels:
        half = z_value(lv) * ir.se
        bands[lv] = (ir.coef - half, ir.coef + half)
    return replace(ir, bands=bands)


def _estimate(dep_by_h, regressors: Mapping[str, np.ndarray], weights, sample, horizons,
              shock_label=SHOCK, excluded_by_h=None):
    """Per-horizon WLS + HAC; returns coef, se, nobs, bandwidth arrays."""
    labels = (INTERCEPT,) + tuple(regressors)
    base = np.column_stack([np.ones(len(weights))] + [regressors[k] for k in regressors])
    coef, se, nobs, bw = (np.full(horizons + 1, np.nan) for _ in range(4))
    j = labels.index(shock_label)
    for h in range(horizons + 1):
        dep = dep_by_h(h)
        rows = sample & np.isfinite(dep) & np.all(np.isfinite(base), axis=1) & (weights > 0)
        if excluded_by_h is not None:
            rows &= ~excluded_by_h(h)
        idx = np.flatnonzero(rows)
        k = len(labels)
        if len(idx) < 3 * k:
            raise InsufficientSample(f"h={h}: {len(idx)} rows for {k} parameters")
        w = weights[idx]
        x = base[idx, j]
        xbar = np.sum(w * x) / np.sum(w)
        if np.sum(w * (x - xbar) ** 2) <= 0:
            raise DegenerateShock(f"h={h}: shock has zero variance on the estimation sample")
        X = DesignMatrix(idx, labels, base[idx], w)
        fit = fit_wls(X, dep[idx])
        L = nw_bandwidth(fit.n_obs)
        coef[h], se[h] = fit.params[j], hac_se(fit, X, L, shock_label)
        nobs[h], bw[h] = fit.n_obs, L
    return coef, se, nobs.astype(int), bw.astype(int)


def _daily_exclusions(dates, spec: LpSpec):
    if not spec.exclusions:
        return None
    n = len(dates)

    def excluded(h):
        base = np.full(n, np.datetime64("NaT"), dtype="datetime64[D]")
        target = np.full(n, np.datetime64("NaT"), dtype="datetime64[D]")
        base[1:] = dates[:-1]
        if h < n:
            target[:n - h] = dates[h:]
        out = np.zeros(n, dtype=bool)
        for e in spec.exclusions:
            out |= e.hits(base, target)
        return out

    return excluded


def _package(spec: LpSpec, series: str, coef, se, nobs, bw, scale: float, meta) -> ImpulseResponse:
    ir = ImpulseResponse(spec.variant, series, np.arange(len(coef)), coef * scale, se * abs(scale),
                         nobs, bw, meta=dict(meta, scale=scale, **spec.describe()))
    return confidence_bands(ir, spec.levels)


def _shock_sample(shocks: ShockSeries, spec: LpSpec):
    if spec.drop_cycles:
        shocks = shocks.drop_cycles(spec.drop_cycles)
    sample = shocks.sample()
    weights = shocks.weights if spec.weighted else np.where(sample, 1.0, 0.0)
    return shocks, sample, weights


def impact_response(shocks: ShockSeries, prob: DailySeries, spec: LpSpec) -> float:
    """Raw h=0 response of the probability (pp) to one unit of the shock."""
    ir = run_lp_prob(shocks, prob, replace(spec, horizons=0, impact_pp=None))
    return float(ir.coef[0])


def normalization(spec: LpSpec, impact: Optional[float]) -> float:
    if spec.impact_pp is None or impact is None:
        return 1.0
    if impact == 0:
        raise DegenerateShock("zero impact response; cannot normalise")
    return spec.impact_pp / impact


def run_lp_daily(shocks: ShockSeries, y: DailySeries, spec: LpSpec,
                 impact: Optional[float] = None) -> ImpulseResponse:
    """Daily responses (percent) of a log price to the shock.

    Each horizon fits ``100 (y[t+h] - y[t-1])`` on an intercept, the shock
    and, when ``spec.control_lagged_change``, the one-month change
    ``100 (y[t-1] - y[t-1-month_days])``. ``impact`` is the raw impact
    response of the probability (see :func:`impact_response`); with it the
    output is per ``spec.impact_pp`` pp shock.
    """
    shocks, sample, weights = _shock_sample(shocks, spec)
    yv = 100.0 * y.reindex(shocks.calendar).values
    regs = {SHOCK: shocks.values}
    if spec.control_lagged_change:
        regs["dy_1m_lag"] = lagged_change(yv, spec.month_days, lag=1)
    coef, se, nobs, bw = _estimate(lambda h: long_differences(yv, h), regs, weights, sample,
                                   spec.horizons, excluded_by_h=_daily_exclusions(shocks.dates, spec))
    return _package(spec, y.name, coef, se, nobs, bw, normalization(spec, impact),
                    {"shock": shocks.name, "impact": impact})


def run_lp_prob(shocks: ShockSeries, prob: DailySeries, spec: LpSpec) -> ImpulseResponse:
    """Responses of the probability level (pp); self-normalised at h=0.

    Pass a probability series already extended past election day (see
    ``shockgen.resolved_probability``) to use post-election horizons.
    """
    shocks, sample, weights = _shock_sample(shocks, spec)
    pv = 100.0 * prob.reindex(shocks.calendar).values
    coef, se, nobs, bw = _estimate(lambda h: shift(pv, -h), {SHOCK: shocks.values}, weights,
                                   sample, spec.horizons,
                                   excluded_by_h=_daily_exclusions(shocks.dates, spec))
    scale = normalization(spec, coef[0])
    return _package(spec, prob.name or "pi_R", coef, se, nobs, bw, scale,
                    {"shock": shocks.name, "impact": float(coef[0])})


def run_lp_onestep(prob: DailySeries, news: NewsPanel, y: DailySeries, cycles, spec: LpSpec,
                   weights: Optional[DailySeries] = None, use_indicators: bool = True) -> ImpulseResponse:
    """One-step responses: ``Δy[t+h]`` on the whole probability-equation stack.

    The reported coefficient is that of the contemporaneous probability,
    expressed per pp (raw) or per ``impact_pp`` pp when normalised.
    """
    labels, Z, eligible, mask = election_regressors(prob, news, cycles,
                                                    use_indicators=use_indicators,
                                                    contemporaneous_prob=True)
    cal = prob.calendar
    yv = 100.0 * y.reindex(cal).values
    sample = eligible.copy()
    if spec.drop_cycles:
        sample &= ~np.isin(mask, list(spec.drop_cycles))
    if spec.weighted:
        if weights is None:
            raise ValueError("weighted one-step run needs trade-volume weights")
        w = np.where(sample, np.nan_to_num(weights.reindex(cal).values), 0.0)
    else:
        w = np.where(sample, 1.0, 0.0)
    # probability enters in pp so the coefficient is per pp like the two-step shock
    regs = {lab: (100.0 * Z[:, i] if lab == "pi_l0" else Z[:, i])
            for i, lab in enumerate(labels) if lab != INTERCEPT}
    if spec.control_lagged_change:
        regs["dy_1m_lag"] = lagged_change(yv, spec.month_days, lag=1)
    coef, se, nobs, bw = _estimate(lambda h: long_differences(yv, h), regs, w, sample,
                                   spec.horizons, shock_label="pi_l0",
                                   excluded_by_h=_daily_exclusions(cal.dates, spec))
    return _package(replace(spec, variant="one-step"), y.name, coef, se, nobs, bw,
                    normalization(spec, 1.0), {"shock": "pi_R"})


def monthly_controls(unrate: MonthlySeries, cpi: MonthlySeries, pce: MonthlySeries,
                     ip: MonthlySeries) -> dict:
    """Unemployment rate and 100 x one-month log differences of CPI, PCE, IP."""
    def dlog(s: MonthlySeries) -> MonthlySeries:
        v = np.log(s.values)
        out = np.full(len(v), np.nan)
        out[1:] = 100.0 * np.diff(v)
        return MonthlySeries(s.months, out, "percent-change", f"dlog_{s.name}")

    return {"unrate": unrate, "dlog_cpi": dlog(cpi), "dlog_pce": dlog(pce), "dlog_ip": dlog(ip)}


def run_lp_monthly(shock_m: MonthlySeries, y: MonthlySeries, controls: Mapping[str, MonthlySeries],
                   spec: LpSpec, impact: Optional[float] = None) -> ImpulseResponse:
    """Monthly responses (percent) of log employment ``y``.

    Regressors: intercept, the monthly shock and ``n_control_lags`` lags of
    ``W = (100 y, controls...)``. Unweighted; ``spec.exclusions`` act on
    months (a month is inside a range when its first day is).
    """
    months = y.months
    yv = 100.0 * y.values
    shock = shock_m.reindex(months).values
    shock = np.where(np.isnan(shock) & (months >= shock_m.months[0]) & (months <= shock_m.months[-1]),
                     0.0, shock)
    W = {"y": yv}
    W.update({k: v.reindex(months).values for k, v in controls.items()})
    regs = {SHOCK: shock}
    for name, vals in W.items():
        for s in range(1, spec.n_control_lags + 1):
            regs[f"{name}_l{s}"] = shift(vals, s)
    days = months.astype("datetime64[D]")
    sample = np.ones(len(months), dtype=bool)
    if spec.sample_start:
        sample &= days >= as_date(spec.sample_start).astype("datetime64[M]").astype("datetime64[D]")
    if spec.sample_end:
        sample &= days <= as_date(spec.sample_end)
    weights = np.ones(len(months))
    coef, se, nobs, bw = _estimate(lambda h: long_differences(yv, h), regs, weights, sample,
                                   spec.horizons, excluded_by_h=_daily_exclusions(days, spec))
    return _package(spec, y.name, coef, se, nobs, bw, normalization(spec, impact),
                    {"shock": shock_m.name, "impact": impact})


def monthly_regressor_count(n_controls: int = 4, n_lags: int = 12) -> int:
    return 2 + n_lags * (1 + n_controls)
