"""Command-line front end: ``elecshock {shocks,irf,narrative,simulate,validate}``.

Every command reads one INI config (``--config``) and writes into ``--out``.
Exit codes: 0 success, 1 estimation or property failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
import scipy

from . import __version__
from . import ingest, lp, regress, shockgen, synth
from .errors import ElecShockError, InvalidConfig
from .svg import render_irf_svg
from .timeline import DailySeries, ElectionCycle, MonthlySeries, TradingCalendar, cycle_mask

log = logging.getLogger("elecshock")

SPECS = ("baseline", "narrative", "crude", "onestep", "prob")
SHOCKS_HEADER = ("date", "shock_pp", "weight", "cycle")


class UsageError(Exception):
    pass


def _bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise InvalidConfig(f"not a boolean: {raw!r}")


def _list(raw: str) -> list:
    return [x.strip() for x in raw.split(",") if x.strip()]


@dataclass
class RunConfig:
    path: Path
    text: str
    parser: configparser.ConfigParser
    data: dict = field(default_factory=dict)
    cycles: list = field(default_factory=list)
    news: dict = field(default_factory=dict)
    shocks: dict = field(default_factory=dict)
    irf: dict = field(default_factory=dict)
    monthly: Optional[dict] = None
    out: Optional[str] = None

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()

    def input_hash(self) -> str:
        h = hashlib.sha256()
        for key in sorted(self.data):
            if self.data[key] is not None:
                h.update(key.encode())
                h.update(Path(self.data[key]).read_bytes())
        return h.hexdigest()

    def header(self) -> list:
        out = [f"config_sha256={self.sha256}"]
        if self.data:
            out.append(f"inputs_sha256={self.input_hash()}")
        return out + [f"elecshock={__version__} numpy={np.__version__} scipy={scipy.__version__}"]


def load_config(path, require_data: bool = True) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise UsageError(f"config file {path} not found")
    text = path.read_text(encoding="utf-8")
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise UsageError(f"cannot parse config: {exc}") from None
    if not cp.sections():
        raise UsageError("config is empty")
    cfg = RunConfig(path, text, cp)
    base = path.parent
    if cp.has_option("output", "dir"):
        cfg.out = str(base / cp.get("output", "dir"))
    if require_data:
        if not cp.has_section("data"):
            raise UsageError("config needs a [data] section")
        for key in ("market", "assets", "vintages", "releases", "events", "employment"):
            raw = cp.get("data", key, fallback=None)
            if raw is None:
                if key in ("events", "employment"):
                    cfg.data[key] = None
                    continue
                raise UsageError(f"[data] {key} is required")
            p = base / raw
            if not p.exists():
                raise UsageError(f"[data] {key}: {p} does not exist")
            cfg.data[key] = p
        cfg.cycles = _cycles(cp)
    news = cp["news"] if cp.has_section("news") else {}
    cfg.news = {k: news.get(k, d) for k, d in
                (("yield", "dgs2"), ("equity", "sp500"), ("emp", "emp"), ("cpi", "cpi"), ("ind", "ind"))}
    sh = cp["shocks"] if cp.has_section("shocks") else {}
    try:
        cfg.shocks = dict(
            n_lags=int(sh.get("n_lags", "5")),
            use_indicators=_bool(sh.get("use_indicators", "true")),
            weighted=_bool(sh.get("weighted", "false")),
            weight_mode=sh.get("weight_mode", "sum"),
            resolve_election_day=_bool(sh.get("resolve_election_day", "true")),
            drop_cycles=[int(x) for x in _list(sh.get("drop_cycles", ""))],
            top=int(sh.get("top", "20")),
        )
        ir = cp["irf"] if cp.has_section("irf") else {}
        specs = _list(ir.get("specs", "baseline"))
        bad = [s for s in specs if s not in SPECS]
        if bad:
            raise InvalidConfig(f"unknown spec(s) {bad}; choose from {SPECS}")
        excl = {}
        for key in ir:
            if key.startswith("exclude."):
                excl[key.split(".", 1)[1]] = [_range(r) for r in _list(ir[key])]
        cfg.irf = dict(
            series=_list(ir.get("series", "")), specs=specs,
            horizons=int(ir.get("horizons", "65")), window=int(ir.get("window", "5")),
            weighted=_bool(ir.get("weighted", "true")),
            control_lagged_change=_bool(ir.get("control_lagged_change", "true")),
            impact_pp=float(ir.get("impact_pp", "10")),
            drop_cycles=[int(x) for x in _list(ir.get("drop_cycles", ""))],
            month_days=int(ir.get("month_days", "21")),
            exclusions=excl,
        )
        if cfg.shocks["weight_mode"] not in ("sum", "rep", "dem"):
            raise InvalidConfig("weight_mode must be sum, rep or dem")
        if cfg.irf["window"] < 1 or cfg.irf["horizons"] < 0:
            raise InvalidConfig("window must be >= 1 and horizons >= 0")
        if cp.has_section("monthly"):
            mo = cp["monthly"]
            start, end = _list(mo.get("sample", "2002-01:2024-03").replace(":", ","))
            cfg.monthly = dict(
                industries=_list(mo.get("industries", "")),
                controls={k: mo.get(k, k) for k in ("unrate", "cpi", "pce", "ip")},
                horizons=int(mo.get("horizons", "12")),
                start=start, end=end,
            )
    except (ValueError, KeyError) as exc:
        raise UsageError(f"invalid config value: {exc}") from None
    return cfg


def _range(raw: str) -> lp.Exclusion:
    lo, hi = raw.split(":")
    return lp.Exclusion(lo.strip(), hi.strip(), "endpoints")


def _cycles(cp) -> list:
    cycles = []
    if cp.has_section("cycles"):
        preset = cp.get("cycles", "preset", fallback="none").strip().lower()
        if preset == "us":
            years = [int(y) for y in _list(cp.get("cycles", "years", fallback=""))] or None
            cycles += shockgen.us_cycles(years)
        elif preset != "none":
            raise UsageError(f"unknown cycle preset {preset!r}")
    for sec in cp.sections():
        if sec.startswith("cycle."):
            s = cp[sec]
            try:
                cycles.append(ElectionCycle(int(sec.split(".", 1)[1]), s["first"], s["last"], s["election"],
                                            s["incumbent"].strip(), s.get("winner", "").strip() or None))
            except (KeyError, ValueError) as exc:
                raise UsageError(f"[{sec}]: {exc}") from None
    if not cycles:
        raise UsageError("no election cycles configured")
    return sorted(cycles, key=lambda c: c.first_date)


# ---------------------------------------------------------------- pipeline

@dataclass
class Inputs:
    calendar: TradingCalendar
    cycles: list
    prob: DailySeries
    volume: DailySeries
    news: shockgen.NewsPanel
    assets: dict
    closes: dict
    audit: dict


def load_inputs(cfg: RunConfig) -> Inputs:
    quotes = ingest.parse_market_file(cfg.data["market"])
    closes = ingest.parse_asset_file(cfg.data["assets"])
    need = [cfg.news["yield"], cfg.news["equity"]] + cfg.irf["series"]
    missing = [s for s in need if s not in closes]
    if missing:
        raise InvalidConfig(f"asset file lacks series {missing}")
    cal = ingest.asset_calendar(closes, need)
    mkt = ingest.market_calendar(quotes)
    cycles = cfg.cycles
    mask = cycle_mask(cal, cycles)
    in_cycle = cal.dates[mask != -1]
    audit = {
        "market_dates_not_in_asset_calendar": np.setdiff1d(mkt.dates, cal.dates),
        "cycle_asset_dates_without_quotes": np.setdiff1d(in_cycle, mkt.dates),
    }
    prob, volume = ingest.probability_and_volume(quotes, cal, cfg.shocks["weight_mode"])
    prob = prob.with_values(np.where(mask == -1, np.nan, prob.values))
    if cfg.shocks["resolve_election_day"]:
        prob = shockgen.resolve_election_day(prob, cycles)
    vint = ingest.parse_vintage_file(cfg.data["vintages"])
    rel = ingest.parse_release_file(cfg.data["releases"])
    news = shockgen.build_news_panel(
        cal, ingest.pct_change_series(closes[cfg.news["yield"]], cal, "d_yield"),
        ingest.pct_change_series(closes[cfg.news["equity"]], cal, "d_sp500"),
        vint, rel, cycles, {k: cfg.news[k] for k in shockgen.MACRO})
    assets = {s: ingest.log_price_series(closes[s], cal, s) for s in cfg.irf["series"]}
    return Inputs(cal, cycles, prob, volume, news, assets, closes, audit)


def compute_shocks(cfg: RunConfig, inp: Inputs):
    cycles = [c for c in inp.cycles if c.cycle_id not in cfg.shocks["drop_cycles"]]
    w = inp.volume if cfg.shocks["weighted"] else None
    X, resp = shockgen.build_election_design(inp.prob, inp.news, cycles, cfg.shocks["n_lags"],
                                             cfg.shocks["use_indicators"], weights=w)
    if not shockgen.audit_design(X, inp.calendar, cycles, cfg.shocks["n_lags"]):
        raise ElecShockError("design rows mix dates from different cycles")
    fit = regress.fit_wls(X, resp)
    L = regress.nw_bandwidth(fit.n_obs)
    hac = regress.newey_west(fit, X, L)
    shocks = shockgen.extract_shocks(fit, inp.calendar, cycles, inp.volume)
    return X, fit, hac, shocks, cycles


def _write_shocks(path, shocks, header):
    rows = [(str(d), ingest.fmt_float(v), ingest.fmt_float(w), int(c))
            for d, v, w, c, o in zip(shocks.dates, shocks.values, shocks.weights, shocks.cycle,
                                     shocks.observed) if o]
    ingest._write_csv(rows, SHOCKS_HEADER, path, header)
    return len(rows)


def _fit_summary(fit, hac, header) -> str:
    lines = [f"# {h}" for h in header]
    lines += [f"observations {fit.n_obs}", f"r_squared {fit.r2:.6f}",
              f"hac_bandwidth {hac.lags} (raw {regress.nw_bandwidth_raw(fit.n_obs):.4f})",
              f"condition {fit.condition:.6g}", "", f"{'regressor':<20} {'coef':>14} {'hac_se':>14}"]
    for lab, b, s in zip(fit.labels, fit.params, hac.se):
        lines.append(f"{lab:<20} {b:>14.6g} {s:>14.6g}")
    return "\n".join(lines) + "\n"


def cmd_shocks(cfg: RunConfig, out: Path, seed=None) -> int:
    inp = load_inputs(cfg)
    X, fit, hac, shocks, cycles = compute_shocks(cfg, inp)
    head = cfg.header()
    n = _write_shocks(out / "shocks.csv", shocks, head)
    (out / "fit_summary.txt").write_text(_fit_summary(fit, hac, head), encoding="utf-8")
    events = shockgen.load_events(cfg.data.get("events"))
    order = np.argsort(-np.abs(shocks.values), kind="stable")[: cfg.shocks["top"]]
    rows = []
    for rank, i in enumerate(order, 1):
        label, gap = events.label_near(shocks.dates[i])
        rows.append((rank, str(shocks.dates[i]), ingest.fmt_float(shocks.values[i]),
                     int(shocks.cycle[i]), label, gap))
    ingest._write_csv(rows, ("rank", "date", "shock_pp", "cycle", "nearest_event", "days_from_event"),
                      out / "top_shocks.csv", head)
    audit = [(k, str(d)) for k, v in inp.audit.items() for d in v]
    ingest._write_csv(audit, ("reason", "date"), out / "calendar_audit.csv", head)
    print(f"shocks: {n} rows, R2={fit.r2:.4f}, n={fit.n_obs} -> {out}")
    return 0


def _write_ir(out: Path, ir, head, xlabel):
    stem = f"irf_{ir.spec}_{ir.series}"
    ingest._write_csv(ir.to_rows(), lp.IRF_HEADER, out / f"{stem}.csv", head)
    ylabel = "Percentage points" if ir.spec == "prob" else "Percent"
    title = f"{ir.series}: {ir.spec} shock"
    (out / f"{stem}.svg").write_text(
        render_irf_svg(ir, title, xlabel, ylabel, comment=" ".join(head)), encoding="utf-8")


def cmd_irf(cfg: RunConfig, out: Path, seed=None) -> int:
    inp = load_inputs(cfg)
    X, fit, hac, shocks, cycles = compute_shocks(cfg, inp)
    head = cfg.header()
    ic = cfg.irf
    base = lp.LpSpec(horizons=ic["horizons"], weighted=ic["weighted"],
                     control_lagged_change=ic["control_lagged_change"], impact_pp=ic["impact_pp"],
                     drop_cycles=tuple(ic["drop_cycles"]), month_days=ic["month_days"])
    resolved = shockgen.resolved_probability(inp.prob, cycles)
    impact = lp.impact_response(shocks, inp.prob, base)
    variants = {"baseline": shocks}
    if "narrative" in ic["specs"]:
        events = shockgen.load_events(cfg.data.get("events"))
        variants["narrative"] = shockgen.narrative_shocks(shocks, events, cycles, ic["window"])
    written = 0
    for spec_name in ic["specs"]:
        if spec_name == "prob":
            ir = lp.run_lp_prob(shocks, resolved, replace(base, variant="prob"))
            _write_ir(out, ir, head, "Business days")
            written += 1
            continue
        for s in ic["series"]:
            spec = replace(base, variant=spec_name, exclusions=tuple(ic["exclusions"].get(s, ())))
            y = inp.assets[s]
            if spec_name == "onestep":
                ir = lp.run_lp_onestep(inp.prob, inp.news, y, cycles, spec, weights=inp.volume,
                                       use_indicators=cfg.shocks["use_indicators"])
            elif spec_name == "crude":
                crude = shockgen.crude_outcome_series(cycles, inp.calendar)
                ir = lp.run_lp_daily(crude, y, replace(spec, impact_pp=None, weighted=False))
            else:
                sh = variants[spec_name]
                imp = impact if spec_name == "baseline" else lp.impact_response(sh, inp.prob, spec)
                ir = lp.run_lp_daily(sh, y, spec, imp)
            _write_ir(out, ir, head, "Business days")
            written += 1
    if cfg.monthly and cfg.data.get("employment"):
        written += _monthly(cfg, out, shocks, impact, head)
    print(f"irf: {written} responses -> {out}")
    return 0


def _monthly(cfg, out, shocks, impact, head) -> int:
    emp = ingest.parse_employment_file(cfg.data["employment"])
    mc = cfg.monthly
    names = mc["controls"]
    missing = [v for v in names.values() if v not in emp] + [i for i in mc["industries"] if i not in emp]
    if missing:
        raise InvalidConfig(f"employment file lacks {missing}")
    controls = lp.monthly_controls(emp[names["unrate"]], emp[names["cpi"]], emp[names["pce"]], emp[names["ip"]])
    shock_m = shockgen.monthly_aggregate(shocks)
    spec = lp.LpSpec.monthly(horizons=mc["horizons"], sample_start=f"{mc['start']}-01",
                             sample_end=f"{mc['end']}-01",
                             impact_pp=cfg.irf["impact_pp"])
    n = 0
    for ind in mc["industries"]:
        s = emp[ind]
        y = MonthlySeries(s.months, np.log(s.values), "level", ind)
        ir = lp.run_lp_monthly(shock_m, y, controls, spec, impact)
        _write_ir(out, ir, head, "Months")
        n += 1
    return n


def cmd_narrative(cfg: RunConfig, out: Path, seed=None) -> int:
    inp = load_inputs(cfg)
    _, _, _, shocks, cycles = compute_shocks(cfg, inp)
    events = shockgen.load_events(cfg.data.get("events"))
    nar = shockgen.narrative_shocks(shocks, events, cycles, cfg.irf["window"])
    pos = shockgen.event_positions(inp.calendar, events, cycles)
    rows = [(str(inp.calendar.dates[p]), ingest.fmt_float(nar.values[p]), " / ".join(labels))
            for p, labels in sorted(pos.items())]
    ingest._write_csv(rows, ("date", "shock_pp", "events"), out / "narrative_shocks.csv", cfg.header())
    print(f"narrative: {len(rows)} event dates, window {cfg.irf['window']} -> {out}")
    return 0


def write_simulated_bundle(sim: synth.SimData, out: Path, horizons: int = 65, seed: int = 0,
                           n_events: int = 6, header=()) -> Path:
    """Synthetic inputs in the ingest schemas plus a ``run.ini`` that points at them."""
    out.mkdir(parents=True, exist_ok=True)
    ingest.serialize_market(synth.synthetic_quotes(sim), out / "market.csv", header)
    closes = {name: dict(zip(sim.calendar.dates, np.exp(s.values))) for name, s in sim.assets.items()}
    closes["sp500"] = dict(zip(sim.calendar.dates, sim.equity_level))
    closes["dgs2"] = dict(zip(sim.calendar.dates, sim.yield_level))
    ingest.serialize_assets(closes, out / "assets.csv", header)
    ingest.serialize_vintages(sim.vintages, out / "vintages.csv", header)
    ingest.serialize_releases(sim.releases, out / "releases.csv", header)
    rng = np.random.default_rng(seed)
    events = []
    for c in sim.cycles:
        inside = sim.calendar.dates[(sim.calendar.dates >= c.first_date) & (sim.calendar.dates < c.election_date)]
        picks = sorted(rng.choice(len(inside), size=min(n_events, len(inside)), replace=False))
        events += [(inside[i], f"event {c.cycle_id}-{k + 1}", "synthetic") for k, i in enumerate(picks)]
        events.append((c.election_date, "Election", ""))
    ingest.serialize_events(events, out / "events.csv", header)
    lines = [f"# {h}" for h in header] + ["[data]", "market = market.csv", "assets = assets.csv", "vintages = vintages.csv",
             "releases = releases.csv", "events = events.csv", "",
             "[news]", "yield = dgs2", "equity = sp500", "emp = emp", "cpi = cpi", "ind = ind", ""]
    for c in sim.cycles:
        lines += [f"[cycle.{c.cycle_id}]", f"first = {c.first_date}", f"last = {c.last_date}",
                  f"election = {c.election_date}", f"incumbent = {c.incumbent}",
                  f"winner = {c.winner}", ""]
    lines += ["[shocks]", "resolve_election_day = false", "",
              "[irf]", f"series = {', '.join(sorted(sim.assets))}",
              f"specs = {', '.join(SPECS)}", f"horizons = {horizons}", "window = 5", "",
              "[output]", "dir = out", ""]
    path = out / "run.ini"
    path.write_text("\n".join(lines), encoding="utf-8")
    return path


def cmd_simulate(cfg: RunConfig, out: Path, seed=None) -> int:
    overrides = {} if seed is None else {"seed": seed}
    dgp = synth.load_dgp_config(cfg.text, **overrides)
    sim = synth.simulate_dgp(dgp)
    path = write_simulated_bundle(sim, out, seed=dgp.seed or 0, header=cfg.header())
    print(f"simulate: {len(sim.calendar)} days, {len(sim.cycles)} cycles -> {path}")
    return 0


def run_validation(n_reps: int = 100, inject_fault: str = "none", seed: int = 0) -> list:
    """Oracle suite; returns ``[(name, passed, detail)]``."""
    rng = np.random.default_rng(seed)
    results = []

    # HAC sandwich against the literal double sum
    worst = 0.0
    for _ in range(10):
        n, k = int(rng.integers(40, 120)), int(rng.integers(2, 5))
        X = regress.DesignMatrix(np.arange(n), ("const",) + tuple(f"x{j}" for j in range(k - 1)),
                                 np.column_stack([np.ones(n), rng.normal(size=(n, k - 1))]),
                                 rng.uniform(0.5, 2.0, n))
        fit = regress.fit_wls(X, rng.normal(size=n))
        for L in (0, 1, 3, 8):
            used = L + 1 if inject_fault == "bandwidth_off_by_one" else L
            got = regress.newey_west(fit, X, used).cov
            want = synth.oracle_hac(fit.residuals, X.values, X.weights, L)
            worst = max(worst, np.linalg.norm(got - want) / np.linalg.norm(want))
    results.append(("hac_oracle", worst <= 1e-12, f"max relative error {worst:.2e}"))

    # WLS equals OLS on sqrt(w)-scaled data
    worst = 0.0
    for _ in range(10):
        n, k = 80, 4
        Xv = rng.normal(size=(n, k))
        w = rng.uniform(0.1, 3.0, n)
        y = rng.normal(size=n)
        a = regress.fit_wls(regress.DesignMatrix(np.arange(n), tuple("abcd"), Xv, w), y).params
        sw = np.sqrt(w)
        b = regress.fit_wls(regress.DesignMatrix(np.arange(n), tuple("abcd"), Xv * sw[:, None], np.ones(n)),
                            y * sw).params
        worst = max(worst, float(np.max(np.abs(a - b))))
    results.append(("wls_scaling", worst <= 1e-10, f"max abs difference {worst:.2e}"))

    results.append(("bandwidth_rule", regress.nw_bandwidth(4096) == 12 and regress.nw_bandwidth(1259) == 8,
                    f"L(4096)={regress.nw_bandwidth(4096)} L(1259)={regress.nw_bandwidth(1259)}"))

    # one-step vs two-step, identical unweighted sample, no extra control
    cfg = synth.DgpConfig(n_cycles=3, days_per_cycle=120, seed=seed)
    sim = synth.simulate_dgp(cfg)
    spec = lp.LpSpec(horizons=10, weighted=False, control_lagged_change=False, impact_pp=None)
    Xd, resp = shockgen.build_election_design(sim.prob, sim.news, sim.cycles)
    shocks = shockgen.extract_shocks(regress.fit_wls(Xd, resp), sim.calendar, sim.cycles)
    name = sorted(sim.assets)[0]
    two = lp.run_lp_daily(shocks, sim.assets[name], spec)
    one = lp.run_lp_onestep(sim.prob, sim.news, sim.assets[name], sim.cycles, spec)
    diff = float(np.max(np.abs(one.coef - two.coef)))
    results.append(("fwl_equivalence", diff <= 1e-8, f"max abs difference {diff:.2e}"))

    # normalisation invariance
    spec = lp.LpSpec(horizons=10)
    a = lp.run_lp_daily(shocks, sim.assets[name], spec, lp.impact_response(shocks, sim.prob, spec))
    s2 = shocks.scaled(7.3)
    b = lp.run_lp_daily(s2, sim.assets[name], spec, lp.impact_response(s2, sim.prob, spec))
    rel = float(np.max(np.abs(a.coef - b.coef) / np.maximum(np.abs(a.coef), 1e-300)))
    results.append(("normalization_invariance", rel <= 1e-10, f"max relative change {rel:.2e}"))

    # reduced Monte Carlo coverage
    cov = synth.coverage_experiment(synth.DgpConfig(seed=seed), n_reps, levels=(0.90,), horizons=10)
    c90, _ = cov[0.90]
    tol = 3.0 * np.sqrt(0.09 / n_reps) + 0.02
    ok = bool(np.all(np.abs(c90 - 0.90) <= tol))
    results.append(("coverage", ok, f"90% coverage range [{c90.min():.3f}, {c90.max():.3f}], tolerance {tol:.3f}"))
    return results


def cmd_validate(cfg: RunConfig, out: Path, seed=None) -> int:
    p = cfg.parser
    n_reps = p.getint("validate", "n_reps", fallback=100)
    fault = p.get("validate", "inject_fault", fallback="none").strip()
    if fault not in ("none", "bandwidth_off_by_one"):
        raise UsageError(f"unknown inject_fault {fault!r}")
    if n_reps < 100:
        raise UsageError("validate n_reps must be >= 100")
    results = run_validation(n_reps, fault, 0 if seed is None else seed)
    lines = [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in results]
    text = "\n".join(lines) + "\n"
    (out / "validate.txt").write_text("".join(f"# {h}\n" for h in cfg.header()) + text, encoding="utf-8")
    sys.stdout.write(text)
    failed = [name for name, ok, _ in results if not ok]
    if failed:
        print(f"failing properties: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


COMMANDS = {"shocks": cmd_shocks, "irf": cmd_irf, "narrative": cmd_narrative,
            "simulate": cmd_simulate, "validate": cmd_validate}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="elecshock", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"elecshock {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="INI run configuration")
        p.add_argument("--out", help="output directory (default: [output] dir)")
        p.add_argument("--seed", type=int, help="unsigned 64-bit seed for synthetic commands")
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        needs_data = args.command in ("shocks", "irf", "narrative")
        cfg = load_config(args.config, require_data=needs_data)
        out = args.out or cfg.out
        if not out:
            raise UsageError("no output directory: pass --out or set [output] dir")
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args.seed)
    except (UsageError, InvalidConfig) as exc:
        print(f"elecshock: usage error: {exc}", file=sys.stderr)
        return 2
    except (ElecShockError, ValueError) as exc:
        print(f"elecshock: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
