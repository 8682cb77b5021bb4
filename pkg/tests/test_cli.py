import csv
import hashlib
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from elecshock import cli, ingest, lp
from elecshock.timeline import MonthlySeries

SVG_NS = "{http://www.w3.org/2000/svg}"


def _rows(path):
    lines = [l for l in Path(path).read_text().splitlines() if not l.startswith("#")]
    return list(csv.DictReader(lines))


def _digest(folder):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(Path(folder).iterdir())
            if p.is_file()}


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    root = tmp_path_factory.mktemp("sim")
    cfg = root / "dgp.ini"
    cfg.write_text("[dgp]\nn_cycles = 3\ndays_per_cycle = 200\n")
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(root / "data"), "--seed", "8"]) == 0
    run = root / "data" / "run.ini"
    text = run.read_text().replace("horizons = 65", "horizons = 20")
    run.write_text(text)
    return run


def test_empty_config_is_usage_error(tmp_path):
    p = tmp_path / "empty.ini"
    p.write_text("")
    assert cli.main(["validate", "--config", str(p), "--out", str(tmp_path)]) == 2


def test_missing_config_and_output(tmp_path, bundle):
    assert cli.main(["shocks", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path)]) == 2
    cfg = tmp_path / "c.ini"
    cfg.write_text(bundle.read_text().replace("dir = out", ""))
    for f in ("market.csv", "assets.csv", "vintages.csv", "releases.csv", "events.csv"):
        (tmp_path / f).write_bytes((bundle.parent / f).read_bytes())
    assert cli.main(["shocks", "--config", str(cfg)]) == 2


def test_bad_spec_choice_is_usage_error(tmp_path, bundle):
    cfg = bundle.parent / "bad.ini"
    cfg.write_text(bundle.read_text().replace("specs = ", "specs = sideways, "))
    try:
        assert cli.main(["irf", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    finally:
        cfg.unlink()


def test_seed_must_fit_u64(tmp_path):
    cfg = tmp_path / "d.ini"
    cfg.write_text("[dgp]\nn_cycles = 1\n")
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path), "--seed", str(2**64)]) == 2


def test_shocks_rows_match_design_and_rerun_identical(tmp_path, bundle):
    inputs = {p.name: p.read_bytes() for p in bundle.parent.iterdir() if p.is_file()}
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["shocks", "--config", str(bundle), "--out", str(a)]) == 0
    assert cli.main(["shocks", "--config", str(bundle), "--out", str(b)]) == 0
    assert _digest(a) == _digest(b)
    summary = (a / "fit_summary.txt").read_text()
    n_obs = int(summary.split("observations ")[1].split()[0])
    rows = _rows(a / "shocks.csv")
    assert len(rows) == n_obs
    assert list(rows[0]) == ["date", "shock_pp", "weight", "cycle"]
    sha = hashlib.sha256(bundle.read_bytes()).hexdigest()
    for f in ("shocks.csv", "fit_summary.txt", "top_shocks.csv", "calendar_audit.csv"):
        head = (a / f).read_text().splitlines()[0]
        assert head == f"# config_sha256={sha}"
    # inputs untouched
    assert inputs == {p.name: p.read_bytes() for p in bundle.parent.iterdir() if p.is_file()}
    top = _rows(a / "top_shocks.csv")
    assert top[0]["nearest_event"]


def test_irf_outputs(tmp_path, bundle):
    out = tmp_path / "irf"
    assert cli.main(["irf", "--config", str(bundle), "--out", str(out)]) == 0
    csvs = sorted(out.glob("irf_*.csv"))
    assert len(csvs) == 3 * 4 + 1
    for p in csvs:
        rows = _rows(p)
        assert list(rows[0]) == list(lp.IRF_HEADER)
        assert len(rows) == 21
        for r in rows:
            lo90, lo68, hi68, hi90 = (float(r[k]) for k in ("lo90", "lo68", "hi68", "hi90"))
            assert lo90 <= lo68 <= hi68 <= hi90
        svg = p.with_suffix(".svg")
        text = svg.read_text()
        root = ET.fromstring(text.split("?>", 1)[1])
        assert root.tag == SVG_NS + "svg"
        assert len(root.findall(SVG_NS + "polygon")) == 2
        assert len(root.findall(SVG_NS + "polyline")) == 1
        labels = [t.text for t in root.iter(SVG_NS + "text")]
        assert "Business days" in labels
        assert "href" not in text and "<image" not in text and "url(" not in text


def test_narrative_command(tmp_path, bundle):
    assert cli.main(["narrative", "--config", str(bundle), "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "narrative_shocks.csv")
    assert len(rows) == 3 * 7


def test_zero_kernel_run_is_flat(tmp_path):
    cfg = tmp_path / "dgp.ini"
    cfg.write_text("[dgp]\nkernel.energy = 0\nkernel.clean = 0\nkernel.defense = 0\n")
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "d"), "--seed", "3"]) == 0
    run = tmp_path / "d" / "run.ini"
    run.write_text(run.read_text().replace("specs = baseline, narrative, crude, onestep, prob",
                                           "specs = baseline"))
    assert cli.main(["irf", "--config", str(run), "--out", str(tmp_path / "o")]) == 0
    for name in ("energy", "clean", "defense"):
        rows = _rows(tmp_path / "o" / f"irf_baseline_{name}.csv")
        inside = [abs(float(r["coef"])) < 2 * float(r["se"]) for r in rows]
        assert np.mean(inside) >= 0.9


def test_monthly_section(tmp_path):
    from elecshock import synth
    # long gaps stretch seven cycles over two decades of months
    dgp = tmp_path / "dgp.ini"
    dgp.write_text("[dgp]\ndays_per_cycle = 120\ngap_days = 600\n")
    assert cli.main(["simulate", "--config", str(dgp), "--out", str(tmp_path / "d"), "--seed", "4"]) == 0
    shock, y, controls = synth.simulate_monthly(
        synth.MonthlyDgpConfig(start="1999-01", n_months=300, seed=2))
    levels = {"total": MonthlySeries(y.months, np.exp(y.values), "level", "total"),
              "unrate": controls["unrate"]}
    for k in ("cpi", "pce", "ip"):
        levels[k] = MonthlySeries(y.months, 100 * np.exp(np.cumsum(controls[f"dlog_{k}"].values) / 100),
                                  "level", k)
    ingest.serialize_employment(levels, tmp_path / "d" / "employment.csv")
    run = tmp_path / "d" / "run.ini"
    text = run.read_text().replace("[data]\n", "[data]\nemployment = employment.csv\n")
    text = text.replace("specs = baseline, narrative, crude, onestep, prob", "specs = baseline")
    text += "\n[monthly]\nindustries = total\nsample = 2001-01:2021-12\nhorizons = 6\n"
    run.write_text(text)
    assert cli.main(["irf", "--config", str(run), "--out", str(tmp_path / "o")]) == 0
    rows = _rows(tmp_path / "o" / "irf_monthly_total.csv")
    assert len(rows) == 7
    assert ">Months<" in (tmp_path / "o" / "irf_monthly_total.svg").read_text()


def test_validate_passes_and_names_fault(tmp_path, capsys):
    ok = tmp_path / "v.ini"
    ok.write_text("[validate]\nn_reps = 100\n")
    assert cli.main(["validate", "--config", str(ok), "--out", str(tmp_path / "a")]) == 0
    bad = tmp_path / "f.ini"
    bad.write_text("[validate]\nn_reps = 100\ninject_fault = bandwidth_off_by_one\n")
    capsys.readouterr()
    assert cli.main(["validate", "--config", str(bad), "--out", str(tmp_path / "b")]) == 1
    err = capsys.readouterr().err
    assert "hac_oracle" in err
    report = (tmp_path / "b" / "validate.txt").read_text()
    assert "FAIL hac_oracle" in report
    assert report.count("FAIL") == 1


def test_simulated_bundle_has_headers(bundle):
    for p in bundle.parent.iterdir():
        if p.suffix in (".csv", ".ini"):
            assert p.read_text().startswith("# config_sha256="), p.name
