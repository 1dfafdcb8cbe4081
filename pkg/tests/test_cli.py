import csv
import io
import math
from pathlib import Path

import pytest

from aoi_cr import cli
from aoi_cr.core import SystemConfig
from aoi_cr.sweep import (
    CSV_COLUMNS,
    ConfigError,
    Grid,
    SweepSpec,
    compare,
    load_config,
    parse_config_text,
    read_sweep_csv,
    run_sweep,
    worker_count,
)

RECIPES = sorted((Path(__file__).resolve().parent.parent / "recipes").glob("*.cfg"))


def run_cli(args, capsys):
    code = cli.main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_config_text():
    params, run = parse_config_text("# c\np = 0.3  # trailing\n\nsweep = q:0.1:0.5:3\n")
    assert params == {"p": 0.3}
    assert run == {"sweep": "q:0.1:0.5:3"}


@pytest.mark.parametrize(
    "text, line",
    [
        ("p = 0.2\nbogus line\n", 2),
        ("p = 0.2\nfoo = 1\n", 2),
        ("p = abc\n", 1),
        ("p = 0.2\n\np = 0.3\n", 3),
        ("q =\n", 1),
        ("p = inf\n", 1),
    ],
)
def test_config_errors_carry_line(text, line):
    with pytest.raises(ConfigError) as exc:
        parse_config_text(text, "x.cfg")
    assert exc.value.line == line
    assert f"x.cfg:{line}:" in str(exc.value)


def test_config_domain_error(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("p = 1.5\n")
    with pytest.raises(ConfigError):
        load_config(f)


@pytest.mark.parametrize("text", ["x:0:1:3", "p:0.5:0.1:3", "p:0.1:0.5:1", "p:0.1:0.5", "p:a:b:c"])
def test_grid_validation(text):
    with pytest.raises(ConfigError):
        Grid.parse(text)


def test_sweep_endpoint_validation():
    with pytest.raises(ConfigError):
        SweepSpec(SystemConfig(), Grid("p", 0.0, 0.5, 3))


def test_grid_values_are_clean():
    assert Grid("p", 0.05, 0.65, 5).values() == [0.05, 0.2, 0.35, 0.5, 0.65]


def test_single_scheme_analytic_block():
    text = run_sweep(SweepSpec(SystemConfig(), Grid("q", 0.1, 0.5, 3), schemes=("overlay",)))
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 1 + 3 * 2
    assert all(len(r) == len(CSV_COLUMNS) for r in rows)
    assert {r[2] for r in rows[1:]} == {"overlay"}
    assert all(r[10] == "" for r in rows[1:])


def test_sweep_is_byte_stable_and_thread_independent(monkeypatch):
    spec = SweepSpec(
        SystemConfig(), Grid("p", 0.1, 0.6, 4), engines=("analytic", "simulate"), slots=50_000, seed=7
    )
    monkeypatch.setenv("AOI_CR_THREADS", "1")
    a = run_sweep(spec)
    monkeypatch.setenv("AOI_CR_THREADS", "4")
    b = run_sweep(spec)
    assert a == b
    seeds = {r["seed"] for r in read_sweep_csv(a) if r["engine"] == "simulate"}
    assert seeds == {"7", "8", "9", "10"}


def test_worker_count(monkeypatch):
    monkeypatch.setenv("AOI_CR_THREADS", "3")
    assert worker_count(10) == 3
    assert worker_count(2) == 2
    monkeypatch.setenv("AOI_CR_THREADS", "lots")
    with pytest.raises(ConfigError):
        worker_count(4)


def test_compare_zero_outage_underlay():
    cfg = SystemConfig(r_p=1e-12, r_s=1e-12, p=0.25, q=0.4)
    rows = compare(cfg, "underlay", slots=200_000, seed=1)
    for r in rows:
        assert math.isfinite(r.z)
    peaks = {r.system: r.analytic for r in rows if r.quantity == "avg_peak"}
    assert peaks["primary"] == pytest.approx(4.0, rel=1e-9)
    assert peaks["secondary"] == pytest.approx(2.5, rel=1e-9)


def test_cli_analyze(capsys):
    code, out, _ = run_cli(["analyze", "--engine", "all"], capsys)
    assert code == 0
    rows = read_sweep_csv(out)
    assert len(rows) == 8
    assert {r["engine"] for r in rows} == {"analytic", "asymptotic"}


def test_cli_critical_rate(capsys, tmp_path):
    f = tmp_path / "c.cfg"
    f.write_text("p_p_dbm = 40\nd_sp = 80\nd_ps = 300\nic_over_n0 = 10\np = 0.2\n")
    code, out, _ = run_cli(["critical-rate", "--config", str(f)], capsys)
    assert code == 0
    kv = dict(line.split(",") for line in out.strip().splitlines()[1:])
    assert 0 < float(kv["p_star"]) < 1
    assert kv["recommended"] == "overlay"


def test_cli_simulate_with_events(capsys, tmp_path):
    ev = tmp_path / "ev.csv"
    out = tmp_path / "o.csv"
    code, _, _ = run_cli(
        ["simulate", "--scheme", "underlay", "--slots", "30000", "--events", str(ev), "--out", str(out), "--with-exposure"],
        capsys,
    )
    assert code == 0
    rows = read_sweep_csv(out.read_text())
    assert len(rows) == 2 and "exposure" in rows[0]
    assert ev.read_text().startswith("system,g,d,W,K,S,Y,peak")


def test_cli_compare(capsys):
    code, out, _ = run_cli(["compare", "--scheme", "overlay", "--slots", "100000", "--mode", "abstract"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 10
    assert all(math.isfinite(float(r["z"])) for r in rows)


def test_cli_validation_exit_codes(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("p = 0.2\nnot a pair\n")
    code, _, err = run_cli(["analyze", "--config", str(bad)], capsys)
    assert code == 2
    assert "bad.cfg:2:" in err
    assert run_cli(["analyze", "--config", str(tmp_path / "missing.cfg")], capsys)[0] == 2
    assert run_cli(["sweep"], capsys)[0] == 2
    assert run_cli(["sweep", "--sweep", "omega:2:3:3"], capsys)[0] == 2
    assert run_cli(["simulate", "--slots", "10"], capsys)[0] == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2


def test_cli_numerical_failure_exit_code(capsys, monkeypatch):
    def boom(*a, **k):
        raise ArithmeticError("solved form disagrees")

    monkeypatch.setattr(cli, "evaluate_point", boom)
    assert run_cli(["analyze"], capsys)[0] == 3


def test_recipe_families_present():
    families = {p.name.split("_")[0] for p in RECIPES}
    assert families == {"primary", "exposure", "secondary", "crossover"}
    assert len(RECIPES) == 22


@pytest.mark.parametrize("recipe", RECIPES, ids=lambda p: p.stem)
def test_recipe_runs(recipe, tmp_path, capsys):
    out = tmp_path / "r.csv"
    code, _, err = run_cli(["sweep", "--config", str(recipe), "--out", str(out)], capsys)
    assert code == 0, err
    rows = read_sweep_csv(out.read_text())
    assert rows
    for r in rows:
        assert float(r["avg_peak"]) >= 1
