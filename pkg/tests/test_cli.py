import csv
import io
import json
import subprocess
import sys

import pytest

from cashdiv.bench import FIGURE_COLUMNS, TABLE_COLUMNS, BenchConfig, parse_number
from cashdiv.cli import main
from cashdiv.errors import DomainError

BASE = ["--spot", "100", "--rate", "0.03", "--vol", "0.3", "--strike", "100", "--maturity", "5"]
DIVS = ["--div-every", "1", "--div-amount", "3", "--div-start", "0.5"]


def _price(capsys, *extra):
    assert main(["price", *BASE, *DIVS, *extra]) == 0
    out = capsys.readouterr().out.splitlines()
    return float(out[-1].split()[0].split("=")[1]), out


@pytest.mark.parametrize("method, expected", [("gs", 24.42), ("pde", 24.42), ("mm", 24.42), ("bgs", 24.42)])
def test_price_methods(capsys, method, expected):
    price, out = _price(capsys, "--method", method)
    assert price == pytest.approx(expected, abs=0.01)
    assert "dividends=5" in out[0]


def test_price_mc_reports_stderr(capsys):
    _, out = _price(capsys, "--method", "mc", "--mc-paths", "20000", "--seed", "3")
    assert "stderr=" in out[-1]


def test_price_from_csv(tmp_path, capsys):
    path = tmp_path / "d.csv"
    path.write_text("time_years,amount\n" + "".join(f"{t + 0.5},3\n" for t in range(8)))
    assert main(["price", *BASE, "--div-csv", str(path)]) == 0
    out = capsys.readouterr().out
    assert "dividends=5" in out
    assert float(out.split("price=")[1]) == pytest.approx(24.42, abs=0.01)


def test_fraction_arguments(capsys):
    assert main(["price", *BASE, "--div-every", "7/365", "--div-amount", "0.1"]) == 0
    assert "dividends=260" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        ["price"],
        ["price", *BASE, "--method", "nope"],
        ["price", *BASE, "--spot", "abc"],
        ["price", *BASE[:-2], "--maturity", "-1"],
        ["price", *BASE, "--div-every", "1", "--div-csv", "x.csv"],
        ["price", *BASE, "--div-csv", "/nonexistent/x.csv"],
        ["sens", *BASE, "--time", "6"],
        ["bogus"],
    ],
)
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().err


def test_numerical_failure_exits_2(capsys):
    argv = ["price", *BASE, "--method", "gs", "--div-every", "10", "--div-start", "0.01", "--div-amount", "200"]
    assert main(argv) == 2
    assert "AdjustmentOverflowError" in capsys.readouterr().err


def test_sens_with_check(capsys):
    argv = ["sens", *BASE[:-2], "--maturity", "10", "--time", "5", "--check"]
    assert main(argv) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("order=1 times=5 sensitivity=-0.5371550949")
    assert float(lines[1].split("relative=")[1]) < 1e-3


def test_sens_three_dates(capsys):
    assert main(["sens", *BASE, "--time", "3", "--time", "1", "--time", "2"]) == 0
    assert "order=3 times=1,2,3" in capsys.readouterr().out


@pytest.fixture
def config_path(tmp_path):
    cfg = {
        "market": {"spot": 100, "rate": 0.03, "vol": 0.3},
        "schedule": {"every": 1, "amount": 3, "start": 0.5},
        "strike_ratios": [0.5, 1.0, 2.0],
        "maturities": [5],
        "methods": ["pde", "gs", "bv", "taylor2"],
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_table_csv_and_markdown(config_path, tmp_path):
    csv_path, md_path = tmp_path / "t.csv", tmp_path / "t.md"
    assert main(["table", "--config", str(config_path), "--csv", str(csv_path), "--markdown", str(md_path)]) == 0
    rows = list(csv.DictReader(io.StringIO(csv_path.read_text())))
    assert tuple(rows[0]) == TABLE_COLUMNS
    assert len(rows) == 12
    pde = [r for r in rows if r["method"] == "pde"]
    assert all(float(r["rel_err_pct"]) == 0.0 for r in pde)
    assert all(float(r["runtime_ms"]) >= 0.0 for r in rows)
    md = md_path.read_text()
    assert "**Maturity=5 years**" in md
    assert "| Proxy GS | 47.14 | 24.42 | 7.39 |" in md


def test_table_is_byte_deterministic(config_path, tmp_path):
    outs = []
    for jobs in ("1", "2"):
        path = tmp_path / f"t{jobs}.csv"
        assert main(["table", "--config", str(config_path), "--csv", str(path), "--no-timing", "--jobs", jobs]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_table_method_override(config_path, capsys):
    assert main(["table", "--config", str(config_path), "--methods", "gs,mm"]) == 0
    out = capsys.readouterr().out
    assert "Proxy GS" in out and "FD" not in out


def test_table_bad_config(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"market": {"spot": 100, "rate": 0.03, "vol": 0.3}}))
    assert main(["table", "--config", str(path)]) == 1


def test_table_records_failures(tmp_path, capsys):
    cfg = {
        "market": {"spot": 100, "rate": 0.03, "vol": 0.3},
        "schedule": {"every": 1, "amount": 60, "start": 0.01},
        "strike_ratios": [1.0],
        "maturities": [3],
        "methods": ["gs", "mm"],
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["table", "--config", str(path)]) == 0
    captured = capsys.readouterr()
    assert "mm: FitError" in captured.err
    assert "| Method of moments | n/a |" in captured.out


def test_figure(tmp_path):
    path = tmp_path / "f.csv"
    argv = ["figure", "--amount-max", "1", "--amount-step", "0.5", "--csv", str(path)]
    assert main(argv) == 0
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert tuple(rows[0]) == FIGURE_COLUMNS
    assert len(rows) == 9
    assert all(abs(float(r["rel_err_pct"])) < 0.01 for r in rows)


def test_config_round_trip():
    cfg = BenchConfig.from_json("configs/high_frequency.json")
    assert cfg.schedule.every == pytest.approx(7 / 365)
    assert BenchConfig.from_dict(cfg.to_dict()) == cfg


def test_parse_number():
    assert parse_number("7/365") == 7 / 365
    with pytest.raises(DomainError):
        parse_number("1/0")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cashdiv", "price", *BASE], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "price=" in proc.stdout
