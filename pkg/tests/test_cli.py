import json
import math
import subprocess
import sys

import pytest

from stbands import __version__, cli
from stbands.experiments import FalsifiedError

TORUS = json.dumps({"family": "TorusExtremal", "params": {"w": math.pi / 3}})
SCHEMA = ["command", "config", "verdict", "numbers", "slack", "h", "runtime_ms", "version"]


def run_json(argv, capsys):
    code = cli.main(argv + ["--json"])
    out = capsys.readouterr().out
    return code, json.loads(out), out


# ---------------------------------------------------------------- examples


def test_width_torus_saturated(capsys):
    code, rep, _ = run_json(["width", "--theorem", "torus", "--metric",
                             '{"family":"TorusExtremal","params":{"w":1.0471975511965976}}', "--grid", "2000"],
                            capsys)
    assert code == 0
    assert rep["verdict"] == "saturated" and rep["numbers"]["saturated"] is True


def test_identity_flat_zero(capsys):
    code, rep, _ = run_json(["identity", "--which", "lemma23", "--metric", "flat", "--potential", "zero",
                             "--grid", "100"], capsys)
    assert code == 0
    assert abs(rep["slack"]) <= 1e-20


def test_width_ricci_flat_rejected(capsys):
    code, rep, _ = run_json(["width", "--theorem", "ricci", "--metric",
                             '{"family":"FlatProduct","params":{}}'], capsys)
    assert code == 2
    assert rep["verdict"] == "rejected" and "ric" in rep["numbers"]["reason"]


# ---------------------------------------------------------------- exit codes and errors


def test_malformed_json_reports_line_and_column(capsys):
    code = cli.main(["width", "--metric", '{\n  "family": "FlatProduct",, }'])
    err = capsys.readouterr().err
    assert code == 1
    assert "line 2, column 27" in err


def test_malformed_json_file(tmp_path, capsys):
    p = tmp_path / "m.json"
    p.write_text('{"family": "RoundBand"\n "params": {}}')
    assert cli.main(["curvature", "--metric", str(p)]) == 1
    assert "line 2, column 2" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    [],
    ["nope"],
    ["width", "--grid", "-5"],
    ["width", "--tol", "0"],
    ["width", "--metric", "no-such-shorthand"],
    ["width", "--theorem", "bogus"],
    ["width", "--out", "/nonexistent-dir/x.json"],
])
def test_usage_errors_exit_1(argv, capsys):
    assert cli.main(argv) == 1
    assert "stbands:" in capsys.readouterr().err


def test_falsified_exit_3(monkeypatch, capsys):
    def boom(*a, **k):
        raise FalsifiedError("forced")
    monkeypatch.setattr(cli, "width_bound", boom)
    code, rep, _ = run_json(["width"], capsys)
    assert code == 3 and rep["verdict"] == "falsified"


# ---------------------------------------------------------------- report contract


def test_report_schema_and_config(capsys):
    _, rep, _ = run_json(["width", "--metric", TORUS], capsys)
    assert list(rep) == SCHEMA
    assert rep["version"] == __version__
    assert rep["config"]["metric"]["family"] == "TorusExtremal"
    assert rep["config"]["tol"] == 1e-8
    assert rep["runtime_ms"] == 0


@pytest.mark.parametrize("argv", [
    ["width", "--metric", TORUS],
    ["identity", "--which", "lemma71", "--metric", "gupsilon", "--potential", "auto", "--grid", "300"],
    ["solve", "--metric", "round", "--potential", "auto", "--grid", "200"],
])
def test_byte_identical_json(argv, capsys):
    _, _, a = run_json(argv, capsys)
    _, _, b = run_json(argv, capsys)
    assert a == b


def test_floats_carry_17_digits(capsys):
    _, _, text = run_json(["width", "--metric", TORUS], capsys)
    assert '"width": 1.0471975511965976' in text


def test_out_csv_svg(tmp_path, capsys):
    out, csv, svg = tmp_path / "r.json", tmp_path / "p.csv", tmp_path / "p.svg"
    code = cli.main(["solve", "--metric", "round", "--potential", "auto", "--grid", "100",
                     "--out", str(out), "--csv", str(csv), "--svg", str(svg), "--quiet"])
    assert code == 0
    assert capsys.readouterr().out == ""
    rep = json.loads(out.read_text())
    assert rep["command"] == "solve"
    lines = csv.read_text().splitlines()
    assert lines[0] == "rho,u,du,residual"
    assert len(lines) == 102
    text = svg.read_text()
    assert text.startswith("<svg") or text.startswith("<?xml")
    assert "<polyline" in text


def test_timing_flag_records_runtime(capsys):
    _, rep, _ = run_json(["width", "--metric", TORUS, "--timing"], capsys)
    assert rep["runtime_ms"] > 0


def test_plain_summary_line(capsys):
    assert cli.main(["width", "--metric", TORUS]) == 0
    assert capsys.readouterr().out.strip() == "width: saturated slack=0"


@pytest.mark.parametrize("argv", [
    ["width"], ["curvature"], ["bonnet-myers"], ["waist"], ["counterexample"], ["llarull"], ["barrier"],
    ["gradest"], ["dice", "--metric", '{"family":"RicciWarped","params":{"plateau":6}}'],
])
def test_default_commands_exit_0(argv, capsys):
    code = cli.main(argv + ["--quiet"])
    assert code == 0, capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "stbands", "width", "--metric", TORUS, "--json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "saturated"
