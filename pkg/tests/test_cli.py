import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

import barwave.cli as cli
from barwave.response import ResponseField

ROOT = Path(__file__).resolve().parents[1]
SCEN = ROOT / "scenarios"


def _scenario(tmp_path, params, **blocks):
    data = {"name": "t", "params": params, **blocks}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(data))
    return path


SMALL_GRID = {"nx": 9, "nt": 7}
GENERIC = {"h1": 0.4, "h2": -0.3, "h3": 0.6, "a_over_L": 0.4, "L": 1.8, "c": 1.5}
PULSE = {"type": "gaussian", "amplitude": 0.1, "mu_over_L": 0.3, "sigma": 0.1}


def test_spectrum_command_writes_tables_and_figure(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["spectrum", "--config", str(SCEN / "fig_spectrum_a2_5.json"), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["p"] == 5 and summary["n_lines"] <= 5
    assert (out / "spectrum.csv").exists() and (out / "spectrum.png").stat().st_size > 0


def test_respond_json_and_no_figures(tmp_path):
    path = _scenario(tmp_path, GENERIC, initial=PULSE, grid=SMALL_GRID, solver={"N": 10})
    out = tmp_path / "o"
    assert cli.main(["respond", "--config", str(path), "--out", str(out), "--format", "json",
                     "--no-figures"]) == 0
    data = json.loads((out / "response.json").read_text())
    assert np.array(data["u"]).shape == (7, 9)
    assert not list(out.glob("*.png"))
    summary = json.loads((out / "summary.json").read_text())
    assert summary["route"] == "modal" and summary["classification"]["regime"] == "modal"


def test_respond_is_deterministic(tmp_path):
    path = _scenario(tmp_path, GENERIC, initial=PULSE, grid=SMALL_GRID, solver={"N": 10})
    for name in ("a", "b"):
        assert cli.main(["respond", "--config", str(path), "--out", str(tmp_path / name), "--no-figures"]) == 0
    assert (tmp_path / "a" / "response.csv").read_bytes() == (tmp_path / "b" / "response.csv").read_bytes()


def test_critical_auto_route_never_builds_expansion(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise AssertionError("modal expansion built for critical parameters")
    monkeypatch.setattr(cli, "build_expansion", boom)
    path = _scenario(tmp_path, {**GENERIC, "h2": 1.0, "h3": 0.0}, initial=PULSE, grid=SMALL_GRID)
    assert cli.main(["respond", "--config", str(path), "--out", str(tmp_path / "o"), "--no-figures"]) == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["route"] == "critical" and summary["regime"] == "right_transparent"


@pytest.mark.parametrize("params,solver", [
    ({**GENERIC, "h2": 1.0, "h3": 0.0}, {"mode": "modal"}),
    ({**GENERIC, "h1": 1.0}, {}),
    ({**GENERIC, "h1": -1.0, "h2": 1.0, "h3": 0.0}, {}),
    (GENERIC, {"mode": "critical"}),
])
def test_regime_exit_code(tmp_path, params, solver):
    path = _scenario(tmp_path, params, initial=PULSE, grid=SMALL_GRID, solver=solver)
    assert cli.main(["respond", "--config", str(path), "--out", str(tmp_path / "o")]) == 3


def test_spectrum_on_critical_parameters_exits_3(tmp_path):
    path = _scenario(tmp_path, {**GENERIC, "h2": 1.0})
    assert cli.main(["spectrum", "--config", str(path), "--out", str(tmp_path / "o")]) == 3


@pytest.mark.parametrize("text", [
    "{not json",
    json.dumps({"params": {**GENERIC, "bogus": 1}}),
    json.dumps({"params": {**GENERIC, "c": -1}}),
    json.dumps({"params": GENERIC, "solver": {"mode": "magic"}}),
    json.dumps({"params": {**GENERIC, "a_over_L": 1.5}}),
    json.dumps({"initial": PULSE}),
])
def test_config_errors_exit_2(tmp_path, text, capsys):
    path = tmp_path / "bad.json"
    path.write_text(text)
    assert cli.main(["respond", "--config", str(path), "--out", str(tmp_path / "o")]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_missing_file_exit_2(tmp_path):
    assert cli.main(["classify", "--config", str(tmp_path / "nope.json")]) == 2


def test_numerical_failure_exit_4(tmp_path, monkeypatch):
    from barwave.errors import NumericalFailure

    def fail(*a, **k):
        raise NumericalFailure("forced")
    monkeypatch.setattr(cli, "solve", fail)
    path = _scenario(tmp_path, GENERIC, initial=PULSE, grid=SMALL_GRID)
    assert cli.main(["respond", "--config", str(path), "--out", str(tmp_path / "o")]) == 4


def test_classify_prints_json(tmp_path, capsys):
    assert cli.main(["classify", "--config", str(SCEN / "zero_damping.json"), "--out", str(tmp_path)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["midpoint"] and data["zero_damping"] == "case3"


def test_compare_reports_spurious_instability(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["compare", "--config", str(SCEN / "spurious_fem.json"), "--out", str(out),
                     "--no-figures"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert not summary["spectrum"]["fem_stable"] and summary["spectrum"]["spurious"]
    assert summary["time"]["status"] == "fem_unstable"


def test_compare_near_transparent(tmp_path):
    out = tmp_path / "o"
    path = _scenario(tmp_path, {"h1": 0.3, "h2": 0.99, "h3": 0.7, "a_over_L": 0.5, "L": 1.8, "c": 1.5},
                     initial={**PULSE, "mu_over_L": 0.25}, grid={"nx": 9, "nt": 21},
                     solver={"N": 40, "n_elements": 160})
    assert cli.main(["compare", "--config", str(path), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["time"]["status"] == "ok" and summary["time"]["max_abs_diff"] < 5e-3
    assert (out / "comparison.png").exists() and (out / "fem_spectrum.png").exists()
    fem = ResponseField.from_csv((out / "fem_response.csv").read_text())
    assert fem.u.shape == (21, 161)


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "barwave", "classify", "--config",
                           str(SCEN / "right_transparent.json"), "--out", str(tmp_path)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["regime"] == "right_transparent"
    assert subprocess.run([sys.executable, "-m", "barwave", "--version"], capture_output=True,
                          text=True).stdout.startswith("barwave")


@pytest.mark.parametrize("name", sorted(p.stem for p in SCEN.glob("*.json")))
def test_bundled_scenarios_parse(name):
    from barwave.scenario import load_scenario
    scn = load_scenario(SCEN / f"{name}.json")
    assert scn.params.L > 0 and len(scn.grid.t) >= 2
