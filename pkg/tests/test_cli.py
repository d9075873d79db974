import json

import pytest

from fuzzyspec import cli
from fuzzyspec.errors import ConfigurationError
from fuzzyspec.output import emit_plot_script, read_csv


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
    return p


def run(tmp_path, cfg, *extra):
    p = write(tmp_path, cfg)
    out = tmp_path / "out"
    command = cfg["command"] if isinstance(cfg, dict) else "analyze"
    return cli.main([command, "--config", str(p), "--out", str(out), *extra]), out


def test_unknown_key_named():
    with pytest.raises(ConfigurationError, match="parameters.gird"):
        cli.parse_config('{"command": "gup", "model": "beta", "parameters": {"gird": 4}}')


def test_malformed_json_position():
    with pytest.raises(ConfigurationError, match="line 1, column"):
        cli.parse_config('{"command": "gup",')


def test_field_path_in_error():
    with pytest.raises(ConfigurationError, match=r"parameters\.beta: must be > 0"):
        cli.parse_config('{"command": "gup", "model": "beta", "parameters": {"beta": -1.0}}')


def test_command_model_mismatch():
    with pytest.raises(ConfigurationError, match="model"):
        cli.parse_config('{"command": "gup", "model": "interval"}')


def test_config_error_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, {"command": "analyze", "model": "interval",
                             "parameters": {"grid": 4}})
    assert code == 2
    assert "parameters.grid" in capsys.readouterr().err


def test_analyze_writes_report(tmp_path):
    code, out = run(tmp_path, {"command": "analyze", "model": "interval",
                               "parameters": {"copies": 2, "grid": 64}})
    assert code == 0
    data = json.loads((out / "deficiency.json").read_text())
    assert (data["r_plus"], data["r_minus"]) == (2, 2)
    assert data["classification"] == "fuzzy-A"


def test_uncertainty_csv_header(tmp_path):
    code, out = run(tmp_path, {"command": "uncertainty-curve", "model": "interval",
                               "parameters": {"grid": 64, "xi_min": 0, "xi_max": 1,
                                              "xi_step": 0.5}})
    assert code == 0
    first = (out / "uncertainty.csv").read_text().splitlines()[0]
    assert first.startswith("# schema=fuzzyspec/1 config_hash=")
    header, rows = read_csv(out / "uncertainty.csv")
    assert header == ["xi", "dx_min", "residual"]
    assert [r[0] for r in rows] == [0.0, 0.5, 1.0]


def test_seed_precedence(tmp_path, monkeypatch):
    cfg = {"command": "gup", "model": "beta",
           "parameters": {"grid": 64, "n_states": 20, "seed": 3}}
    monkeypatch.setenv("FUZZYSPEC_SEED", "5")
    code, out = run(tmp_path, cfg)
    assert json.loads((out / "gup.json").read_text())["seed"] == 5
    code, out = run(tmp_path, cfg, "--seed", "8")
    assert json.loads((out / "gup.json").read_text())["seed"] == 8
    monkeypatch.delenv("FUZZYSPEC_SEED")
    code, out = run(tmp_path, cfg)
    assert json.loads((out / "gup.json").read_text())["seed"] == 3


def test_numerical_failure_writes_error(tmp_path):
    # a non-Hermitian matrix cannot be analysed
    cfg = {"command": "analyze", "model": "matrix",
           "parameters": {"dim": 2, "codim": 0,
                          "matrix": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]]}}
    code, out = run(tmp_path, cfg)
    assert code == 1
    assert json.loads((out / "error.json").read_text())["error"] == "SymmetryError"


def test_flow_outputs(tmp_path):
    code, out = run(tmp_path, {"command": "flow", "model": "interval",
                               "parameters": {"grid": 64, "theta_prime": 0.7}})
    assert code == 0
    summary = json.loads((out / "flow.json").read_text())
    assert summary["derived_law"]["phase_max_error"] < 1e-12
    assert (out / "flow.gp").read_text().startswith("set datafile separator")


def test_plot_script_handles_empty_and_missing(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("# schema=fuzzyspec/1 config_hash=x seed=0\nxi,dx_min,residual\n")
    assert "empty data range" in emit_plot_script([empty])
    with pytest.raises(FileNotFoundError):
        emit_plot_script([tmp_path / "nope.csv"])
    assert cli.main(["plot-script", str(tmp_path / "nope.csv")]) == 1


def test_plot_script_overlays(tmp_path):
    paths = []
    for i in range(2):
        p = tmp_path / f"r{i}.csv"
        p.write_text(f"# c\nxi,dx_min,residual\n0,{i},0\n1,{i},0\n")
        paths.append(p)
    text = emit_plot_script(paths, "two runs")
    assert "'r0.csv'" in text and "'r1.csv'" in text
