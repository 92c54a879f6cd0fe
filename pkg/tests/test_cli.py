import json

import pytest

from jacedge.cli import main, parse_config
from jacedge.errors import ConfigError


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, data in {
        "free": {},
        "sqrt": {"a_terms": [{"c": 0.25, "tau": 0.5}]},
        "bad": {"a_terms": [{"c": 1.0, "tau": 1.0}]},
        "opuc": {"D": 0.5, "n0": 2, "tau": 0.5},
    }.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(data))
        paths[name] = str(p)
    paths["dir"] = tmp_path
    return paths


def test_parse_valid(files):
    cfg = parse_config(["density", "--model", files["free"], "--grid", "1e-4:1e-1:25", "--out", "curve.csv"])
    assert cfg.command == "density" and cfg.grid.points == 25 and cfg.grid.log_spaced
    assert cfg.out == "curve.csv"


def test_parse_variant(files):
    assert parse_config(["verify", "--model", files["sqrt"], "--thm4-variant", "printed"]).thm4_variant == "printed"


def test_parse_errors_listed(files):
    with pytest.raises(ConfigError) as exc:
        parse_config(["density", "--model", files["free"], "--grid", "0.1:0.001:1", "--tol-rel", "-1"])
    msg = str(exc.value)
    assert "lo < hi" in msg and "2 points" in msg and "tol-rel" in msg


def test_parse_unknown():
    with pytest.raises(ConfigError):
        parse_config(["frobnicate"])
    with pytest.raises(ConfigError):
        parse_config(["density", "--nope"])


def test_config_file_overridden_by_flags(files):
    cfg_path = files["dir"] / "run.json"
    cfg_path.write_text(json.dumps({"model": files["sqrt"], "grid": "1e-3:1e-2:5", "tol-rel": 1e-8}))
    cfg = parse_config(["density", "--config", str(cfg_path), "--grid", "1e-2:1e-1:3"])
    assert cfg.model_path == files["sqrt"] and cfg.tol_rel == 1e-8 and cfg.grid.points == 3
    cfg_path.write_text(json.dumps({"colour": "red"}))
    with pytest.raises(ConfigError):
        parse_config(["density", "--config", str(cfg_path)])


def test_exit_codes(files, capsys):
    assert main(["density", "--model", files["free"], "--grid", "0.1:0.001:25"]) == 2
    assert main(["density", "--model", files["bad"], "--grid", "1e-2:1e-1:3"]) == 3
    assert main(["density", "--model", files["sqrt"], "--grid", "1e-3:1e-1:3", "--max-doublings", "0"]) == 4
    assert main(["density", "--model", str(files["dir"] / "missing.json")]) == 2


def test_density_deterministic(files):
    out1 = files["dir"] / "a.csv"
    out2 = files["dir"] / "b.csv"
    args = ["density", "--model", files["sqrt"], "--grid", "1e-3:1e-1:6"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2), "--workers", "2"]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().splitlines()
    assert lines[0] == "delta,x,f,logf,converged,n_max_used" and len(lines) == 7


def test_edge_and_predict(files, capsys):
    assert main(["edge", "--model", files["sqrt"], "--grid", "1e-3:1e-1:3", "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["columns"][:3] == ["delta", "x", "N"] and len(data["rows"]) == 3
    assert main(["predict", "--model", files["sqrt"]]) == 0
    series = json.loads(capsys.readouterr().out)
    assert series["variable"] == "delta" and series["terms"][0]["kappa"] == 1.5


def test_verify_verdicts(files, capsys):
    grid = ["--grid", "1e-3:1e-1:10"]
    assert main(["verify", "--model", files["sqrt"]] + grid) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["verdict"] == "PASS"
    assert set(["verdict", "slope", "slope_ci", "points_used", "variant"]) <= set(rep)
    assert main(["verify", "--model", files["sqrt"], "--thm4-variant", "printed"] + grid) == 5
    assert json.loads(capsys.readouterr().out)["verdict"] == "FAIL"


def test_verify_custom_series(files, capsys):
    s = files["dir"] / "s.json"
    s.write_text(json.dumps({"variable": "delta", "terms": [{"Q": 0.3926990816987244, "kappa": 1.5}]}))
    assert main(["verify", "--model", files["sqrt"], "--series", str(s), "--grid", "1e-3:1e-1:10"]) in (0, 5)
    rep = json.loads(capsys.readouterr().out)
    assert rep["points_used"] == 10


def test_opuc(files, capsys):
    assert main(["opuc", "--model", files["opuc"], "--grid", "1e-2:0.5:5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "theta,x,logw,predicted,residual,converged" and len(lines) == 6
    assert main(["opuc", "--model", files["sqrt"], "--grid", "1e-2:0.5:5"]) == 2


def test_subordinate(files, capsys):
    assert main(["subordinate", "--model", files["sqrt"], "--horizon", "10000"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["holds"] and rep["dirichlet"]["status"] == "not-subordinate"


def test_selftest(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 9
