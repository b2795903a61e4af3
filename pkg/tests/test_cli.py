import json

import pytest

from decopath.cli import ConfigError, PARAM_SCHEMAS, default_config, load_config, main, run_experiment

SMALL = {
    "example-nonmarcus": {"curves": ["parabola"], "n_values": [100], "n_grid": 4097},
    "butterfly": {"n": 2000, "depth": 20},
    "marcus-check": {"n_drivers": 2},
    "metrics-suite": {"n_pairs": 3},
    "tails": {"systems": ["pm"], "n_steps": 300_000},
    "fastslow-compare": {"n": 50, "M": 500, "K": 10, "burn_in": 50, "tightness_ns": []},
}


@pytest.mark.parametrize("name", sorted(PARAM_SCHEMAS))
def test_shipped_configs_validate(name):
    cfg = load_config(name)
    assert cfg.seed == default_config(name)["seed"]


@pytest.mark.parametrize("raw,path", [
    ({"params": {"bogus": 1}}, "/params/bogus"),
    ({"extra": 1}, "/extra"),
    ({"params": {"n": "many"}}, "/params/n"),
    ({"seed": -1}, "/seed"),
    ({"experiment": "tails"}, "/experiment"),
])
def test_schema_errors_name_the_key(raw, path):
    with pytest.raises(ConfigError) as err:
        load_config("butterfly", raw)
    assert err.value.path == path


def test_usage_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"params": {"depht": 3}}))
    with pytest.raises(SystemExit) as ex:
        main(["butterfly", "--config", str(bad), "--out", str(tmp_path / "o")])
    assert ex.value.code == 2
    assert "/params/depht" in capsys.readouterr().err


@pytest.mark.parametrize("name", sorted(SMALL))
def test_experiments_are_reproducible(name, tmp_path):
    outs = []
    for k in range(2):
        cfg = load_config(name, {"params": SMALL[name]}, seed=3, out=str(tmp_path / str(k)))
        status, man = run_experiment(cfg)
        assert status == 0, man.get("error")
        assert {"config_sha256", "versions", "wall_time_s", "files"} <= set(man)
        outs.append({f: (tmp_path / str(k) / f).read_bytes() for f in man["files"] if f.endswith(".csv")})
    assert outs[0] and outs[0] == outs[1]


def test_nonmarcus_endpoint(tmp_path):
    cfg = load_config("example-nonmarcus", {"params": SMALL["example-nonmarcus"]}, out=str(tmp_path))
    status, man = run_experiment(cfg)
    x1, x2 = man["summary"]["parabola"]["decorated"]
    assert abs(x1 - 1.0) < 1e-6 and abs(x2 - 2.0 / 3.0) < 1e-6
    rows = (tmp_path / "example_nonmarcus.csv").read_text().splitlines()
    assert rows[0] == "curve,method,x1,x2"
    assert "parabola,quadrature,1,0.666666667" in rows


def test_butterfly_header(tmp_path):
    status, man = run_experiment(load_config("butterfly", {"params": {"n": 1000}}, out=str(tmp_path)))
    lines = (tmp_path / "butterfly.csv").read_text().splitlines()
    assert lines[0] == "t,x,y" and len(lines) == 1002


def test_marcus_check_empty_jumps(tmp_path):
    cfg = load_config("marcus-check", {"params": {"jumps": []}}, out=str(tmp_path))
    status, man = run_experiment(cfg)
    rows = (tmp_path / "marcus_check.csv").read_text().splitlines()
    assert rows[1] == "explicit,0,0"


def test_module_errors_surface(tmp_path):
    cfg = load_config("tails", {"params": {"systems": ["pm"], "n_steps": 1000}}, out=str(tmp_path))
    status, man = run_experiment(cfg)
    assert status == 1
    assert man["error"]["module"] == "dynamics.returns"
    assert man["error"]["type"] == "StatisticsError"


def test_main_prints_summary(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("DECOPATH_THREADS", "1")
    cfgf = tmp_path / "c.json"
    cfgf.write_text(json.dumps({"seed": 5, "params": {"n_pairs": 2}}))
    assert main(["metrics-suite", "--config", str(cfgf), "--out", str(tmp_path / "o")]) == 0
    assert "violations" in json.loads(capsys.readouterr().out)
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["seed"] == 5
