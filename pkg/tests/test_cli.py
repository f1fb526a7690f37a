import json

import pytest
from click.testing import CliRunner

from fracwave import runner
from fracwave.cli import cli, main
from fracwave.errors import BracketInvalid, ConfigError

SMALL = {
    "gamma1": 1.5, "gamma2": 1.5, "p": 2, "q": 2,
    "geometry": {"dim": 1, "L": 64.0, "n": 64},
    "data": {"u0": {"profile": "gaussian", "amplitude": 1.0, "width": 2.0},
             "v0": {"profile": "gaussian", "amplitude": 1.0, "width": 2.0}},
    "data_scale": 0.1,
    "mesh": {"T": 2.0, "n": 40},
    "snapshots": [40],
}


def exit_code(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    return info.value.code


def write(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_ml_eval(capsys):
    assert exit_code(["ml-eval", "--alpha", "1", "--beta", "1", "--z", "1"]) == 0
    assert capsys.readouterr().out.strip() == "2.718281828459045"


def test_classify(tmp_path):
    res = CliRunner().invoke(cli, ["classify", "--gamma1", "1.5", "--gamma2", "1.5", "--p", "3", "--q", "3",
                                   "--N", "3", "--out-dir", str(tmp_path)])
    assert res.exit_code == 0 and res.output.startswith("GlobalSmallData")
    assert json.loads((tmp_path / "report.json").read_text())["classification"] == "GlobalSmallData"
    assert json.loads((tmp_path / "manifest.json").read_text())["command"] == "classify"


def test_invalid_point_exits_1():
    assert exit_code(["classify", "--gamma1", "1.5", "--gamma2", "1.5", "--p", "1", "--q", "1", "--N", "1"]) == 1


def test_derive_json():
    res = CliRunner().invoke(cli, ["derive", "--gamma1", "1.5", "--gamma2", "1.5", "--p", "2", "--q", "2",
                                   "--N", "4"])
    d = json.loads(res.output)
    assert res.exit_code == 0 and d["bootstrap"]["i0"] == 4


def test_sweep(tmp_path):
    grid = write(tmp_path, {"gamma1": [1.5], "gamma2": [1.5, 1.8], "p": {"start": 1.5, "stop": 3, "num": 3},
                            "q": [2, 3], "N": [1, 3]}, "grid.json")
    out = tmp_path / "phase.csv"
    res = CliRunner().invoke(cli, ["sweep", "--grid", grid, "--out", str(out), "--svg", str(tmp_path / "p.svg")])
    assert res.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("gamma1,gamma2,p,q,N,classification") and len(lines) == 25
    assert (tmp_path / "p.svg").read_text().lstrip().startswith("<?xml")


def test_simulate_artifacts(tmp_path):
    cfg = write(tmp_path, SMALL)
    out = tmp_path / "run"
    res = CliRunner().invoke(cli, ["simulate", "--config", cfg, "--out-dir", str(out)])
    assert res.exit_code == 0 and res.output.strip() == "completed"
    for name in ("history.csv", "summary.json", "manifest.json", "report.txt", "norms.svg",
                 "u_000040.grid", "v_000040.grid"):
        assert (out / name).exists(), name
    again = tmp_path / "again"
    CliRunner().invoke(cli, ["simulate", "--config", cfg, "--out-dir", str(again)])
    assert (again / "history.csv").read_bytes() == (out / "history.csv").read_bytes()
    assert (again / "norms.svg").read_bytes() == (out / "norms.svg").read_bytes()


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"gamma1": 1.5,\n "p": }')
    with pytest.raises(ConfigError, match="line 2"):
        runner.load_json(bad)
    with pytest.raises(ConfigError, match="unknown key"):
        runner.resolve_simulate(dict(SMALL, colour="red"))
    with pytest.raises(ConfigError, match="missing"):
        runner.resolve_simulate({k: v for k, v in SMALL.items() if k != "mesh"})
    with pytest.raises(ConfigError, match="profile"):
        runner.resolve_simulate(dict(SMALL, data={"u0": {"profile": "square"}}))
    assert exit_code(["simulate", "--config", write(tmp_path, dict(SMALL, colour=1))]) == 1


def test_auto_norms_follow_derived_exponents():
    cfg = runner.resolve_simulate(dict(SMALL, p=3, q=3, geometry={"dim": 3, "L": 64.0, "n": 16}))
    assert cfg["norms"]["s1"] == pytest.approx(3 * 8 / (2 * (5 / 9 + 1) / 2 * 4))
    assert runner.resolve_simulate(SMALL)["norms"] == {"s1": 2.0, "s2": 2.0}


def test_find_threshold_small():
    cfg = runner.resolve_simulate(dict(SMALL, data={k: {"profile": "gaussian", "width": 2.0}
                                                    for k in ("u0", "v0")}, geometry={"dim": 1, "L": 64.0, "n": 32}))
    res = runner.find_threshold(cfg, 0.1, 10.0, rtol=0.1)
    assert res["lo"] < res["threshold"] < res["hi"] and "empirical" in res["label"]
    with pytest.raises(BracketInvalid):
        runner.find_threshold(cfg, 20.0, 30.0)


def test_fit_decay_command(tmp_path):
    cfg = write(tmp_path, dict(SMALL, mesh={"T": 20.0, "n": 80}, data_scale=0.01,
                               geometry={"dim": 1, "L": 128.0, "n": 64}))
    CliRunner().invoke(cli, ["simulate", "--config", cfg, "--out-dir", str(tmp_path)])
    args = ["fit-decay", "--history", str(tmp_path / "history.csv"), "--window", "2", "20", "--which", "norm_u_inf"]
    res = CliRunner().invoke(cli, args)
    assert res.exit_code == 0 and json.loads(res.output)["slope"] < 0
    assert exit_code(args + ["--predicted", "5.0"]) == 2
