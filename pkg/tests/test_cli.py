import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from levy_ergodicity.cli import EXIT_ERROR, EXIT_INCONCLUSIVE, EXIT_NOT_CERTIFIED, EXIT_OK, main
from levy_ergodicity.config import ConfigError, RunConfig

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

OU = {
    "model": {"drift": {"kind": "power", "A": 1.0, "kappa": 1.0}, "kernel": {"alpha": 1.5}},
    "certificate": {"p": 1.2, "f": {"C": 0.5, "pathway": "exp"}},
    "rate": {"t_min": 0.1, "t_max": 10.0, "points": 5},
    "simulation": {"n": 20, "t": 1.0, "N": 200, "seed": 7, "x0": 3.0},
    "convergence": {"t_grid": [0.5, 1.0], "T_ref": 4.0, "n_boot": 20},
}


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def run(tmp_path, command, data, *extra):
    return main([command, "--config", write_config(tmp_path, data), "--out", str(tmp_path / "out"), *extra])


def test_certify_exit_codes(tmp_path):
    assert run(tmp_path, "certify", OU) == EXIT_OK
    cert = json.loads((tmp_path / "out" / "certificate.json").read_text())
    assert cert["certificate"]["verdict"] == "certified" and cert["seed"] == 7
    no_drift = json.loads(json.dumps(OU))
    no_drift["model"]["drift"]["A"] = 0.0
    assert run(tmp_path, "certify", no_drift) == EXIT_NOT_CERTIFIED
    bad = {"model": {"drift": {"A": 1.0}}}
    assert run(tmp_path, "certify", bad) == EXIT_ERROR


def test_rate_csv(tmp_path):
    cfg = dict(OU, rate={"f": {"C": 1.0, "pathway": "exp"}, "t_min": 0.5, "t_max": 2.0, "points": 3})
    assert run(tmp_path, "rate", cfg) == EXIT_OK
    lines = (tmp_path / "out" / "rate.csv").read_text().splitlines()
    assert lines[0].startswith("# config:") and lines[1] == "# closed_form: exp" and lines[2] == "t,psi"
    rows = [tuple(map(float, ln.split(","))) for ln in lines[3:]]
    assert [t for t, _ in rows] == pytest.approx([0.5, 1.0, 2.0])
    for t, v in rows:
        assert v == pytest.approx(math.exp(-t), rel=1e-15)


def test_rate_single_point_grid(tmp_path):
    cfg = dict(OU, rate={"t_min": 3.0, "t_max": 3.0, "points": 1})
    assert run(tmp_path, "rate", cfg) == EXIT_OK
    assert len((tmp_path / "out" / "rate.csv").read_text().splitlines()) == 4


def test_rate_bounded_F_is_an_error(tmp_path, capsys):
    cfg = dict(OU, rate={"f": {"C": 1.0, "power": 1.5}, "method": "numeric", "t_min": 10.0, "t_max": 20.0, "points": 2})
    assert run(tmp_path, "rate", cfg) == EXIT_ERROR
    assert "bounded" in capsys.readouterr().err


def test_simulate_writes_chain(tmp_path):
    assert run(tmp_path, "simulate", OU, "--seed", "11") == EXIT_OK
    side = json.loads((tmp_path / "out" / "chain.json").read_text())
    assert side["config"]["seed"] == 11
    assert len((tmp_path / "out" / "chain.csv").read_text().splitlines()) == 202


def test_converge_inconclusive_with_tiny_population(tmp_path):
    cfg = dict(OU, simulation=dict(OU["simulation"], N=30))
    assert run(tmp_path, "converge", cfg) == EXIT_INCONCLUSIVE
    record = json.loads((tmp_path / "out" / "comparison.json").read_text())["comparison"]
    assert record["verdict"] == "inconclusive" and record["noise_floor"] > 0


def test_converge_explosive_drift_is_an_error(tmp_path, capsys):
    cfg = json.loads((CONFIGS / "explosive.json").read_text())
    assert run(tmp_path, "converge", cfg) == EXIT_ERROR
    assert "explosion at step" in capsys.readouterr().err


def test_converge_is_deterministic(tmp_path):
    outs = []
    for k in range(2):
        cfg = write_config(tmp_path, OU)
        main(["converge", "--config", cfg, "--out", str(tmp_path / f"o{k}")])
        outs.append((tmp_path / f"o{k}" / "tv_curve.csv").read_bytes())
    assert outs[0].split(b"\n", 1)[1] == outs[1].split(b"\n", 1)[1]


def test_report_collects_outputs(tmp_path):
    assert run(tmp_path, "report", OU) == EXIT_ERROR
    run(tmp_path, "certify", OU)
    assert run(tmp_path, "report", OU) == EXIT_OK
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["certificate"]["certificate"]["verdict"] == "certified"


def test_config_round_trip_is_idempotent():
    for path in sorted(CONFIGS.glob("*.json")):
        cfg = RunConfig.load(path)
        again = RunConfig.from_dict(json.loads(cfg.dumps()))
        assert again.dumps() == cfg.dumps()


def test_config_rejections(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"model": {"drift": {"A": float("nan")}, "kernel": {}}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict(dict(OU, extra={}))
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        RunConfig.load(path)
    assert main(["certify", "--config", str(path)]) == EXIT_ERROR
    assert run(tmp_path, "certify", OU, "--seed", "-1") == EXIT_ERROR


def test_module_entry_point(tmp_path):
    cfg = write_config(tmp_path, OU)
    proc = subprocess.run(
        [sys.executable, "-m", "levy_ergodicity", "certify", "--config", cfg, "--out", str(tmp_path / "o")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == EXIT_OK, proc.stderr
    assert proc.stdout.startswith("certified")
