import csv
import json
import math
import os
import subprocess
import sys

import pytest

from hdenoise.cli import main
from hdenoise.config import RunConfig, field_path

ALL = ["certify", "design", "separation", "kakutani", "simulate", "fit", "experiment", "measure"]

SMALL = {
    "schema_version": 1,
    "plan": {"kind": "dyadic", "levels": 6, "density_factor": 1},
    "ladder": [20, 80],
    "seeds": [0, 1, 2],
    "fit": {"degree": 6, "lambda": 1e-3, "alpha": 0.5, "validation_fraction": 0.0},
    "measure": {"grid_points": 64},
}


def write_cfg(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def run(tmp_path, command, data=None, extra=()):
    args = [command, "--out", str(tmp_path / "out")]
    if data is not None:
        args += ["--config", write_cfg(tmp_path / "cfg.json", data)]
    return main(args + list(extra))


def test_certify_full_circle(tmp_path):
    cfg = {"schema_version": 1, "set": {"kind": "circle"}, "gauge": {"kind": "power", "beta": 1.0}}
    assert run(tmp_path, "certify", cfg) == 0
    res = json.loads((tmp_path / "out" / "result.json").read_text())
    assert res["certificate"]["pass"] is True
    assert res["certificate"]["admissible"] == "yes"
    assert res["certificate"]["content"] == pytest.approx(2 * math.pi)


@pytest.mark.parametrize("command", ALL)
def test_every_command_writes_artifacts(tmp_path, command):
    assert run(tmp_path, command, SMALL) == 0
    out = tmp_path / "out"
    for name in ("effective_config.json", "result.json", "DATA_FORMATS.md"):
        assert (out / name).exists()
    assert list(out.glob("*.csv"))
    eff = json.loads((out / "effective_config.json").read_text())
    assert eff["command"] == command
    # all defaults explicit: every top-level field of the schema is present
    assert set(RunConfig.model_fields) <= {k if k != "lambda" else "lam" for k in eff}


def test_negative_sigma_names_field(tmp_path, capsys):
    cfg = {"schema_version": 1, "noise": {"kind": "gaussian", "sigma": -0.5}}
    assert run(tmp_path, "kakutani", cfg) == 2
    assert "noise.sigma" in capsys.readouterr().err


@pytest.mark.parametrize("data, field", [
    ({"schema_version": 1, "bogus": 1}, "bogus"),
    ({"schema_version": 2}, "schema_version"),
    ({"fit": {"lambda": -1}}, "fit.lambda"),
    ({"plan": {"kind": "dyadic", "levels": 0}}, "plan.levels"),
    ({"ladder": [100, 50]}, "ladder"),
    ({"model": {"kind": "rational", "numerator": [1], "denominator": [1, -2]}}, "model"),
    ({"set": {"kind": "cantor", "ratio": 0.7}}, "set.ratio"),
])
def test_validation_errors(tmp_path, capsys, data, field):
    assert run(tmp_path, "separation", data) == 2
    err = capsys.readouterr().err
    assert f"{field}:" in err


def test_bad_json(tmp_path, capsys):
    (tmp_path / "cfg.json").write_text("{not json")
    assert main(["certify", "--config", str(tmp_path / "cfg.json"), "--out", str(tmp_path / "o")]) == 2
    assert main(["certify", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "o")]) == 2
    assert main(["nonsense"]) == 2


def test_numeric_failures_exit_3(tmp_path):
    cfg = {"set": {"kind": "arcs", "arcs": [[0, 1], [2, 0.5]]}, "measure": {"max_iter": 1, "tol": 1e-15}}
    assert run(tmp_path, "measure", cfg) == 3
    cfg = {"plan": {"kind": "custom", "points": [0.3, 0.3, 0.3]}, "fit": {"degree": 2, "lambda": 0}}
    assert run(tmp_path, "fit", cfg) == 3


def test_ladder_longer_than_plan(tmp_path, capsys):
    cfg = {"plan": {"kind": "dyadic", "levels": 3}, "ladder": [10, 1000]}
    assert run(tmp_path, "kakutani", cfg) == 2
    assert "ladder" in capsys.readouterr().err


def test_experiment_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path / "cfg.json", SMALL)
    assert main(["experiment", "--config", cfg, "--out", str(tmp_path / "a"), "--threads", "1"]) == 0
    assert main(["experiment", "--config", cfg, "--out", str(tmp_path / "b"), "--threads", "3"]) == 0
    for name in ("summary.csv", "cells.csv", "result.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_rerun_from_effective_config(tmp_path):
    assert run(tmp_path, "simulate", SMALL, ["--seed", "42"]) == 0
    eff = tmp_path / "out" / "effective_config.json"
    assert json.loads(eff.read_text())["seed"] == 42
    assert main(["simulate", "--config", str(eff), "--out", str(tmp_path / "again")]) == 0
    assert (tmp_path / "out" / "observations.csv").read_bytes() == (tmp_path / "again" / "observations.csv").read_bytes()


def test_seed_override_changes_experiment_seeds(tmp_path):
    assert run(tmp_path, "experiment", SMALL, ["--seed", "100"]) == 0
    eff = json.loads((tmp_path / "out" / "effective_config.json").read_text())
    assert eff["seeds"] == [100, 101, 102]


def test_fit_from_simulated_csv(tmp_path):
    assert run(tmp_path, "simulate", {**SMALL, "noise": {"kind": "none"},
                                      "model": {"kind": "taylor", "coefficients": [0.5, [0, 0.25]]}}) == 0
    obs = tmp_path / "out" / "observations.csv"
    cfg = {**SMALL, "observations": str(obs), "fit": {"degree": 3, "lambda": 0}}
    assert main(["fit", "--config", write_cfg(tmp_path / "fit.json", cfg), "--out", str(tmp_path / "fit")]) == 0
    rows = list(csv.DictReader(open(tmp_path / "fit" / "coefficients.csv")))
    got = [complex(float(r["re"]), float(r["im"])) for r in rows]
    assert abs(got[0] - 0.5) < 1e-10 and abs(got[1] - 0.25j) < 1e-10
    res = json.loads((tmp_path / "fit" / "result.json").read_text())
    # 17 significant digits: CSV and JSON agree bit for bit
    assert [complex(*c) for c in res["fit"]["coefficients"]] == got


def test_no_writes_outside_out_dir(tmp_path):
    work = tmp_path / "work"
    work.mkdir()
    cfg = write_cfg(work / "cfg.json", SMALL)
    before = set(os.listdir(work))
    env = {**os.environ, "HD_LOG": "DEBUG"}
    proc = subprocess.run([sys.executable, "-m", "hdenoise.cli", "design", "--config", cfg, "--out", "o"],
                          cwd=work, env=env, capture_output=True, text=True)
    assert proc.returncode == 0
    assert set(os.listdir(work)) - before == {"o"}


def test_field_path_strips_union_tags():
    assert field_path(("noise", "gaussian", "sigma")) == "noise.sigma"
    assert field_path(("set", "arcs", "arcs", 0, 1)) == "set.arcs.0.1"
    assert field_path(("fit", "lambda")) == "fit.lambda"
