import json
import os
import subprocess
import sys

import numpy as np
import pytest

from logan.cli import main
from logan.data import read_csv
from logan.sem import SemModel, sample

from conftest import cancel_w


def run(*argv):
    try:
        return main([str(a) for a in argv])
    except SystemExit as exc:      # argparse usage errors
        return exc.code


@pytest.fixture
def fig_csv(tmp_path):
    from logan.data import write_csv
    path = tmp_path / "fig.csv"
    data = sample(SemModel(cancel_w(), 0.0), 400, seed=1)
    write_csv(data, path)
    return path


def test_simulate_files_and_round_trip(tmp_path):
    assert run("simulate", "--scenario", "A", "--n", 200, "--seed", 7, "--out-dir", tmp_path) == 0
    data = read_csv(tmp_path / "sim_data.csv")
    assert data.values.shape == (200, 52)
    model = SemModel.load(tmp_path / "sim_model.json")
    again = sample(model, 200, seed=7)
    assert np.array_equal(again.values, data.values)
    first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    assert run("simulate", "--scenario", "A", "--n", 200, "--seed", 7, "--out-dir", tmp_path) == 0
    assert first == {p.name: p.read_bytes() for p in tmp_path.iterdir()}


def test_simulate_explicit_empty(tmp_path):
    assert run("simulate", "--d", 3, "--p1", 0, "--p2", 0, "--n", 10, "--out-dir", tmp_path) == 0
    assert not np.array(SemModel.load(tmp_path / "sim_model.json").w).any()
    assert run("simulate", "--scenario", "A", "--d", 3, "--out-dir", tmp_path) == 2
    assert run("simulate", "--d", 3, "--out-dir", tmp_path) == 2


def test_test_command_report(fig_csv, tmp_path):
    out = tmp_path / "r.json"
    assert run("test", "--data", fig_csv, "--q", "M2", "--m", 200, "--out", out) == 0
    rep = json.loads(out.read_text())
    assert rep["header"]["config"]["q"] == "M2" and rep["header"]["seed"] == 0
    (r,) = rep["reports"]
    assert r["name"] == "M2" and r["reject"] is True
    bytes1 = out.read_bytes()
    assert run("test", "--data", fig_csv, "--q", 2, "--m", 200, "--out", out) == 0
    assert json.loads(out.read_text())["reports"] == rep["reports"]
    assert run("test", "--data", fig_csv, "--q", "M2", "--m", 200, "--out", out) == 0
    assert out.read_bytes() == bytes1


def test_test_multisplit_and_all(fig_csv, tmp_path):
    out = tmp_path / "m.json"
    assert run("test", "--data", fig_csv, "--all", "--multisplit", 2, "--m", 200,
               "--out", out) == 0
    reps = json.loads(out.read_text())["reports"]
    assert [r["q"] for r in reps] == [1, 2, 3]
    assert all(r["n_splits"] == 2 and len(r["halves"]) == 4 for r in reps)


@pytest.mark.parametrize("argv, code", [
    (["--q", 9], 2),
    (["--q", "nope"], 2),
    ([], 2),
    (["--q", 1, "--alpha", 1.5], 2),
    (["--q", 1, "--m", 10], 2),
])
def test_usage_errors(fig_csv, tmp_path, argv, code):
    assert run("test", "--data", fig_csv, "--out", tmp_path / "x.json", *argv) == code


def test_data_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,c\n1,2,3\n1,oops,3\n1,2,3\n1,2,3\n")
    assert run("test", "--data", bad, "--q", 1) == 3
    assert run("test", "--data", tmp_path / "missing.csv", "--q", 1) == 2
    roles = tmp_path / "roles.json"
    roles.write_text(json.dumps({"exposure": ["a", "b"], "outcome": "c"}))
    good = tmp_path / "good.csv"
    good.write_text("a,b,c\n" + "\n".join(f"{i},{i * i % 7},{i % 3}" for i in range(8)))
    assert run("fdr", "--data", good, "--roles", roles) == 3


def test_fdr_command(fig_csv, tmp_path):
    roles = tmp_path / "roles.json"
    roles.write_text(json.dumps({"exposure": "E", "outcome": "Y", "mediators": ["M1", "M2", "M3"]}))
    out = tmp_path / "f.json"
    assert run("fdr", "--data", fig_csv, "--roles", roles, "--alpha", 0.1, "--m", 200,
               "--baseline", "by", "--out", out) == 0
    rep = json.loads(out.read_text())
    assert "M2" in rep["logan"]["names"]
    assert len(rep["by"]["selected"]) <= len(rep["logan"]["selected"])


def _bench(tmp_path, name, threads):
    env = dict(os.environ, LOGAN_THREADS=str(threads))
    out = tmp_path / name
    cmd = [sys.executable, "-m", "logan", "bench", "--scenario", "A", "--n", "60",
           "-R", "2", "--m", "100", "--alphas", "0.05,0.2", "--fdr-alphas", "0.1",
           "--out-dir", str(out)]
    proc = subprocess.run(cmd, env=env, capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stderr
    return {p.name: p.read_bytes() for p in out.iterdir()}


@pytest.mark.slow
def test_bench_byte_identical_across_threads(tmp_path):
    one = _bench(tmp_path, "one", 1)
    two = _bench(tmp_path, "two", 2)
    assert set(one) == {"metrics.csv", "replications.csv", "bench.json"}
    assert one["metrics.csv"] == two["metrics.csv"]
    assert one["replications.csv"] == two["replications.csv"]
    strip = lambda b: {k: v for k, v in json.loads(b).items() if k != "header"} | {
        "config": {k: v for k, v in json.loads(b)["header"]["config"].items() if k != "out_dir"}}
    assert strip(one["bench.json"]) == strip(two["bench.json"])
    again = _bench(tmp_path, "one", 1)
    assert again == one


def test_version(capsys):
    assert run("--version") == 0
    assert "logan" in capsys.readouterr().out
