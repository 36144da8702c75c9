import json
import math

import pytest

from cylbem.cli import run
from cylbem.model import build_model, disk_config, dump_model, strip_config


@pytest.fixture(scope="module")
def models(tmp_path_factory):
    d = tmp_path_factory.mktemp("models")
    out = {}
    for name, conf in (("disk", disk_config()), ("strip", strip_config())):
        path = d / f"{name}.json"
        dump_model(*build_model(conf), path)
        out[name] = str(path)
    var = json.loads(open(out["disk"]).read())
    var["potential"]["fourier_cos"] = [1.0, 0.5]
    path = d / "vardisk.json"
    path.write_text(json.dumps(var))
    out["vardisk"] = str(path)
    return out


def _read(path):
    return json.loads(path.read_text())


def test_spectrum(models, tmp_path):
    assert run(["spectrum", "--model", models["disk"], "--out", str(tmp_path)]) == 0
    rep = _read(tmp_path / "spectrum.json")
    assert rep["passed"] and rep["results"]["mu0"] == pytest.approx(1.0, abs=1e-12)
    assert (tmp_path / "spectrum.csv").exists()


def test_kernel_check_constant_potential(models, tmp_path):
    assert run(["kernel-check", "--model", models["disk"], "--out", str(tmp_path),
                "--grid", "pairs=50"]) == 0
    rep = _read(tmp_path / "kernel_check.json")
    assert rep["results"]["oracle"] == "image_sum"
    assert rep["results"]["max_error"] < 1e-10
    res = [s["residual"] for s in rep["results"]["h_sweep"]]
    assert res[2] < res[0]


def test_jump_check(models, tmp_path):
    code = run(["jump-check", "--model", models["disk"], "--out", str(tmp_path),
                "--grid", "n=64", "--grid", "t=4e-3,2e-3"])
    assert code == 0
    assert _read(tmp_path / "jump_check.json")["results"]["worst_limit_error"] < 1e-4


def test_solve_point_source_and_probes(models, tmp_path):
    probes = tmp_path / "probes.csv"
    probes.write_text("x,theta\n0.0,3.14159\n0.1,3.0\n")
    code = run(["solve", "--model", models["disk"], "--out", str(tmp_path), "--grid", "n=64",
                "--probes", str(probes)])
    assert code == 0
    rows = (tmp_path / "solve_probes.csv").read_text().strip().splitlines()
    assert len(rows) == 3


def test_solve_rejects_outside_probe(models, tmp_path):
    probes = tmp_path / "probes.csv"
    probes.write_text("2.0,0.5\n")
    assert run(["solve", "--model", models["disk"], "--out", str(tmp_path), "--grid", "n=64",
                "--probes", str(probes)]) == 1


def test_solve_strip_mode(models, tmp_path):
    code = run(["solve", "--model", models["strip"], "--out", str(tmp_path), "--bc", "mode:xi=1"])
    assert code == 0
    rep = _read(tmp_path / "solve.json")
    assert rep["results"]["fourier_difference"] < 1e-6


def test_dtn(models, tmp_path):
    assert run(["dtn", "--model", models["disk"], "--out", str(tmp_path), "--grid", "n=64"]) == 0
    assert (tmp_path / "dtn_boundary.csv").exists()


def test_tau_sweep(models, tmp_path):
    assert run(["tau-sweep", "--model", models["strip"], "--out", str(tmp_path),
                "--grid", "tmax=10", "--grid", "step=1"]) == 0
    rep = _read(tmp_path / "tau_sweep.json")
    assert rep["results"]["arcs"] == [[0.0, math.pi]]


def test_tau_sweep_needs_arcs_for_disk(models, tmp_path):
    assert run(["tau-sweep", "--model", models["disk"], "--out", str(tmp_path)]) == 1
    assert run(["tau-sweep", "--model", models["vardisk"], "--out", str(tmp_path),
                "--grid", "arcs=0.5:2.5", "--grid", "tmax=4", "--grid", "step=1"]) == 0


def test_rellich_check(models, tmp_path):
    assert run(["rellich-check", "--model", models["disk"], "--out", str(tmp_path),
                "--grid", "samples=10"]) == 0


def test_tolerance_failure_exit_code(models, tmp_path):
    assert run(["rellich-check", "--model", models["disk"], "--out", str(tmp_path),
                "--grid", "samples=5", "--tol", "residual=0"]) == 2


@pytest.mark.parametrize("argv", [
    ["spectrum"],
    ["bogus", "--model", "x.json"],
    ["spectrum", "--model", "/nonexistent.json"],
    ["spectrum", "--model", "MODEL", "--tol", "nope=1"],
    ["spectrum", "--model", "MODEL", "--tol", "residual"],
    ["solve", "--model", "MODEL", "--bc", "wave:k=1"],
])
def test_usage_errors(models, tmp_path, argv):
    argv = [models["disk"] if a == "MODEL" else a for a in argv]
    assert run(argv + ["--out", str(tmp_path)]) == 1


def test_invalid_model_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"circumference": -1, "potential": {"fourier_cos": [1.0]}, "curves": []}')
    assert run(["spectrum", "--model", str(bad), "--out", str(tmp_path)]) == 1
    bad.write_text("{not json")
    assert run(["spectrum", "--model", str(bad), "--out", str(tmp_path)]) == 1


def test_deterministic_output(models, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(["rellich-check", "--model", models["disk"], "--out", str(d), "--seed", "7",
                    "--grid", "samples=5"]) == 0
    ra, rb = _read(a / "rellich_check.json"), _read(b / "rellich_check.json")
    ra.pop("timestamp")
    rb.pop("timestamp")
    assert ra == rb
    assert (a / "rellich_check.csv").read_text() == (b / "rellich_check.csv").read_text()


def test_acceptance_subset(tmp_path):
    assert run(["acceptance", "--out", str(tmp_path), "--grid", "criteria=1,3"]) == 0
    rep = _read(tmp_path / "acceptance.json")
    assert [r["number"] for r in rep["results"]] == [1, 3]
