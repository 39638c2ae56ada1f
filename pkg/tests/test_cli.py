import csv
import json
import subprocess
import sys

import pytest

from exterior_burgers.cli import main
from exterior_burgers.config import RunConfig, dumps

BASE = RunConfig().to_dict()


def write_config(path, **over):
    doc = json.loads(json.dumps(BASE))
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(doc.get(key), dict):
            doc[key].update(value)
        else:
            doc[key] = value
    path.write_text(dumps(doc))
    return path


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


def run(tmp_path, command, **over):
    cfg = write_config(tmp_path / "run.json", **over)
    out = tmp_path / "out"
    return main([command, "--config", str(cfg), "--out", str(out)]), out


def test_stationary_command(tmp_path):
    code, out = run(tmp_path, "stationary")
    assert code == 0
    m = manifest(out)
    assert m["status"] == "passed"
    assert m["artifacts"] == ["stationary.csv", "stationary_report.json"]
    assert set(m["verification"]["checks"]) == {"stationary_residual", "far_field_match",
                                                "far_field_slope"}
    with open(out / "stationary.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["r", "psi", "phi"] and len(rows) == 2001


def test_hashimoto_case_records_bounds(tmp_path):
    code, out = run(tmp_path, "stationary", params={"v_minus": -0.5})
    assert code == 0
    checks = manifest(out)["verification"]["checks"]
    assert checks["negative_bound"] and checks["monotone_shift"]


def test_inadmissible_exits_one(tmp_path, capsys):
    code, out = run(tmp_path, "stationary", params={"v_plus": 0.5})
    assert code == 1
    assert "admissibility condition" in capsys.readouterr().err
    assert manifest(out)["status"] == "error"


def test_short_domain_is_a_failed_check(tmp_path):
    code, out = run(tmp_path, "stationary", grid={"R_max": 6.0, "num": 400})
    assert code == 2
    m = manifest(out)
    assert m["verification"]["checks"]["far_field_match"] is False
    report = json.loads((out / "stationary_report.json").read_text())
    assert report["error"].startswith("FarFieldError")


def test_weight_command(tmp_path):
    code, out = run(tmp_path, "weight")
    assert code == 0
    assert "weight.csv" in manifest(out)["artifacts"]
    report = json.loads((out / "weight_report.json").read_text())
    assert abs(report["farfield_extrapolated"] - 2.0) <= 1e-4


def test_weight_epsilon_zero_exits_one(tmp_path):
    code, _ = run(tmp_path, "weight", weight={"generator": "epsilon", "eps": 0.0})
    assert code == 1


def test_perturbed_weight_fails_checks(tmp_path):
    code, out = run(tmp_path, "weight", fault={"chi_perturbation": 0.01})
    assert code == 2
    assert manifest(out)["verification"]["checks"]["weight_ode_residual"] is False


def test_evolve_command(tmp_path):
    code, out = run(tmp_path, "evolve", T_end=20.0, snapshots=40,
                    norms=[{"kind": "Algebraic", "derivative_order": 1, "alpha": 1.0,
                            "beta": 0.0}])
    assert code == 0
    m = manifest(out)
    assert {"trajectory.csv", "sup_diff.csv", "fits.json", "energy.json"} <= set(m["artifacts"])
    with open(out / "trajectory.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "r", "v", "v_minus_phi", "w"] and len(rows) == 1 + 41 * 600
    energy = json.loads((out / "energy.json").read_text())
    (norm,) = energy["norms"].values()
    assert norm["final"] < norm["initial"]
    fits = json.loads((out / "fits.json").read_text())
    assert fits["exponential"]["exponent"] > 0


def test_nan_injection_writes_partial_manifest(tmp_path, capsys):
    code, out = run(tmp_path, "evolve", T_end=10.0, snapshots=100, fault={"nan_at_time": 2.0})
    assert code == 1
    m = manifest(out)
    assert m["status"] == "error" and m["error"].startswith("NonFinite")
    assert m["verification"]["details"]["partial_snapshots"] == 20  # t = 0, 0.1, ..., 1.9
    assert "trajectory.csv" in m["artifacts"]
    assert "NonFinite" in capsys.readouterr().err


def test_seed_override(tmp_path):
    cfg = write_config(tmp_path / "run.json", jitter=0.5)
    out = tmp_path / "out"
    assert main(["stationary", "--config", str(cfg), "--out", str(out), "--seed", "7"]) == 0
    assert manifest(out)["config"]["seed"] == 7


def test_sweep(tmp_path):
    code, out = run(tmp_path, "sweep", T_end=20.0, snapshots=40, workers=2,
                    sweep={"n": [4], "mu": [1.0], "r0": [1.0], "v_minus": [0.0, 2.0, 6.0],
                           "v_plus": [-1.0, 0.5]})
    assert code == 0
    with open(out / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 6
    simulated = [r for r in rows if r["simulated"] == "true"]
    assert {r["regime"] for r in simulated} == {"StationaryWave"}
    assert len(simulated) == 2 and all(r["decaying"] == "true" for r in simulated)
    skipped = [r for r in rows if r["simulated"] == "false"]
    assert all("not simulated" in r["note"] for r in skipped)
    assert (out / "cell_000" / "sup_diff.csv").exists()


def test_sweep_needs_section(tmp_path):
    code, _ = run(tmp_path, "sweep")
    assert code == 1


@pytest.mark.parametrize("argv", [[], ["stationary"]])
def test_usage_errors(argv, capsys):
    assert main(argv) == 1
    assert "usage" in capsys.readouterr().err


def test_empty_and_malformed_config(tmp_path, capsys):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    assert main(["stationary", "--config", str(empty), "--out", str(tmp_path / "o")]) == 1
    assert "usage" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text('{"spec_version": 1,')
    assert main(["stationary", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert "line 1, column" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "exterior_burgers"], capture_output=True,
                          text=True)
    assert proc.returncode == 1 and "usage" in proc.stderr
