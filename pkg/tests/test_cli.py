import json
import subprocess
import sys

import pytest

from qetprep.cli import EXIT_ERROR, EXIT_FAIL, EXIT_OK, SCHEMA, main


def write_config(tmp_path, **overrides):
    cfg = {"schema": SCHEMA, "function": {"kind": "gaussian", "params": {"beta": 4.0},
                                                "domain": [-1, 1], "parity": "even"},
           "n": 5, "target_epsilon": 1e-4}
    cfg.update(overrides)
    path = tmp_path / "job.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def run_cli(*argv):
    return main([str(a) for a in argv])


def test_approx_writes_poly(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    assert run_cli("approx", "--config", cfg, "--out", out) == EXIT_OK
    doc = json.loads((out / "poly.json").read_text())
    assert doc["schema"] == SCHEMA and doc["passed"]
    assert doc["report"]["linf_error"] <= doc["report"]["delta_budget"]
    assert "status: PASS" in capsys.readouterr().out


def test_angles_then_simulate_from_files(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    assert run_cli("approx", "--config", cfg, "--out", out) == EXIT_OK
    assert run_cli("angles", "--poly", out / "poly.json", "--out", out) == EXIT_OK
    phases = json.loads((out / "phases.json").read_text())
    assert phases["phases"]["max_residual"] <= 1e-10
    code = run_cli("simulate", "--config", cfg, "--poly", out / "poly.json",
                   "--phases", out / "phases.json", "--out", out)
    assert code == EXIT_OK
    sim = json.loads((out / "simulation.json").read_text())
    assert sim["checks"] == {"trace_distance": True, "bound_ordering": True}


def test_simulate_output_is_deterministic(tmp_path, capsys):
    cfg = write_config(tmp_path)
    docs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert run_cli("simulate", "--config", cfg, "--out", out, "--format", "json") == EXIT_OK
        docs.append((out / "simulation.json").read_text())
    assert docs[0] == docs[1]
    printed = capsys.readouterr().out
    assert "seconds" not in printed


def test_tolerance_failure_exit_code(tmp_path):
    # A degree-2 approximant cannot reach 1e-4 on a beta = 4 Gaussian.
    cfg = write_config(tmp_path, degree=2, method="chebyshev")
    assert run_cli("simulate", "--config", cfg, "--out", tmp_path / "o") == EXIT_FAIL


def test_width_guard_exit_code(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("QETPREP_MAX_WIDTH", "4")
    cfg = write_config(tmp_path)
    assert run_cli("simulate", "--config", cfg, "--out", tmp_path / "o") == EXIT_ERROR
    assert "WidthError" in capsys.readouterr().err


def test_invalid_input_exit_code(tmp_path):
    assert run_cli("approx", "--out", tmp_path) == EXIT_ERROR
    bad = write_config(tmp_path, method="pade")
    assert run_cli("approx", "--config", bad, "--out", tmp_path) == EXIT_ERROR
    assert run_cli("approx", "--config", tmp_path / "missing.json") == EXIT_ERROR
    unknown = write_config(tmp_path, function={"kind": "sigmoid", "domain": [0, 1]})
    assert run_cli("approx", "--config", unknown, "--out", tmp_path) == EXIT_ERROR


def test_estimate_tanh_table(tmp_path, capsys):
    cfg = write_config(tmp_path, function={"kind": "tanh", "domain": [0, 1]}, degree=33,
                       estimate_n=32, n=8)
    assert run_cli("estimate", "--config", cfg, "--out", tmp_path) == EXIT_OK
    doc = json.loads((tmp_path / "estimate.json").read_text())
    assert doc["estimate"]["resources"]["toffoli_equivalent"] == 97115
    text = capsys.readouterr().out
    assert "grover-rudolph" in text and "9.7e4" in text


def test_verify_subset(tmp_path, capsys):
    assert run_cli("verify", "--criteria", "2", "--out", tmp_path) == EXIT_OK
    assert capsys.readouterr().out.startswith("[PASS] criterion 2")
    doc = json.loads((tmp_path / "verify.json").read_text())
    assert doc["passed"] and len(doc["results"]) == 1


def test_report_writes_artefacts(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "rep"
    assert run_cli("report", "--config", cfg, "--out", out) == EXIT_OK
    doc = json.loads((out / "report.json").read_text())
    for name in ("approximation.png", "state.png", "trajectory.png", "filling.tsv",
                 "resources.tsv", "state.tsv"):
        assert name in doc["files"]
        assert (out / name).stat().st_size > 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qetprep", "--version"], capture_output=True,
                          text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("qetprep")
