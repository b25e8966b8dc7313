import json
import subprocess
import sys

import pytest

CLI = [sys.executable, "-m", "probframes.cli"]


def run_cli(*args):
    return subprocess.run(
        CLI + list(args), capture_output=True, text=True
    )


def test_analyze_fixture():
    r = run_cli("analyze", "axes_2d")
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    assert doc["is_tight"] is True
    assert doc["lower_bound"] == 0.5
    assert doc["redundancy_rank"] == 0


def test_fixture_flag_equivalent_to_positional():
    a = run_cli("analyze", "axes_2d")
    b = run_cli("analyze", "--fixture", "axes_2d")
    assert a.stdout == b.stdout


def test_w2_value():
    r = run_cli("w2", "near_dirac_pair", "dirac_one")
    doc = json.loads(r.stdout)
    assert abs(doc["cost"] - 0.125) < 1e-15


def test_output_is_byte_identical_across_runs():
    first = run_cli("canonical-dual", "mean_one_pair")
    second = run_cli("canonical-dual", "mean_one_pair")
    assert first.returncode == second.returncode == 0
    assert first.stdout == second.stdout


def test_certify_coupling_fixture():
    r = run_cli("certify", "permuted_axes_coupling")
    doc = json.loads(r.stdout)
    assert doc["classification"] == "none"
    assert doc["source_redundancy"] == 0


def test_certify_search_two_measures():
    r = run_cli("certify", "axes_2d", "axes_2d")
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    assert doc["search"]["residual"] <= 1e-6 or doc["classification"] != "none"


def test_coupling_check():
    r = run_cli("coupling-check", "permuted_axes_coupling")
    doc = json.loads(r.stdout)
    assert doc["valid"] is True
    assert doc["row_error"] <= 1e-12


def test_neumann_sequence(tmp_path):
    r = run_cli("canonical-dual", "mean_one_pair")
    coupling = json.loads(r.stdout)["coupling"]
    path = tmp_path / "c.json"
    path.write_text(json.dumps(coupling))
    q = run_cli("neumann", str(path), "--terms", "3")
    assert q.returncode == 0
    doc = json.loads(q.stdout)
    assert len(doc["sequence"]) == 4
    assert all(s["deviation"] <= s["error_bound"] + 1e-12 for s in doc["sequence"])


def test_uncertainty_command(tmp_path):
    # canonical dual coupling written to disk, then queried
    r = run_cli("canonical-dual", "axes_2d")
    coupling = json.loads(r.stdout)["coupling"]
    path = tmp_path / "c.json"
    path.write_text(json.dumps(coupling))
    q = run_cli("uncertainty", str(path), "--vector", "1,0")
    doc = json.loads(q.stdout)
    assert doc["satisfied"] is True
    assert doc["rhs"] == 1.0


def test_text_output_mode():
    r = run_cli("analyze", "dirac_one", "--output", "text")
    assert r.returncode == 0
    assert "is_parseval: true" in r.stdout


def test_validation_errors_exit_2():
    assert run_cli("analyze", "no_such_fixture").returncode == 2
    assert run_cli("rescue", "permuted_axes_coupling").returncode == 2
    assert run_cli("certify", "axes_2d", "axes_2d", "axes_2d").returncode == 2


def test_failed_hypotheses_exit_3():
    r = run_cli("perturb", "dirac_one", "dirac_zero", "--mode", "bound")
    assert r.returncode == 3
    doc = json.loads(r.stdout)
    assert doc["flags"]["quadratic_closeness"] is False


def test_perturb_bound_values():
    r = run_cli("perturb", "dirac_one", "near_dirac_pair", "--mode", "bound")
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    assert abs(doc["lambda"] - 0.125) < 1e-15


def test_sample_dual_runs():
    r = run_cli(
        "sample-dual", "shifted_gauss_100", "--samples", "12", "--a-n", "0.3"
    )
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    assert len(doc["subsample"]["atoms"]) == 12
    assert doc["certificate"]["deviation"] < 1.0


def test_console_script_entry_point():
    r = subprocess.run(
        ["probframes", "analyze", "dirac_one"], capture_output=True, text=True
    )
    if r.returncode != 0:
        pytest.skip("console script not on PATH")
    assert json.loads(r.stdout)["is_parseval"] is True
