import csv
import json
import math

import numpy as np
import pytest

from pll_lockin.cli import main
from pll_lockin.lockin import lock_in_ranges
from pll_lockin.model import derived_coeffs
from pll_lockin.separatrix import implicit_residual

from conftest import REFERENCE

REF_FLAGS = [
    "--tau1", "0.0633", "--tau2", "0.0225", "--kvco", "250", "--k", str(2.0 / math.pi),
]


def test_analyze_reports_both_boundaries(capsys):
    assert main(["analyze", *REF_FLAGS]) == 0
    out = capsys.readouterr().out
    assert "85.27" in out
    assert "70.70" in out
    assert "focus" in out


def test_analyze_rejects_invalid_slope(capsys):
    code = main(["analyze", "--tau1", "0.0633", "--tau2", "0.0225", "--kvco", "250", "--k", "0.2"])
    assert code == 2
    err = capsys.readouterr().err
    assert "k" in err and "1/pi" in err


def test_analyze_missing_parameter(capsys):
    assert main(["analyze", "--tau1", "0.0633"]) == 2
    assert "--tau2" in capsys.readouterr().err


def test_analyze_json_round_trip(tmp_path):
    out = tmp_path / "report.json"
    assert main(["analyze", *REF_FLAGS, "--out", str(out), "--format", "json"]) == 0
    payload = json.loads(out.read_text())
    result = lock_in_ranges(REFERENCE)
    coeffs = derived_coeffs(REFERENCE)
    assert payload["omega_l"] == pytest.approx(result.omega_l, rel=1e-15)
    assert payload["omega_l_c"] == pytest.approx(result.omega_l_c, rel=1e-15)
    assert payload["a"] == pytest.approx(coeffs.a, rel=1e-15)
    assert payload["case"] == "focus"
    assert payload["huque_stensby_pull_out"] == pytest.approx(2 * result.omega_l, rel=1e-9)
    assert set(payload) >= {
        "tau1", "tau2", "k_vco", "k", "a", "b", "c", "case", "stable_kind",
        "omega_l", "omega_l_c", "d", "y_l", "y_l_c",
        "gardner", "best_pull_out_based", "huque_stensby_pull_out",
    }


def test_simulate_step_csv_columns(tmp_path):
    out = tmp_path / "traj.csv"
    assert main(["simulate", *REF_FLAGS, "--omega", "69", "--out", str(out)]) == 0
    with out.open() as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["t", "x", "theta_e", "y", "V", "sup_dev"]
    data = np.array(rows[1:], dtype=float)
    assert data.shape[1] == 6
    assert data[0, 0] == 0.0
    # running sup is nondecreasing and V relaxes toward zero
    assert np.all(np.diff(data[:, 5]) >= 0.0)
    assert data[-1, 4] < 1e-6 * data[0, 4]


def test_simulate_free_run_requires_initial_state(capsys):
    assert main(["simulate", *REF_FLAGS, "--omega", "40", "--scenario", "free"]) == 2
    assert "--x0" in capsys.readouterr().err


def test_simulate_deterministic_output(tmp_path):
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    argv = ["simulate", *REF_FLAGS, "--omega", "82", "--scenario", "saddle-step"]
    assert main([*argv, "--out", str(first)]) == 0
    assert main([*argv, "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_portrait_dataset(tmp_path):
    out = tmp_path / "portrait.csv"
    assert main(["portrait", *REF_FLAGS, "--grid-n", "4", "--n-samples", "64",
                 "--out", str(out)]) == 0
    with out.open() as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["kind", "series", "theta_e", "y"]
    kinds = {row[0] for row in rows[1:]}
    assert kinds == {"trajectory", "separatrix", "landmark"}

    sep = [(float(r[2]), float(r[3])) for r in rows[1:] if r[0] == "separatrix"]
    marks = {r[1]: (float(r[2]), float(r[3])) for r in rows[1:] if r[0] == "landmark"}
    assert len(sep) == 64

    # landmarks lie on the emitted separatrix samples
    for name, (theta_mark, y_mark) in marks.items():
        nearest = min(sep, key=lambda p: abs(p[0] - theta_mark))
        assert abs(nearest[0] - theta_mark) < 1e-12
        assert abs(nearest[1] - y_mark) < 1e-6

    # emitted samples satisfy their implicit equations
    coeffs = derived_coeffs(REFERENCE)
    result = lock_in_ranges(REFERENCE)
    for theta, y in sep:
        assert abs(implicit_residual(theta, y, coeffs, REFERENCE.k, result.d)) < 1e-9


def test_portrait_deterministic(tmp_path):
    first = tmp_path / "p1.csv"
    second = tmp_path / "p2.csv"
    argv = ["portrait", *REF_FLAGS, "--grid-n", "3", "--n-samples", "32"]
    assert main([*argv, "--out", str(first)]) == 0
    assert main([*argv, "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_sweep_grid(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--tau1", "0.0633", "--tau2", "0.0225", "--kvco", "250",
                 "--sweep-k", "0.4:3.6:5", "--out", str(out)]) == 0
    with out.open() as handle:
        rows = list(csv.reader(handle))
    assert len(rows) == 6
    header = rows[0]
    assert header[:4] == ["tau1", "tau2", "k_vco", "k"]
    ks = [float(r[header.index("k")]) for r in rows[1:]]
    assert ks == sorted(ks)
    # ranges are filled in for every grid point
    for row in rows[1:]:
        assert float(row[header.index("omega_l")]) > float(row[header.index("omega_l_c")])


def test_sweep_rejects_decreasing_grid(capsys):
    assert main(["sweep", "--tau1", "0.0633", "--tau2", "0.0225", "--kvco", "250",
                 "--sweep-k", "3.6:0.4:5"]) == 2
    assert "increasing" in capsys.readouterr().err


def test_sweep_requires_a_grid(capsys):
    assert main(["sweep", *REF_FLAGS]) == 2
    assert "sweep" in capsys.readouterr().err


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "loop.cfg"
    cfg.write_text(
        "# reference loop\n"
        "tau1 = 0.0633\n"
        "tau2 = 0.0225\n"
        "kvco = 250\n"
        f"k = {2.0 / math.pi}\n"
        "omega = 10\n"
    )
    out = tmp_path / "report.json"
    assert main(["analyze", "--config", str(cfg), "--out", str(out), "--format", "json"]) == 0
    assert json.loads(out.read_text())["k_vco"] == 250.0

    # flags override the config value
    out2 = tmp_path / "report2.json"
    assert main(["analyze", "--config", str(cfg), "--kvco", "500",
                 "--out", str(out2), "--format", "json"]) == 0
    assert json.loads(out2.read_text())["k_vco"] == 500.0


def test_config_file_syntax_error(tmp_path, capsys):
    cfg = tmp_path / "broken.cfg"
    cfg.write_text("tau1 0.0633\n")
    assert main(["analyze", "--config", str(cfg)]) == 2
    assert "key = value" in capsys.readouterr().err


def test_verify_small_batch_passes(capsys):
    assert main(["verify", "--n-sets", "1", "--seed", "5"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
