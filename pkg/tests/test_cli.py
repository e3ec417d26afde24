import csv
import json
import math
import subprocess
import sys

import pytest

from softmode import cli
from softmode.params import format_param_text, reference_params


@pytest.fixture
def fig2_params(tmp_path):
    path = tmp_path / "fig2.params"
    path.write_text(
        "omega_m_hz = 10e6\ngamma_m_hz = 100\ng_l_hz = 215\ng_q_over_g_l = 0\n"
        "kappa_hz = 500e6\npower_uW = 10\nwavelength_nm = 810\ntemperature_K = 0\n"
        "detuning_mode = effective\ndetuning_hz = 0\n"
    )
    return path


def text_output(capsys):
    out = capsys.readouterr().out
    return dict(line.split(" = ", 1) for line in out.strip().splitlines())


def test_sql_at_resonance(fig2_params, capsys):
    assert cli.run(["sql", "--config", str(fig2_params)]) == 0
    assert float(text_output(capsys)["sql"]) == pytest.approx(1.0, rel=1e-15)


def test_sql_with_hz_flag_and_soft_mode(capsys):
    assert cli.run(["sql", "--hz", "--omega", "10e6"]) == 0
    assert float(text_output(capsys)["sql"]) == pytest.approx(1.0, rel=1e-12)
    assert cli.run(["sql", "--soft-mode", "--set", "g_q_over_g_l=-0.6"]) == 0
    assert float(text_output(capsys)["sql"]) == pytest.approx(0.57468, rel=1e-4)


def test_missing_config_exit_1(tmp_path, capsys):
    missing = tmp_path / "nope.params"
    assert cli.run(["steady", "--config", str(missing)]) == 1
    assert str(missing) in capsys.readouterr().err


def test_unknown_key_and_bad_override(tmp_path, capsys):
    path = tmp_path / "bad.params"
    path.write_text("power_uW = 3\ncolour = blue\n")
    assert cli.run(["steady", "--config", str(path)]) == 1
    assert "colour" in capsys.readouterr().err
    assert cli.run(["steady", "--set", "power_uW"]) == 1
    assert cli.run(["steady", "--set", "power_uW=-3"]) == 1
    assert "power" in capsys.readouterr().err
    assert cli.run(["frobnicate"]) == 1


def test_physics_failure_exit_2(capsys):
    assert cli.run(["steady", "--set", "power_uW=20", "--set", "g_q_over_g_l=-0.6"]) == 2
    assert "UnphysicalSoftMode" in capsys.readouterr().err
    assert cli.run(["spectrum", "--set", "power_uW=20", "--set", "g_q_over_g_l=-0.6"]) == 2
    assert cli.run(["optimal-power", "--power-min", "1e-3", "--power-max", "1e-2"]) == 2


def test_override_beats_config(tmp_path, capsys):
    path = tmp_path / "p.params"
    path.write_text(format_param_text(reference_params(power=10e-6)))
    assert cli.run(["steady", "--config", str(path), "--format", "json"]) == 0
    first = json.loads(capsys.readouterr().out)
    assert cli.run(["steady", "--config", str(path), "--set", "POWER_UW=40", "--format", "json"]) == 0
    second = json.loads(capsys.readouterr().out)
    assert second["photon_number"] == pytest.approx(4 * first["photon_number"], rel=1e-12)


def test_steady_reports_residuals(capsys):
    assert cli.run(["steady", "--set", "detuning_mode=bare", "--set", "detuning_hz=1e6"]) == 0
    out = text_output(capsys)
    assert float(out["residual_x"]) < 1e-10 and float(out["residual_c"]) < 1e-10
    assert float(out["delta"]) == pytest.approx(2 * math.pi * 1e6)


def test_stability_report(capsys):
    assert cli.run(["stability", "--set", "g_q_over_g_l=-0.6"]) == 0
    out = text_output(capsys)
    assert out["status"] == "stable"
    assert out["routh_hurwitz_stable"] == "True"
    assert cli.run(["stability", "--set", "power_uW=20", "--set", "g_q_over_g_l=-0.6"]) == 0
    assert text_output(capsys)["status"] == "unphysical"


def test_spectrum_csv(tmp_path):
    out = tmp_path / "spec.csv"
    assert cli.run(["spectrum", "--points", "11", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == ["omega_rad_s", "omega_over_omega_m", "thermal", "backaction", "shot", "total", "formula"]
    assert len(rows) == 11
    assert rows[0]["formula"] == "Resonant"
    assert cli.run(["spectrum", "--points", "3", "--full-formula", "--out", str(out)]) == 0
    assert next(csv.DictReader(out.open()))["formula"] == "Full"


def test_spectrum_hz_range(tmp_path):
    out = tmp_path / "spec.csv"
    assert cli.run(["spectrum", "--hz", "--omega-min", "5e6", "--omega-max", "15e6", "--points", "3", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert float(rows[1]["omega_over_omega_m"]) == pytest.approx(1.0, rel=1e-12)


def test_powersweep_and_optimal_power(tmp_path, capsys):
    out = tmp_path / "p.csv"
    assert cli.run(["powersweep", "--power-points", "21", "--set", "g_q_over_g_l=-0.6", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 21
    assert {r["status"] for r in rows} == {"stable", "unphysical"}
    assert cli.run(["optimal-power", "--format", "json"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["total"] == pytest.approx(1.0, abs=1e-6)
    assert res["power_W"] == pytest.approx(104.17e-6, rel=1e-3)


def test_stability_map_and_idempotence(tmp_path):
    out = tmp_path / "s.csv"
    argv = ["stability-map", "--power-points", "5", "--ratio-points", "4", "--out", str(out)]
    assert cli.run(argv) == 0
    first = out.read_bytes()
    assert cli.run(argv) == 0
    assert out.read_bytes() == first
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == ["power", "gq_over_gl", "status"]
    assert len(rows) == 20


def test_map_json_idempotent(tmp_path):
    out = tmp_path / "m.json"
    argv = ["map", "--power-points", "4", "--ratio-points", "3", "--format", "json", "--out", str(out)]
    assert cli.run(argv) == 0
    first = out.read_bytes()
    assert cli.run(argv) == 0
    assert out.read_bytes() == first
    assert len(json.loads(first)["rows"]) == 12


def test_fig4_preset_map(tmp_path):
    out = tmp_path / "fig4.csv"
    assert cli.run(["map", "--preset", "fig4", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 200 * 200
    statuses = {r["status"] for r in rows}
    assert {"stable", "unphysical"} <= statuses
    assert min(float(r["total"]) for r in rows if r["total"]) < 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "softmode", "sql"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "sql = 1" in proc.stdout
