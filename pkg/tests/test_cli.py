import json
import subprocess
import sys

import pytest
import yaml

from gieshield import cli
from gieshield import scenario as sc


def test_run_recipe_to_stdout(capsys):
    assert cli.main(["run", "-c", "gravity_gaussian_lead"]) == 0
    out = capsys.readouterr()
    assert out.out.splitlines()[0].startswith("t,E_N")
    assert "lambda=" in out.err


def test_run_writes_files(tmp_path, capsys):
    assert cli.main(["run", "-c", "gravity_cat_linear_silica", "-o", str(tmp_path)]) == 0
    csv_path = tmp_path / "gravity_cat_linear_silica.csv"
    meta = json.loads((tmp_path / "gravity_cat_linear_silica.json").read_text())
    assert csv_path.exists()
    assert len(meta["sha256"]) == 64


def test_sweep_grid_syntax(capsys):
    args = ["sweep", "-c", "shield_distance_noise_silica", "--param", "noise.deviations.shield_L",
            "--grid", "1e-16:1e-14:3:log"]
    assert cli.main(args) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "noise.deviations.shield_L,E_N_final,E_N_max"
    assert len(lines) == 4


def test_threshold_prints_json(capsys):
    args = ["threshold", "-c", "shield_distance_noise_silica", "--param", "noise.deviations.shield_L",
            "--lo", "1e-17", "--hi", "1e-12", "--target", "0.01"]
    assert cli.main(args) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["critical_value"] == pytest.approx(5.277e-15, rel=3e-3)


def test_fwhm_near_peak(capsys):
    assert cli.main(["fwhm", "-c", "trap_revivals_lead", "--near", "0.01", "--window", "2e-3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert isinstance(out["peak_index"], int)
    assert 0 < out["fwhm"] < 4e-3


def test_modes_table(capsys):
    assert cli.main(["modes", "--count", "4"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 5


def test_estimate(capsys):
    assert cli.main(["estimate", "--material", "lead", "--b-field", "250e-6"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert isinstance(out, dict) and out


def test_config_error_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text(yaml.safe_dump({"schema_version": 1, "state": {"kind": "quantum_foam"}}))
    assert cli.main(["run", "-c", str(p)]) == 2
    assert "config error" in capsys.readouterr().err
    assert cli.main(["run"]) == 2


def test_numeric_error_exit_code(capsys):
    args = ["threshold", "-c", "shield_distance_noise_silica", "--param", "noise.deviations.shield_L",
            "--lo", "1e-20", "--hi", "1e-19", "--target", "0.01"]
    assert cli.main(args) == 3


def test_verify_single_case(tmp_path, capsys):
    junit = tmp_path / "report.xml"
    assert cli.main(["verify", "--case", "time_scale", "--junit", str(junit)]) == 0
    out = capsys.readouterr().out
    assert "[PASS] criterion  1 time_scale" in out
    assert "<testsuite" in junit.read_text()


def test_verify_failing_case_exit_code(capsys):
    assert cli.main(["verify", "--case", "shield_thermal_amplitude"]) == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "gieshield.cli", "modes", "--count", "2"],
                       capture_output=True, text=True, check=True)
    assert r.stdout.startswith("k,l,root")


@pytest.mark.parametrize("name", sc.list_recipes())
def test_every_recipe_runs(name):
    tab = sc.run(sc.recipe_path(name))
    en = tab.column("E_N")
    assert len(en) > 0
    assert all(v >= 0 and v == v for v in en)
