import numpy as np
import pytest

from gieshield import golden
from gieshield.errors import ConfigError


def test_every_criterion_has_one_case():
    crits = [c.criterion for c in golden.CASES if c.criterion is not None]
    assert sorted(crits) == list(range(1, 16))


def test_single_case_filter_runs_only_that_case():
    rep = golden.verify_all(["local_phase_rates"])
    assert [c.case.name for c in rep.cases] == ["local_phase_rates"]
    assert rep.ok


def test_unknown_case_is_config_error():
    with pytest.raises(ConfigError):
        golden.verify_all(["no_such_case"])


def test_missing_golden_file(monkeypatch, tmp_path):
    monkeypatch.setattr(golden, "GOLDEN_DIR", tmp_path)
    with pytest.raises(ConfigError):
        golden._read_golden("gravity_cat_linear_silica")
    rep = golden.verify_all(["curve_gravity_cat_linear_silica"])
    assert not rep.ok
    assert "ConfigError" in rep.cases[0].error


@pytest.mark.parametrize("name", golden.GOLDEN_CURVES)
def test_curve_regressions(name):
    out = golden.curve_check(name)()
    assert out.passed, out.measured


def test_report_lines_and_junit():
    rep = golden.verify_all(["time_scale", "shield_thermal_amplitude"], workers=2)
    lines = rep.lines()
    assert lines[0].startswith("[PASS]") and lines[1].startswith("[FAIL]")
    assert lines[-1] == "1/2 cases passed"
    assert rep.junit().count("<failure") == 1


def test_log_band():
    assert golden.in_band(2e-8, 1e-8, 0.31)
    assert not golden.in_band(2e-8, 1e-8, 0.3)
    assert not golden.in_band(-1.0, 1.0, 1.0)
