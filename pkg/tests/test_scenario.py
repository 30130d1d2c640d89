import json
import math

import numpy as np
import pytest
import yaml

from gieshield import cat_engine as ce
from gieshield import scenario as sc
from gieshield.errors import ConfigError, NumericError

from conftest import DX


def _cat(**over):
    raw = {"schema_version": 1, "particle": {"material": "silica"},
           "state": {"kind": "two_level_cat", "dx": DX}, "interactions": ["gravity"],
           "time": {"start": 0.0, "stop": 1.0, "points": 5, "unit": "t0"}}
    raw.update(over)
    return raw


def test_recipes_load_and_validate():
    names = sc.list_recipes()
    assert len(names) >= 10
    for n in names:
        cfg = sc.load_config(sc.recipe_path(n))
        assert cfg["name"] == n


def test_defaults_and_yaml_round_trip(tmp_path):
    cfg = sc.load_config(_cat())
    assert cfg["engine"]["quad_order"] == 20
    p = tmp_path / "c.yaml"
    p.write_text(yaml.safe_dump(cfg.to_mapping()))
    assert sc.load_config(p).to_mapping() == cfg.to_mapping()


def test_float_strings_accepted():
    cfg = sc.load_config(_cat(state={"kind": "two_level_cat", "dx": "5e-8"}))
    assert cfg["state"]["dx"] == 5e-8


@pytest.mark.parametrize("bad,fragment", [
    ({"schema_version": 2}, "schema_version"),
    ({"state": {"kind": "two_level_cat", "dx": DX, "colour": 1}}, "state.colour"),
    ({"interactions": ["gravity", "strong_force"]}, "strong_force"),
    ({"noise": {"kind": "pink"}}, "noise.kind"),
    ({"particle": {"material": "cheese"}}, "cheese"),
    ({"time": {"unit": "fortnight"}}, "time.unit"),
])
def test_config_errors_name_the_problem(bad, fragment):
    with pytest.raises(ConfigError, match=fragment.replace(".", r"\.")):
        sc.load_config(_cat(**bad))


def test_missing_schema_version():
    raw = _cat()
    del raw["schema_version"]
    with pytest.raises(ConfigError):
        sc.load_config(raw)


def test_hot_shield_warns():
    with pytest.warns(UserWarning):
        sc.load_config(_cat(shield={"temperature": 300.0}))


def test_cat_run_matches_closed_form():
    tab = sc.run(_cat())
    t0 = sc.load_config(_cat()).t0()
    assert tab.columns[:2] == ["t", "E_N"]
    expected = np.log2(1 + np.abs(np.sin(2 * tab.column("t") / t0)))
    assert tab.column("E_N") == pytest.approx(expected, abs=1e-12)


def test_disabled_interactions_give_zero():
    tab = sc.run(_cat(interactions=[]))
    assert np.all(tab.column("E_N") == 0)


def test_gaussian_and_cat_agree_on_time_scale():
    g = sc.run(_cat(state={"kind": "gaussian", "dx": DX}))
    assert g.column("E_N")[0] == 0.0
    assert np.all(np.diff(g.column("E_N")) > 0)
    assert np.all(g.column("purity") == pytest.approx(1.0, abs=1e-9))


def test_continuous_cat_run():
    tab = sc.run(_cat(state={"kind": "continuous_cat", "dx": DX, "d": 0.0}))
    g = sc.run(_cat(state={"kind": "gaussian", "dx": DX}))
    assert tab.column("E_N") == pytest.approx(g.column("E_N"), abs=1e-4)


def test_quasi_static_cat_run_matches_engine():
    raw = _cat(interactions=["gravity", "casimir"],
               noise={"kind": "quasi_static", "deviations": {"shield_L": 5e-15}},
               time={"values": [math.pi / 4], "unit": "t0"})
    tab = sc.run(raw)
    cfg = sc.load_config(raw)
    cc = sc.cat_config(cfg).at(cfg.times()[0])
    assert tab.column("E_N")[0] == pytest.approx(ce.averaged_log_negativity(cc, {"shield_L": 5e-15}), abs=1e-12)


def test_result_table_write_and_digest(tmp_path):
    tab = sc.run(_cat())
    csv_path, json_path = tab.write(tmp_path, "out")
    meta = json.loads(json_path.read_text())
    assert meta["sha256"] == tab.digest()
    assert meta["config"]["state"]["kind"] == "two_level_cat"
    assert csv_path.read_text() == tab.to_csv()
    assert sc.run(_cat()).digest() == tab.digest()


def test_sweep_and_threshold():
    raw = _cat(interactions=["gravity", "casimir"], noise={"kind": "quasi_static", "deviations": {}},
               time={"values": [math.pi / 4], "unit": "t0"})
    path = "noise.deviations.shield_L"
    tab = sc.sweep(raw, path, [1e-16, 1e-15, 1e-14])
    en = tab.column("E_N_final")
    assert np.all(np.diff(en) < 0)
    crit = sc.find_threshold(raw, path, (1e-17, 1e-12), target=1e-2)
    assert crit == pytest.approx(5.277e-15, rel=3e-3)
    with pytest.raises(NumericError):
        sc.find_threshold(raw, path, (1e-20, 1e-19), target=1e-2)


def test_sweep_workers_deterministic():
    raw = _cat(interactions=["gravity", "casimir"], noise={"kind": "quasi_static", "deviations": {}},
               time={"values": [0.5], "unit": "t0"})
    grid = np.geomspace(1e-16, 1e-14, 6)
    a = sc.sweep(raw, "noise.deviations.shield_L", grid, workers=1)
    b = sc.sweep(raw, "noise.deviations.shield_L", grid, workers=3)
    assert a.rows == b.rows


def test_peak_fwhm_gaussian_oracle():
    x = np.linspace(-5, 5, 2001)
    s = 0.7
    y = np.exp(-x**2 / (2 * s * s))
    exact = 2 * math.sqrt(2 * math.log(2)) * s
    assert sc.peak_fwhm(x, y) == pytest.approx(exact, rel=1e-4)
    f = lambda v: math.exp(-v * v / (2 * s * s))
    coarse = np.linspace(-5, 5, 41)
    assert sc.peak_fwhm(coarse, np.exp(-coarse**2 / (2 * s * s)), refine=f) == pytest.approx(exact, rel=1e-9)


def test_peak_fwhm_errors():
    with pytest.raises(NumericError):
        sc.peak_fwhm(np.arange(5.0), np.ones(5))
    with pytest.raises(NumericError):
        sc.peak_fwhm(np.arange(5.0), np.arange(5.0), peak_index=4)


def test_set_and_get_path():
    raw = {"a": {"b": 1}}
    sc.set_path(raw, "a.b", 2)
    assert sc.get_path(raw, "a.b") == 2
    with pytest.raises(ConfigError):
        sc.get_path(raw, "a.c")


def test_unknown_recipe():
    with pytest.raises(ConfigError):
        sc.recipe_path("nope")
