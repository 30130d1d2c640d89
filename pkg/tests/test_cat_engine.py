import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gieshield import cat_engine as ce
from gieshield import params as pm
from gieshield import shield_modes as sm
from gieshield.constants import HBAR
from gieshield.errors import ConfigError, DomainError, GeometryError, NumericError
from gieshield.negativity import log_negativity_density

from conftest import DX, LINEAR, PARALLEL


def test_gravity_closed_form(silica, t0_silica):
    cfg = ce.symmetric_config(DX, LINEAR, silica, kinds=())
    phi = ce.cat_phase(cfg)
    assert phi * t0_silica == pytest.approx(2.0, rel=1e-12)
    for t in np.linspace(0, 3 * t0_silica, 37):
        en = log_negativity_density(ce.evolve_gravity(cfg, t))
        assert en == pytest.approx(math.log2(1 + abs(math.sin(phi * t))), abs=1e-12)


def test_orientation_halves_phase(silica):
    lin = ce.cat_phase(ce.symmetric_config(DX, LINEAR, silica))
    par = ce.cat_phase(ce.symmetric_config(DX, PARALLEL, silica))
    assert lin / abs(par) == pytest.approx(2.0, rel=1e-12)


def test_exact_phase_close_to_expanded(silica):
    cfg = ce.symmetric_config(DX, LINEAR, silica)
    assert ce.exact_cat_phase(cfg) == pytest.approx(12.18433, rel=1e-6)
    assert ce.cat_phase(cfg) == pytest.approx(12.18426, rel=1e-6)


def test_local_phases_do_not_change_negativity(lead, t0_lead):
    cfg = ce.symmetric_config(DX, LINEAR, lead, t=0.3 * t0_lead)
    a = log_negativity_density(ce.evolve_gravity(cfg, local_phases=True))
    b = log_negativity_density(ce.evolve_gravity(cfg, local_phases=False))
    assert a == pytest.approx(b, abs=1e-12)


@pytest.mark.parametrize("gA,gB", [(0.0, 0.0), (0.3, 0.3), (0.2, 0.9), (1.5, 0.1)])
def test_detector_closed_form_matches_matrix(gA, gB, silica, t0_silica):
    cfg = ce.symmetric_config(DX, LINEAR, silica, kinds=())
    gam = ce.GammaSet({("A", "casimir", "L"): gA, ("B", "casimir", "L"): gB})
    for t in (0.2 * t0_silica, math.pi / 4 * t0_silica):
        _, en = ce.averaged_detector_variations(cfg, gam, t)
        phi_t = ce.cat_phase(cfg) * t
        assert en == pytest.approx(ce.detector_closed_form(gA**2, gB**2, phi_t), abs=1e-12)
        if gA == gB:
            assert en == pytest.approx(ce.symmetric_detector_closed_form(gA**2, phi_t), abs=1e-12)


@pytest.mark.parametrize("g", [0.0, 0.1, 0.4, 1.0])
def test_shield_closed_form_matches_matrix(g, silica, t0_silica):
    cfg = ce.symmetric_config(DX, LINEAR, silica, kinds=())
    t = math.pi / 4 * t0_silica
    _, en = ce.averaged_shield_variations(cfg, ce.GammaSet.symmetric(g), t)
    assert en == pytest.approx(ce.symmetric_shield_closed_form(g * g, ce.cat_phase(cfg) * t), abs=1e-12)


def test_correlated_noise_limit_is_separable(silica, t0_silica):
    cfg = ce.symmetric_config(DX, LINEAR, silica, kinds=())
    _, en = ce.averaged_shield_variations(cfg, ce.GammaSet.symmetric(30.0), math.pi / 4 * t0_silica)
    assert en == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("field", ["detA_L", "detB_theta", "shield_L", "shield_theta"])
def test_generic_damping_matches_gamma_closed_forms(field, lead, t0_lead):
    cfg = ce.symmetric_config(DX, 1.1, lead, t=0.4 * t0_lead)
    dev = {field: 1e-18 if field.endswith("_L") else 1e-14}
    G = ce.damping_exponents(cfg, dev)
    gam = ce.gamma_set(cfg, dev)
    ref = ce._shield_exponents(gam) if field.startswith("shield") else ce._detector_exponents(
        gam.total_sq("A"), gam.total_sq("B"))
    # the closed forms keep the leading order in dx / d0
    assert np.allclose(G, ref, rtol=1e-3, atol=1e-14)


def test_monte_carlo_agrees_with_quadrature(silica, t0_silica):
    cfg = ce.symmetric_config(DX, LINEAR, silica, t=0.3 * t0_silica)
    dev = {"shield_L": 4e-15, "detA_L": 2e-15}
    mc, se = ce.monte_carlo_average(cfg, dev, 60_000, seed=3)
    assert abs(mc - ce.averaged_log_negativity(cfg, dev)) < 4 * se
    assert ce.monte_carlo_average(cfg, dev, 60_000, seed=3) == (mc, se)


def test_exact_potentials_agree_at_small_noise(silica, t0_silica):
    cfg = ce.symmetric_config(DX, LINEAR, silica, t=math.pi / 4 * t0_silica)
    dev = {"shield_L": 5e-15}
    first = ce.averaged_log_negativity(cfg, dev)
    exact = ce.exact_potential_dephasing(cfg, dev, order=24)
    assert exact == pytest.approx(first, abs=2e-3)
    assert 0 < first < 1


def test_exact_potentials_reject_contact(lead):
    cfg = ce.symmetric_config(DX, LINEAR, lead, t=1e-3)
    with pytest.raises(GeometryError):
        ce.exact_potential_state(cfg, {"shield_L": 1e-5}, order=8)


@pytest.mark.parametrize("mat,th,field,expected", [
    ("silica", LINEAR, "shield_L", 5.277e-15),
    ("lead", LINEAR, "shield_L", 4.231e-18),
    ("silica", PARALLEL, "shield_theta", 1.647e-9),
    ("lead", PARALLEL, "shield_theta", 8.338e-13),
])
def test_critical_deviation(mat, th, field, expected, request):
    cs = request.getfixturevalue(mat)
    t0 = request.getfixturevalue(f"t0_{mat}")
    cfg = ce.symmetric_config(DX, th, cs, t=math.pi / 4 * t0)
    crit = ce.critical_deviation(cfg, field, threshold=1e-2)
    assert crit == pytest.approx(expected, rel=2e-3)
    assert ce.averaged_log_negativity(cfg, {field: crit}) == pytest.approx(1e-2, rel=5e-3)


def test_critical_deviation_errors(silica, t0_silica):
    cfg = ce.symmetric_config(DX, LINEAR, silica, t=t0_silica)
    with pytest.raises(ConfigError):
        ce.critical_deviation(cfg, "bogus")
    with pytest.raises(NumericError):
        ce.critical_deviation(cfg, "shield_L", lo=1e-3, hi=1.0)


def test_single_mode_decoherence_oracle(lead):
    # one linearly coupled oscillator displaces branch j by g_j (e^{-iwt} - 1)/(hbar w)
    cfg = ce.symmetric_config(DX, LINEAR, lead, kinds=("magdipole",))
    mode = sm.make_mode(1, 0, sm.ShieldSpec(temperature=1e-8))
    g = ce.shield_couplings(cfg, [mode])[0]
    w = mode.omega
    for t in np.linspace(0, 2 * math.pi / w, 9):
        rho = ce.evolve_with_thermal_shield(cfg, [mode], t=t, gravity=False).data
        for j in range(4):
            for k in range(4):
                expo = (2 * mode.nbar + 1) * ((g[j] - g[k]) / (HBAR * w)) ** 2 * (1 - math.cos(w * t))
                assert abs(rho[j, k]) == pytest.approx(0.25 * math.exp(-expo), rel=1e-9, abs=1e-300)


def test_single_mode_revival(lead):
    cfg = ce.symmetric_config(DX, PARALLEL, lead, kinds=("magdipole",))
    mode = sm.make_mode(1, 1, sm.ShieldSpec())
    dec = ce.decoherence_product(cfg, [mode], [0.0, 2 * math.pi / mode.omega])
    assert dec == pytest.approx([1.0, 1.0], abs=1e-9)


def test_thermal_series_shape_checks(lead):
    cfg = ce.symmetric_config(DX, PARALLEL, lead)
    modes = sm.lowest_modes(sm.ShieldSpec(), 3)
    with pytest.raises(DomainError):
        ce.thermal_shield_series(cfg, modes, [0.1], g=np.zeros((2, 4)))
    with pytest.raises(DomainError):
        ce.thermal_shield_series(cfg, modes, [-1.0])


def test_config_validation(silica):
    with pytest.raises(DomainError):
        ce.symmetric_config(0.0, LINEAR, silica)
    with pytest.raises(ConfigError):
        ce.symmetric_config(DX, LINEAR, silica, kinds=("coulomb",))
    with pytest.raises(DomainError):
        ce.GammaSet({("A", "casimir", "L"): -1.0})


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 3), st.floats(0, 3), st.floats(0, 3), st.floats(0, 2 * math.pi))
def test_averaged_states_are_physical(ga, gb, gs, phase):
    cs = ce.symmetric_config(DX, LINEAR, pm.couplings(pm.TABLE1_GEOMETRY, pm.SILICA), kinds=())
    t = phase / ce.cat_phase(cs)
    det, _ = ce.averaged_detector_variations(cs, ce.GammaSet({("A", "casimir", "L"): ga,
                                                              ("B", "casimir", "L"): gb}), t)
    sh, _ = ce.averaged_shield_variations(cs, ce.GammaSet({("A", "magdipole", "theta"): ga,
                                                           ("B", "magdipole", "theta"): gs}), t)
    for rho in (det, sh):
        rho.validate(tol=1e-10)
