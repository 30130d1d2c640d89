import math

import numpy as np
import pytest

from gieshield import shield_modes as sm
from gieshield.constants import HBAR, KB
from gieshield.errors import DomainError

from conftest import DX


def test_clamped_plate_roots():
    # standard values of the clamped circular plate frequency parameter
    assert sm.char_roots(0, 2) == pytest.approx([3.19622, 6.30644], abs=1e-5)
    assert sm.char_roots(1, 1)[0] == pytest.approx(4.61090, abs=1e-5)
    assert sm.char_roots(2, 1)[0] == pytest.approx(5.90568, abs=1e-5)


def test_profile_vanishes_at_clamped_edge():
    for l in range(3):
        root = sm.char_roots(l, 1)[0]
        assert abs(sm.profile_radial(l, root, 1.0)) < 1e-12
        h = 1e-6
        slope = (sm.profile_radial(l, root, 1.0) - sm.profile_radial(l, root, 1 - h)) / h
        assert abs(slope) < 1e-4


def test_lowest_modes_sorted_and_complete():
    modes = sm.lowest_modes(sm.ShieldSpec(), 20)
    w = [m.omega for m in modes]
    assert w == sorted(w)
    assert (modes[0].k, modes[0].l) == (1, 0)
    assert (modes[1].k, modes[1].l) == (1, 1)
    assert len({(m.k, m.l) for m in modes}) == 20


def test_thermal_stats():
    spec = sm.ShieldSpec(temperature=1e-8)
    m = sm.make_mode(1, 0, spec)
    nbar = 1 / math.expm1(HBAR * m.omega / (KB * 1e-8))
    assert m.nbar == pytest.approx(nbar, rel=1e-12)
    assert m.dq == pytest.approx(m.q_zpf * math.sqrt(1 + 2 * nbar), rel=1e-12)
    assert sm.at_temperature(m, 0.0).nbar == 0.0


def test_thermal_amplitude_value():
    m = sm.make_mode(1, 0, sm.ShieldSpec(temperature=1e-8))
    assert m.u0 * m.dq == pytest.approx(1.665e-15, rel=1e-3)


@pytest.mark.parametrize("kind", ["casimir", "magdipole"])
@pytest.mark.parametrize("orientation", ["linear", "parallel"])
def test_couplings_independent_of_profile_scale(kind, orientation, lead):
    s = lead.eta if kind == "casimir" else lead.delta
    d0 = lead.d0_casimir if kind == "casimir" else lead.d0_mag
    for k, l in ((1, 0), (1, 1), (2, 0)):
        g1 = sm.coupling_coefficients(sm.make_mode(k, l, sm.ShieldSpec()), kind, orientation, s, d0, DX)
        g2 = sm.coupling_coefficients(sm.make_mode(k, l, sm.ShieldSpec(profile_scale=0.031)),
                                      kind, orientation, s, d0, DX)
        assert np.allclose(g1, g2, rtol=1e-10, atol=0)


def test_mode_selection_rules(lead):
    # linear orientation couples to the central displacement, parallel to the tilt
    m10 = sm.make_mode(1, 0, sm.ShieldSpec())
    m11 = sm.make_mode(1, 1, sm.ShieldSpec())
    lin = sm.coupling_coefficients(m10, "magdipole", "linear", lead.delta, lead.d0_mag, DX)
    par = sm.coupling_coefficients(m10, "magdipole", "parallel", lead.delta, lead.d0_mag, DX)
    assert np.max(np.abs(lin)) > 0 and np.max(np.abs(par)) == 0
    assert np.max(np.abs(sm.coupling_coefficients(m11, "magdipole", "parallel", lead.delta,
                                                  lead.d0_mag, DX))) > 0
    # the closed form 24 delta dx u0 for the central mode
    expected = 24 * lead.delta * DX * m10.u0 * m10.q_zpf
    assert np.max(np.abs(lin)) == pytest.approx(expected, rel=1e-9)


def test_mode_table_csv():
    text = sm.mode_table_csv(sm.lowest_modes(sm.ShieldSpec(), 3))
    lines = text.strip().splitlines()
    assert lines[0].startswith("k,l,root,omega")
    assert len(lines) == 4
    for row in lines[1:]:
        [float(v) for v in row.split(",")]


def test_validation():
    with pytest.raises(DomainError):
        sm.ShieldSpec(radius=-1.0)
    with pytest.raises(DomainError):
        sm.ShieldSpec(temperature=-1.0)
    with pytest.raises(DomainError):
        sm.lowest_modes(sm.ShieldSpec(), 0)
    with pytest.raises(DomainError):
        sm.coupling_coefficients(sm.make_mode(1, 0, sm.ShieldSpec()), "coulomb", "linear", 1.0, 1e-6, DX)
