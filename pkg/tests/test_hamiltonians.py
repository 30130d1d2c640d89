import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gieshield import hamiltonians as hm
from gieshield.errors import CompositionError, DomainError, GeometryError

from conftest import DX, LINEAR, PARALLEL

L = 20e-6


def _hessian(V, h):
    H = np.zeros((4, 4))
    E = np.eye(4) * h
    for a in range(4):
        for b in range(4):
            H[a, b] = (V(E[a] + E[b]) - V(E[a] - E[b]) - V(-E[a] + E[b]) + V(-E[a] - E[b])) / (4 * h * h)
    return H


def _x_block(form):
    form = form.embed(hm.PARTICLE_MODES)
    idx = [0, 2, 4, 6]
    return form.G[np.ix_(idx, idx)]


@pytest.mark.parametrize("theta", [LINEAR, PARALLEL, 0.4, 1.2])
def test_gravity_form_matches_exact_hessian(theta, silica):
    form = hm.gravity_form(theta, theta, silica.lam, L)
    V = lambda r: hm.gravity_potential(*r, theta, theta, L, silica.lam)
    H = _hessian(V, 1e-9)
    G = _x_block(form)
    assert np.max(np.abs(G - H)) < 1e-5 * np.max(np.abs(G))


def test_gravity_form_linear_coefficient(silica):
    # displacement along the axis couples with 2 lam, transverse displacement with -lam
    form = hm.gravity_form(LINEAR, LINEAR, silica.lam, L, with_y=False)
    assert form.coefficient("xA", "xB") == pytest.approx(2 * silica.lam, rel=1e-12)
    par = hm.gravity_form(PARALLEL, PARALLEL, silica.lam, L, with_y=False)
    assert par.coefficient("xA", "xB") == pytest.approx(-silica.lam, rel=1e-12)


@pytest.mark.parametrize("kind", ["casimir", "magdipole"])
@pytest.mark.parametrize("particle", ["A", "B"])
def test_surface_form_matches_exact_hessian(kind, particle, lead):
    n, k, d0 = (2, lead.eta, lead.d0_casimir) if kind == "casimir" else (3, lead.delta, lead.d0_mag)
    builder = hm.casimir_form if kind == "casimir" else hm.magdipole_form
    for theta in (LINEAR, PARALLEL, 0.9):
        form = builder(particle, theta, k, d0)

        def V(r):
            x, y = (r[0], r[1]) if particle == "A" else (r[2], r[3])
            return -k * d0 ** (n + 2) / hm.surface_gap(particle, theta, d0, x, y) ** n

        H = _hessian(V, 1e-9)
        G = _x_block(form)
        assert np.max(np.abs(G - H)) < 1e-6 * np.max(np.abs(G))


def test_noise_draw_geometry():
    d = hm.NoiseDraw(shield_L=1.0, detA_L=0.25, detB_L=0.5, shield_theta=0.1, detB_theta=0.2)
    assert d.xi_L("A") == 1.25
    assert d.xi_L("B") == -0.5
    assert d.xi_theta("A") == 0.1
    assert d.xi_theta("B") == pytest.approx(0.3)
    assert d.tag == "mixed"
    assert hm.NoiseDraw(detA_L=1.0).tag == "detector_uncorrelated"
    with pytest.raises(DomainError):
        hm.NoiseDraw(shield_L=math.nan)


def test_surface_noise_shifts_gap():
    # a shift of the shield by xi must equal moving the particle by -xi along the normal
    k, d0, xi = 1.0, 1e-6, 3e-9
    noisy = hm.casimir_form("A", LINEAR, k, d0, hm.NoiseDraw(detA_L=xi), with_y=False)
    exact_grad = 2 * k * d0**4 / (d0 + xi) ** 3
    assert noisy.coefficient("xA") == pytest.approx(exact_grad, rel=1e-6)


def test_assemble_aligns_modes():
    a = hm.QuadraticForm(("xB",), np.diag([2.0, 0.0]), [1.0, 0.0])
    b = hm.QuadraticForm(("xA",), np.diag([3.0, 0.0]), [0.0, 0.0])
    s = hm.assemble([a, b])
    assert s.modes == ("xA", "xB")
    assert s.coefficient("xB") == 1.0
    assert s.coefficient("xA", "xA") == 1.5


def test_form_validation():
    with pytest.raises(CompositionError):
        hm.QuadraticForm(("xA", "xA"), np.zeros((4, 4)), np.zeros(4))
    with pytest.raises(CompositionError):
        hm.QuadraticForm(("xA",), [[0, 1], [0, 0]], [0, 0])
    with pytest.raises(CompositionError):
        hm.QuadraticForm.zero(["xA"]).embed(["xB"])
    with pytest.raises(GeometryError):
        hm.casimir_form("A", LINEAR, 1.0, 0.0)
    with pytest.raises(GeometryError):
        hm.pfa_potential(-1.0, 1.0)
    with pytest.raises(DomainError):
        hm.trap_form(0.0, 1.0, hm.NoiseDraw(trap_A=1.0))


def test_trap_equilibrium():
    tf = hm.trap_form(10.0, 2.0, hm.NoiseDraw(trap_A=4.0))
    assert tf.equilibrium_shift("A") == pytest.approx(4.0 / 200.0)
    assert tf.form.coefficient("xA", "xA") == pytest.approx(100.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, math.pi), st.floats(0, math.pi))
def test_gravity_form_symmetric_under_exchange(tA, tB):
    f = hm.gravity_form(tA, tB, 1.0, L)
    g = hm.gravity_form(tB, tA, 1.0, L)
    swap = {"xA": "xB", "yA": "yB", "xB": "xA", "yB": "yA"}
    # quadratic coefficients are invariant under relabelling A <-> B
    for a in hm.PARTICLE_MODES:
        for b in hm.PARTICLE_MODES:
            assert f.coefficient(a, b) == pytest.approx(g.coefficient(swap[a], swap[b]), abs=1e-12)
