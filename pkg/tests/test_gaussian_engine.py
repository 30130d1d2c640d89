import math

import mpmath as mp
import numpy as np
import pytest

from gieshield import gaussian_engine as ge
from gieshield import hamiltonians as hm
from gieshield.constants import HBAR
from gieshield.errors import ConfigError, DomainError, StateError

from conftest import DX, LINEAR, PARALLEL

L = 20e-6


def _pair():
    return ge.initial_state({"xA": DX, "xB": DX})


def _surface_builder(cs, orientation="linear"):
    parts = ((hm.casimir_form, cs.eta, cs.d0_casimir), (hm.magdipole_form, cs.delta, cs.d0_mag))

    def build(draw=hm.ZERO_DRAW):
        th = hm.orientation_angle(orientation)
        return hm.assemble([hm.gravity_form(th, th, cs.lam, L, False)]
                           + [f(p, orientation, k, d0, draw, False) for p in "AB" for f, k, d0 in parts])
    return build


def test_initial_state_is_pure_and_scaled():
    st = ge.initial_state({"xA": DX, "xB": 2 * DX})
    assert st.purity_determinant() == pytest.approx(1.0)
    cov = st.si_covariance()
    assert cov[0, 0] == pytest.approx(DX**2)
    assert cov[3, 3] == pytest.approx(HBAR**2 / (16 * DX**2))
    with pytest.raises(StateError):
        ge.initial_state({"xA": -1.0})


def test_thermal_state_symplectic_eigenvalues():
    st = ge.initial_state({"xA": DX}, nbar=2.0)
    assert st.symplectic_eigenvalues() == pytest.approx([2.5])


def _mp_log_negativity(state, form, t, dps=80):
    """Reference E_N from an extended-precision matrix exponential (two modes, A|B)."""
    K, _ = ge.scaled_system(form, state)
    with mp.workdps(dps):
        S = mp.expm(mp.matrix(K.tolist()) * t)
        sig = S * mp.matrix(state.sigma.tolist()) * S.T
        P = mp.diag([1, -1, 1, 1])
        Om = mp.matrix([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]])
        ev = mp.eig(Om * (P * sig * P))[0]
        nu = sorted(abs(mp.im(e)) for e in ev)[::2]
        return float(sum(max(0, -mp.log(2 * n, 2)) for n in nu))


@pytest.mark.parametrize("theta", [LINEAR, PARALLEL, 0.8])
def test_propagate_matches_expm(theta, silica, t0_silica):
    st = ge.initial_state({m: DX for m in hm.PARTICLE_MODES})
    form = hm.gravity_form(theta, theta, silica.lam, L)
    for t in (0.1 * t0_silica, 2 * t0_silica):
        a = ge.propagate(st, form, t)
        b = ge.propagate_expm(st, form, t)
        assert a.log_negativity("A") == pytest.approx(b.log_negativity("A"), abs=1e-9)


def test_local_terms_leave_negativity_unchanged(silica, t0_silica):
    # position-only local terms act as local symplectic maps
    grav = hm.gravity_form(LINEAR, LINEAR, silica.lam, L, False)
    full = _surface_builder(silica)()
    for t in (0.1 * t0_silica, t0_silica):
        assert ge.propagate(_pair(), full, t).log_negativity("A") == pytest.approx(
            ge.propagate(_pair(), grav, t).log_negativity("A"), abs=1e-10)


@pytest.mark.parametrize("t", [0.001, 0.004])
def test_propagate_with_trap_matches_extended_precision(t, lead):
    M = 1e-14
    form = hm.assemble([hm.gravity_form(LINEAR, LINEAR, lead.lam, L, False), hm.kinetic_form(M, ("xA", "xB")),
                        hm.trap_form(600.0, M).form])
    a = ge.propagate(_pair(), form, t)
    assert a.log_negativity("A") == pytest.approx(_mp_log_negativity(_pair(), form, t), abs=1e-9)
    assert a.purity_determinant() == pytest.approx(1.0, abs=1e-9)


def test_gravity_only_entanglement_rate(silica, t0_silica):
    form = hm.gravity_form(LINEAR, LINEAR, silica.lam, L, False)
    t = 1e-6 * t0_silica
    en = ge.propagate(_pair(), form, t).log_negativity("A")
    assert en / t == pytest.approx(ge.entanglement_rate(LINEAR, silica.lam, DX, DX), rel=1e-5)
    assert ge.entanglement_rate(LINEAR, 1.0, 1.0, 1.0) == pytest.approx(2 * ge.entanglement_rate(PARALLEL, 1.0, 1.0, 1.0))


def test_linear_order_spectrum(silica, t0_silica):
    st = ge.initial_state({m: DX for m in hm.PARTICLE_MODES})
    form = hm.gravity_form(LINEAR, LINEAR, silica.lam, L)
    t = 1e-7 * t0_silica
    s = ge.propagate(st, form, t).sigma.copy()
    idx = [i for i, m in enumerate(st.modes) if m.endswith("A")]
    from gieshield.negativity import partial_transpose_gaussian, symplectic_spectrum
    nu = np.sort(symplectic_spectrum(partial_transpose_gaussian(s, idx)))
    approx = ge.linear_order_spectrum(LINEAR, silica.lam, DX, DX, DX, DX, t)
    assert nu == pytest.approx(approx, abs=1e-12)


def test_quadrature_converges(lead, t0_lead):
    build = _surface_builder(lead)
    noise = ge.NoiseSpec("quasi_static", {"shield_L": 3e-18})
    vals = [ge.average_quasistatic(_pair(), build, noise, 0.5 * t0_lead, quad_order=q).log_negativity("A")
            for q in (12, 20, 30)]
    assert abs(vals[1] - vals[2]) < 1e-5
    assert abs(vals[0] - vals[2]) > abs(vals[1] - vals[2])


def test_average_is_physical_and_reduces_entanglement(lead, t0_lead):
    build = _surface_builder(lead)
    pure = ge.propagate(_pair(), build(), 0.5 * t0_lead)
    noise = ge.NoiseSpec("quasi_static", {"shield_L": 3e-18, "detA_L": 1e-18})
    avg = ge.average_quasistatic(_pair(), build, noise, 0.5 * t0_lead)
    assert avg.is_physical()
    assert avg.log_negativity("A") < pure.log_negativity("A")


def test_trap_noise_averaged_exactly(lead):
    M = 2.67e-14
    build = lambda d=hm.ZERO_DRAW: hm.assemble([hm.gravity_form(LINEAR, LINEAR, lead.lam, L, False),
                                                hm.kinetic_form(M, ("xA", "xB")), hm.trap_form(600.0, M, d).form])
    dxi = 1e-20
    noise = ge.NoiseSpec("quasi_static", {"trap_A": dxi, "trap_B": dxi})
    t = 0.003
    avg = ge.average_quasistatic(_pair(), build, noise, t)
    cov = ge.trap_quasistatic_covariance(_pair(), build(), dxi, t)
    pure = ge.propagate(_pair(), build(), t)
    assert np.allclose(avg.sigma, pure.sigma + cov, rtol=1e-9, atol=1e-12)
    # trap offsets are linear: a two-point quadrature is already exact
    lo = ge.average_quasistatic(_pair(), build, noise, t, quad_order=2)
    assert np.allclose(lo.sigma, avg.sigma, rtol=1e-12, atol=1e-14)


def test_markovian_threshold_and_physicality(silica, t0_silica):
    form = hm.gravity_form(LINEAR, LINEAR, silica.lam, L, False)
    times = np.linspace(0, 2 * t0_silica, 41)[1:]
    D = HBAR * silica.lam
    states = ge.evolve_markovian(_pair(), form, D, times)
    assert max(ge.log_negativity_series(states)) <= 1e-6
    assert all(s.is_physical() for s in states)
    weak = ge.evolve_markovian(_pair(), form, 0.05 * D, times)
    assert max(ge.log_negativity_series(weak)) > 0


def test_markovian_diffusion_growth():
    # free particle: <x^2> grows by (2/3) D t^3 / M^2
    M = 1e-14
    st = ge.initial_state({"xA": DX})
    form = hm.kinetic_form(M, ("xA",))
    D, t = 1e-40, 0.01
    a = ge.evolve_markovian(st, form, D, t).si_covariance()
    b = ge.propagate_expm(st, form, t).si_covariance()
    assert a[0, 0] - b[0, 0] == pytest.approx(2 / 3 * D * t**3 / M**2, rel=1e-6)


def test_effective_frequency():
    assert ge.effective_frequency(10.0, 0.0, 0.0, 0.0, 1.0) == 10.0
    with pytest.raises(DomainError):
        ge.effective_frequency(1.0, 10.0, 0.0, 0.0, 1.0)


def test_noise_spec_validation():
    with pytest.raises(ConfigError):
        ge.NoiseSpec("pink")
    with pytest.raises(ConfigError):
        ge.NoiseSpec("quasi_static", {"bogus": 1.0})
    with pytest.raises(ConfigError):
        ge.NoiseSpec("quasi_static", {"shield_L": -1.0})
    assert ge.NoiseSpec("quasi_static", {"shield_L": 1.0}).tag == "shield_correlated"


def test_too_many_noise_dims_need_sparse_grid(lead):
    build = _surface_builder(lead)
    devs = {k: 1e-20 for k in ("shield_L", "shield_theta", "detA_L", "detA_theta", "detB_L")}
    with pytest.raises(ConfigError):
        ge.average_quasistatic(_pair(), build, ge.NoiseSpec("quasi_static", devs), 1e-3)
    out = ge.average_quasistatic(_pair(), build, ge.NoiseSpec("quasi_static", devs), 1e-3, sparse_level=2)
    assert out.is_physical()


def test_gauss_hermite_moments():
    x, w = ge.gauss_hermite_grid(1, 10)
    assert np.sum(w) == pytest.approx(1.0)
    assert np.sum(w * x[:, 0] ** 2) == pytest.approx(1.0)
    assert np.sum(w * x[:, 0] ** 4) == pytest.approx(3.0)


def test_reduced_traces_out_shield(lead):
    st = ge.initial_state({"xA": DX, "xB": DX, "q1_0": 1e-15})
    assert st.reduced(["xA", "xB"]).modes == ("xA", "xB")
    assert st.particle_log_negativity() == 0.0
    with pytest.raises(StateError):
        st.reduced(["zz"])
