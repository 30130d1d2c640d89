import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gieshield import negativity as ng
from gieshield.errors import StateError


@pytest.mark.parametrize("r", [0.0, 0.1, 0.7, 2.0])
def test_two_mode_squeezed(r):
    sigma = ng.two_mode_squeezed_covariance(r)
    assert ng.log_negativity_gaussian(sigma, [0]) == pytest.approx(2 * r / math.log(2), abs=1e-12)


def test_vacuum_spectrum():
    nu = ng.symplectic_spectrum(0.5 * np.eye(4))
    assert np.allclose(nu, 0.5)


def test_bell_state():
    psi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert ng.log_negativity_density(np.outer(psi, psi), (2, 2)) == pytest.approx(1.0)


def test_product_state_is_zero():
    rho = np.kron(np.diag([0.3, 0.7]), np.diag([0.5, 0.5]))
    assert ng.log_negativity_density(rho, (2, 2)) == 0.0


def test_partial_transpose_is_involution():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    pt = ng.partial_transpose_density(rho, (2, 3))
    assert np.allclose(ng.partial_transpose_density(pt, (2, 3)), rho)


def test_dimension_errors():
    with pytest.raises(StateError):
        ng.log_negativity_density(np.eye(4) / 4)
    with pytest.raises(StateError):
        ng.SmallDensityMatrix(np.eye(3), (2, 2))
    with pytest.raises(StateError):
        ng.SmallDensityMatrix(np.diag([1.5, -0.5]), (2,)).validate()


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 1.5), st.floats(0.0, 2.0))
def test_thermal_noise_reduces_negativity(r, nbar):
    sigma = ng.two_mode_squeezed_covariance(r)
    noisy = sigma + nbar * np.eye(4)
    assert ng.log_negativity_gaussian(noisy, [0]) <= ng.log_negativity_gaussian(sigma, [0]) + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 1.5), st.floats(-3, 3))
def test_local_symplectic_invariance(r, s):
    sigma = ng.two_mode_squeezed_covariance(r)
    S = np.diag([math.exp(s), math.exp(-s), 1.0, 1.0])
    assert ng.log_negativity_gaussian(S @ sigma @ S.T, [0]) == pytest.approx(
        ng.log_negativity_gaussian(sigma, [0]), abs=1e-9)


def test_indefinite_covariance_is_state_error():
    bad = np.diag([1.0, 1e-30, 1.0, 1.0])
    bad[0, 1] = bad[1, 0] = 1e-10
    with pytest.raises(StateError):
        ng.symplectic_spectrum(bad, refine="always")
