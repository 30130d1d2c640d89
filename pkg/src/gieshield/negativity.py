"""Logarithmic negativity for Gaussian covariance matrices and small density matrices.

Quadrature ordering is (x_1, p_1, x_2, p_2, ...) with [x, p] = i, so the vacuum
covariance is identity/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import mpmath as mp
import numpy as np

from .errors import StateError

_EPS = np.finfo(float).eps
HALF_TOL = 1e-12
PAIR_TOL = 1e-10


def omega(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _check_symmetric(sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] % 2:
        raise StateError(f"covariance must be square with even size, got {sigma.shape}")
    scale = np.max(np.abs(sigma))
    if np.max(np.abs(sigma - sigma.T)) > 1e-10 * max(scale, 1e-300):
        raise StateError("covariance matrix is not symmetric")
    return 0.5 * (sigma + sigma.T)


def partial_transpose_gaussian(sigma: np.ndarray, partition: Sequence[int]) -> np.ndarray:
    """Flip the momentum sign of the modes listed in ``partition``."""
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0] // 2
    flip = np.ones(2 * n)
    for k in partition:
        if not 0 <= k < n:
            raise StateError(f"mode index {k} outside 0..{n - 1}")
        flip[2 * k + 1] = -1.0
    return sigma * np.outer(flip, flip)


def _spectrum_float(sigma: np.ndarray) -> np.ndarray:
    n = sigma.shape[0] // 2
    ev = np.linalg.eigvals(omega(n) @ sigma)
    nu = np.sort(np.abs(ev.imag))
    return nu[1::2]


def _spectrum_mp(sigma: np.ndarray, dps: int) -> np.ndarray:
    n = sigma.shape[0] // 2
    with mp.workdps(dps):
        S = mp.matrix(sigma.tolist())
        Om = mp.matrix(omega(n).tolist())
        try:
            Lc = mp.cholesky(S)
        except (ZeroDivisionError, ValueError):
            raise StateError("covariance matrix is not positive definite") from None
        A = Lc.T * Om * Lc
        ev = mp.eigsy(-(A * A))[0]
        vals = sorted(mp.sqrt(abs(v)) for v in ev)
        return np.array([float(v) for v in vals[1::2]])


def condition_estimate(sigma: np.ndarray) -> float:
    w = np.linalg.eigvalsh(sigma)
    top = np.max(np.abs(w))
    floor = _EPS * top
    return top / max(w[0], floor)


def symplectic_spectrum(sigma: np.ndarray, refine: str = "auto") -> np.ndarray:
    """Sorted symplectic eigenvalues (one per mode).

    ``refine='auto'`` switches to extended precision when float64 rounding of an
    ill-conditioned covariance could corrupt the smallest eigenvalue.
    """
    sigma = _check_symmetric(sigma)
    if refine == "never":
        nu = _spectrum_float(sigma)
    else:
        kappa = condition_estimate(sigma)
        if refine == "always" or _EPS * kappa > 1e-9:
            digits = int(np.log10(max(kappa, 10.0)))
            dps = max(30, 2 * digits + 25)
            nu = _spectrum_mp(sigma, dps)
        else:
            nu = _spectrum_float(sigma)
    nu = np.sort(nu)
    nu[np.abs(nu - 0.5) < HALF_TOL] = 0.5
    return nu


def log_negativity_from_spectrum(nu: np.ndarray) -> float:
    nu = np.asarray(nu)
    return float(np.sum(np.maximum(0.0, -np.log2(2.0 * nu))))


def log_negativity_gaussian(sigma: np.ndarray, partition: Sequence[int], refine: str = "auto") -> float:
    return log_negativity_from_spectrum(
        symplectic_spectrum(partial_transpose_gaussian(sigma, partition), refine))


def two_mode_squeezed_covariance(r: float) -> np.ndarray:
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    Z = np.diag([1.0, -1.0])
    return 0.5 * np.block([[c * np.eye(2), s * Z], [s * Z, c * np.eye(2)]])


# --- density matrices -------------------------------------------------------------

@dataclass(frozen=True)
class SmallDensityMatrix:
    data: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.shape != (int(np.prod(self.dims)),) * 2:
            raise StateError(f"shape {d.shape} does not match factor dims {self.dims}")

    def validate(self, tol: float = 1e-9) -> "SmallDensityMatrix":
        d = self.data
        if abs(np.trace(d) - 1.0) > tol:
            raise StateError(f"trace {np.trace(d).real} != 1")
        if np.max(np.abs(d - d.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(d))):
            raise StateError("density matrix is not Hermitian")
        if np.linalg.eigvalsh(0.5 * (d + d.conj().T))[0] < -tol:
            raise StateError("density matrix has negative eigenvalues")
        return self

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.data + self.data.conj().T))[0])


def partial_transpose_density(rho: np.ndarray, dims: Sequence[int], sys: int = 1) -> np.ndarray:
    dims = tuple(dims)
    n = len(dims)
    t = np.asarray(rho).reshape(dims + dims)
    perm = list(range(2 * n))
    perm[sys], perm[n + sys] = perm[n + sys], perm[sys]
    return t.transpose(perm).reshape(rho.shape)


def log_negativity_density(rho, dims: Sequence[int] | None = None, sys: int = 1) -> float:
    """log2 of the trace norm of the partial transpose on factor ``sys``."""
    if isinstance(rho, SmallDensityMatrix):
        dims = rho.dims if dims is None else dims
        rho = rho.data
    rho = np.asarray(rho)
    if dims is None:
        raise StateError("factor dimensions required")
    if rho.shape != (int(np.prod(dims)),) * 2:
        raise StateError(f"dimension mismatch {rho.shape} vs {tuple(dims)}")
    pt = partial_transpose_density(rho, dims, sys)
    ev = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return float(max(0.0, np.log2(np.sum(np.abs(ev)))))
