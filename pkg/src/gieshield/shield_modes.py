"""Vibrational modes of a clamped circular plate and their coupling to the particles.

Mode profiles are kept unnormalized,
u_kl(r, th) = [J_l(b r) - J_l(b r_s)/I_l(b r_s) I_l(b r)] cos(l th), b = root/r_s,
and the modal mass m_eff = m/(pi r_s^2) int |u|^2 dA carries the normalization.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special

from .constants import HBAR, KB
from .errors import DomainError, NumericError
from .params import MaterialProps, NIOBIUM


@dataclass(frozen=True)
class ShieldSpec:
    material: MaterialProps = NIOBIUM
    radius: float = 1e-2
    thickness: float = 2e-6
    temperature: float = 0.0
    profile_scale: float = 1.0  # rescales the raw profile; physical outputs must not depend on it

    def __post_init__(self):
        if not (self.radius > 0 and self.thickness > 0):
            raise DomainError("shield radius and thickness must be positive")
        if self.temperature < 0:
            raise DomainError("temperature must be non-negative")
        if self.material.youngs_modulus is None or self.material.poisson_ratio is None:
            raise DomainError(f"{self.material.name}: elastic constants missing")

    @property
    def mass(self) -> float:
        return self.material.density * math.pi * self.radius**2 * self.thickness

    @property
    def plate_ratio(self) -> float:
        return self.radius / self.thickness


def char_function(x, l: int):
    """J_l I_{l+1} + I_l J_{l+1}, divided by I_l to avoid overflow."""
    x = np.asarray(x, dtype=float)
    return special.jv(l, x) * special.ive(l + 1, x) / special.ive(l, x) + special.jv(l + 1, x)


def _scan_roots(l: int, count: int | None = None, upper: float = math.inf) -> tuple[float, ...]:
    roots = []
    step = 0.05
    a = 0.5 + 0.5 * l
    fa = float(char_function(a, l))
    while (count is None or len(roots) < count) and a < upper:
        b = a + step
        fb = float(char_function(b, l))
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            r = optimize.brentq(char_function, a, b, args=(l,), xtol=1e-15, rtol=1e-15, maxiter=200)
            if abs(float(char_function(r, l))) > 1e-10:
                raise NumericError(f"root refinement failed for l={l} near {r}")
            roots.append(r)
        a, fa = b, fb
        if a > 1e4:
            raise NumericError(f"root bracketing failed for l={l}: found {len(roots)} roots")
    return tuple(r for r in roots if r < upper)


@lru_cache(maxsize=None)
def _roots_cached(l: int, count: int) -> tuple[float, ...]:
    return _scan_roots(l, count=count)


@lru_cache(maxsize=None)
def _roots_below(l: int, upper: float) -> tuple[float, ...]:
    return _scan_roots(l, upper=upper)


def char_roots(l: int, count: int) -> list[float]:
    """First ``count`` positive roots of the clamped-plate characteristic equation."""
    if count < 1 or l < 0:
        raise DomainError("need count >= 1 and l >= 0")
    return list(_roots_cached(int(l), int(count)))


def _edge_ratio(l: int, root: float) -> float:
    return special.jv(l, root) / special.iv(l, root)


def profile_radial(l: int, root: float, rho) -> np.ndarray:
    """Radial factor at rho = r/r_s in [0, 1]."""
    rho = np.asarray(rho, dtype=float)
    z = root * rho
    # J_l(root)/I_l(root) * I_l(z) evaluated via scaled Bessel functions
    tail = special.jv(l, root) * special.ive(l, z) / special.ive(l, root) * np.exp(z - root)
    return special.jv(l, z) - tail


def mode_profile(mode: "ShieldMode", r, theta, spec: ShieldSpec | None = None) -> np.ndarray:
    r_s = mode.r_s
    r = np.asarray(r, dtype=float)
    if np.any(r > r_s * (1 + 1e-12)) or np.any(r < 0):
        raise DomainError("radius outside the plate")
    scale = spec.profile_scale if spec is not None else mode.profile_scale
    return scale * profile_radial(mode.l, mode.root, r / r_s) * np.cos(mode.l * np.asarray(theta))


def eigenfrequency_from_root(root: float, spec: ShieldSpec) -> float:
    mat = spec.material
    stiff = math.sqrt(mat.youngs_modulus / (12 * mat.density * (1 - mat.poisson_ratio**2)))
    return root**2 * spec.thickness / spec.radius**2 * stiff


def _mass_integral(l: int, root: float) -> float:
    val, err = integrate.quad(lambda p: profile_radial(l, root, p) ** 2 * p, 0.0, 1.0,
                              epsabs=0.0, epsrel=1e-12, limit=400)
    if err > 1e-8 * abs(val):
        raise NumericError(f"modal-mass quadrature did not converge (l={l}, root={root})")
    return val


def effective_mass_raw(l: int, root: float, spec: ShieldSpec) -> float:
    ang = 2 * math.pi if l == 0 else math.pi
    # m/(pi r_s^2) * ang * r_s^2 * int u^2 rho drho
    return spec.mass / math.pi * ang * _mass_integral(l, root) * spec.profile_scale**2


def thermal_occupation(omega: float, T: float) -> float:
    if T <= 0:
        return 0.0
    x = HBAR * omega / (KB * T)
    return 1.0 / math.expm1(x) if x < 700 else 0.0


@dataclass(frozen=True)
class ShieldMode:
    k: int
    l: int
    root: float
    omega: float
    u0: float
    du: float
    m_eff: float
    nbar: float
    dq: float
    dp: float
    r_s: float
    profile_scale: float = 1.0

    @property
    def q_zpf(self) -> float:
        return math.sqrt(HBAR / (2 * self.m_eff * self.omega))

    @property
    def label(self) -> str:
        return f"q{self.k}_{self.l}"


def thermal_stats(omega: float, m_eff: float, T: float) -> tuple[float, float, float]:
    """(nbar, dq, dp) with dq^2 = hbar/(2 m w) coth(hbar w / 2 k T)."""
    if T < 0:
        raise DomainError("temperature must be non-negative")
    nbar = thermal_occupation(omega, T)
    dq = math.sqrt(HBAR / (2 * m_eff * omega) * (1 + 2 * nbar))
    dp = math.sqrt(HBAR * m_eff * omega / 2 * (1 + 2 * nbar))
    return nbar, dq, dp


def make_mode(k: int, l: int, spec: ShieldSpec) -> ShieldMode:
    root = char_roots(l, k)[k - 1]
    omega = eigenfrequency_from_root(root, spec)
    scale = spec.profile_scale
    u0 = float(scale * (1.0 - _edge_ratio(0, root))) if l == 0 else 0.0
    du = float(scale * root / spec.radius / 2 * (1.0 - _edge_ratio(1, root))) if l == 1 else 0.0
    m_eff = effective_mass_raw(l, root, spec)
    nbar, dq, dp = thermal_stats(omega, m_eff, spec.temperature)
    return ShieldMode(k, l, root, omega, u0, du, m_eff, nbar, dq, dp, spec.radius, scale)


def at_temperature(mode: ShieldMode, T: float) -> ShieldMode:
    nbar, dq, dp = thermal_stats(mode.omega, mode.m_eff, T)
    return replace(mode, nbar=nbar, dq=dq, dp=dp)


def eigenfrequency(mode: ShieldMode, spec: ShieldSpec) -> float:
    return eigenfrequency_from_root(mode.root, spec)


def effective_mass(mode: ShieldMode, spec: ShieldSpec) -> float:
    return effective_mass_raw(mode.l, mode.root, spec)


def lowest_modes(spec: ShieldSpec, count: int, l_values: tuple[int, ...] | None = None) -> list[ShieldMode]:
    """The ``count`` lowest-frequency modes over all l (or the given l values)."""
    if count < 1:
        raise DomainError("count must be >= 1")
    cand = []
    upper = 10.0
    while True:
        cand = []
        ls = l_values if l_values is not None else range(0, 10 * count)
        for l in ls:
            # the first root for order l exceeds l, so higher orders cannot contribute
            if l > upper:
                break
            cand += [(r, k, l) for k, r in enumerate(_roots_below(l, upper), start=1)]
        if len(cand) >= count:
            break
        upper *= 1.5
    cand.sort()
    return [make_mode(k, l, spec) for _, k, l in cand[:count]]


def coupling_coefficients(mode: ShieldMode, kind: str, orientation, strength: float, d0: float,
                          dx_A: float, dx_B: float | None = None) -> np.ndarray:
    """Branch couplings G_j (J) for |++>, |+->, |-+>, |-->; H_int = sum_j G_j |j><j| (a + a^dag).

    Built from the symbolic q*x coefficients, so the parallel/linear closed forms
    (4 eta dx d0 du, 12 eta dx u0, 6 delta dx d0 du, 24 delta dx u0) follow.
    """
    from .hamiltonians import _shield_expansion, _sign, orientation_angle

    n = {"casimir": 2, "magdipole": 3}.get(kind)
    if n is None:
        raise DomainError(f"unknown coupling kind {kind!r}")
    dx_B = dx_A if dx_B is None else dx_B
    theta = orientation_angle(orientation)
    exp = _shield_expansion(n)
    cA = strength * exp(theta, d0, _sign("A"), mode.u0, mode.du)["xq"]
    cB = strength * exp(theta, d0, _sign("B"), mode.u0, mode.du)["xq"]
    signs = np.array([(1, 1), (1, -1), (-1, 1), (-1, -1)], dtype=float)
    return mode.q_zpf * (cA * dx_A * signs[:, 0] + cB * dx_B * signs[:, 1])


def mode_table_csv(modes: list[ShieldMode]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "l", "root", "omega", "m_eff", "u0", "du", "nbar", "dq"])
    for m in modes:
        w.writerow([m.k, m.l] + [repr(float(v)) for v in (m.root, m.omega, m.m_eff, m.u0,
                                                        m.du, m.nbar, m.dq)])
    return buf.getvalue()
