"""Material constants, geometry, coupling strengths and scalar estimators.

All functions are pure and take SI inputs.  The shield-sizing helpers compare
entanglement rates of the non-gravitational interactions (suppressed by the
shield transmission) with the gravitational one.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .constants import C_LIGHT, E_CHARGE, EPS0, G, G_EARTH, HBAR, MU0, Z0
from .errors import DomainError, GeometryError, UnsupportedMaterialError

LN2 = math.log(2.0)


@dataclass(frozen=True)
class MaterialProps:
    name: str
    density: float
    relative_permittivity: float = math.inf
    volume_susceptibility: float = 0.0
    youngs_modulus: float | None = None
    poisson_ratio: float | None = None
    conductivity: float | None = None
    london_depth: float | None = None

    def __post_init__(self):
        if not self.density > 0:
            raise DomainError(f"{self.name}: density must be positive")
        if not -1.0 <= self.volume_susceptibility <= 0.0:
            raise DomainError(f"{self.name}: chi_V must lie in [-1, 0]")
        if self.poisson_ratio is not None and not 0.0 < self.poisson_ratio < 0.5:
            raise DomainError(f"{self.name}: poisson ratio must lie in (0, 0.5)")
        if not self.relative_permittivity >= 1.0:
            raise DomainError(f"{self.name}: eps_r must be >= 1")


SILICA = MaterialProps("silica", 2650.0, 3.9, -1.4e-5)
LEAD = MaterialProps("lead", 11340.0, math.inf, -1.0)
COPPER = MaterialProps("copper", 8960.0, math.inf, 0.0, youngs_modulus=110e9,
                       poisson_ratio=1.0 / 3.0, conductivity=1.5e10)
NIOBIUM = MaterialProps("niobium", 8582.0, math.inf, -1.0, youngs_modulus=105e9,
                        poisson_ratio=0.40, london_depth=40e-9)

MATERIALS = {m.name: m for m in (SILICA, LEAD, COPPER, NIOBIUM)}


def material(name: str) -> MaterialProps:
    try:
        return MATERIALS[name]
    except KeyError:
        raise UnsupportedMaterialError(f"unknown material {name!r}") from None


@dataclass(frozen=True)
class Geometry:
    half_separation: float = 20e-6
    particle_radius: float = 10e-6
    shield_thickness: float = 2e-6
    shield_radius: float = 1e-2
    theta_A: float = math.pi / 2
    theta_B: float = math.pi / 2

    def __post_init__(self):
        L, R, ds = self.half_separation, self.particle_radius, self.shield_thickness
        if not (L > 0 and R > 0 and ds > 0 and self.shield_radius > 0):
            raise GeometryError("lengths must be positive")
        if not L > R + ds / 2:
            raise GeometryError("particle surface touches the shield (L <= R + d_s/2)")

    @property
    def d0_casimir(self) -> float:
        return self.half_separation - self.particle_radius - self.shield_thickness / 2

    @property
    def d0_mag(self) -> float:
        return self.half_separation - self.shield_thickness / 2

    def with_theta(self, theta: float) -> "Geometry":
        return replace(self, theta_A=theta, theta_B=theta)


# Reference setup: both particles delocalized by 50 nm, shield 2 um thick and 1 cm wide.
TABLE1_GEOMETRY = Geometry()
TABLE1_DELTA_X = 50e-9
TABLE1_DELTA_Y = 1e-12
TABLE1_B_TRAP = 250e-6


def particle_mass(mat: MaterialProps, radius: float) -> float:
    return 4.0 / 3.0 * math.pi * radius**3 * mat.density


# Dielectric response samples chi(eps_r); only these points are supported.
_CHI_TABLE = {1.0: 0.46, 3.9: 0.5, math.inf: 1.0}


def phi_factor(eps_r: float) -> float:
    """Dielectric reduction of the perfect-conductor Casimir energy."""
    for key, chi in _CHI_TABLE.items():
        if eps_r == key:
            if math.isinf(eps_r):
                return chi
            return (eps_r - 1.0) / (eps_r + 1.0) * chi
    raise UnsupportedMaterialError(f"eps_r={eps_r} is not a tabulated dielectric point")


@dataclass(frozen=True)
class CouplingSet:
    lam: float
    eta: float
    delta: float
    dipole_moment: float
    d0_casimir: float
    d0_mag: float

    def __post_init__(self):
        if min(self.lam, self.eta, self.delta, self.dipole_moment) < 0:
            raise DomainError("coupling magnitudes must be non-negative")
        if not self.d0_casimir < self.d0_mag:
            raise GeometryError("expected d0_casimir < d0_mag")


def _check_positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise DomainError(f"{k} must be positive, got {v}")


def coupling_lambda(geom: Geometry, M_A: float, M_B: float) -> float:
    """Gravitational bilinear coupling G M_A M_B / (4 L^3)."""
    _check_positive(M_A=M_A, M_B=M_B, L=geom.half_separation)
    return G * M_A * M_B / (4.0 * geom.half_separation**3)


def casimir_prefactor(radius: float, eps_r: float) -> float:
    """K in V_PFA = -K/d^2 (sphere-plane proximity force approximation)."""
    return HBAR * C_LIGHT * math.pi**3 * radius * phi_factor(eps_r) / 720.0


def coupling_eta(geom: Geometry, mat: MaterialProps) -> float:
    d0 = geom.d0_casimir
    if not d0 > 0:
        raise GeometryError("d0 must be positive")
    return casimir_prefactor(geom.particle_radius, mat.relative_permittivity) / d0**4


def induced_dipole(radius: float, chi_v: float, B_ext: float) -> float:
    if B_ext < 0:
        raise DomainError("B_ext must be non-negative")
    return 4.0 * math.pi * radius**3 * abs(chi_v) * B_ext / (3.0 * MU0)


def mirror_dipole_prefactor(m: float) -> float:
    """C in V = -C/d^3 for a dipole normal to a perfect superconducting plane."""
    return 2.0 * MU0 * m**2 / (32.0 * math.pi)


def induced_dipole_and_delta(geom: Geometry, mat: MaterialProps, B_ext: float) -> tuple[float, float]:
    m = induced_dipole(geom.particle_radius, mat.volume_susceptibility, B_ext)
    return m, mirror_dipole_prefactor(m) / geom.d0_mag**5


def couplings(geom: Geometry, mat: MaterialProps, B_ext: float = 0.0,
              M_A: float | None = None, M_B: float | None = None) -> CouplingSet:
    M = particle_mass(mat, geom.particle_radius)
    lam = coupling_lambda(geom, M_A or M, M_B or M)
    m, delta = induced_dipole_and_delta(geom, mat, B_ext)
    return CouplingSet(lam, coupling_eta(geom, mat), delta, m, geom.d0_casimir, geom.d0_mag)


def time_unit(lam: float, dx_A: float, dx_B: float | None = None) -> float:
    """t0 = hbar / (lambda dx_A dx_B)."""
    dx_B = dx_A if dx_B is None else dx_B
    _check_positive(lam=lam, dx_A=dx_A, dx_B=dx_B)
    return HBAR / (lam * dx_A * dx_B)


def levitation_field(mat: MaterialProps, gradient: float) -> float:
    if mat.volume_susceptibility >= 0:
        raise UnsupportedMaterialError("diamagnetic levitation needs chi_V < 0")
    _check_positive(gradient=gradient)
    return G_EARTH * mat.density * MU0 / (abs(mat.volume_susceptibility) * gradient)


# --- local phase rates over +-dx ------------------------------------------------

def _power_law_difference(d0: float, dx: float, n: int) -> float:
    """(d0 - dx)^-n - (d0 + dx)^-n without cancellation."""
    a = math.expm1(-n * math.log1p(-dx / d0))
    b = math.expm1(-n * math.log1p(dx / d0))
    return (a - b) / d0**n


def casimir_phase_rate(geom: Geometry, mat: MaterialProps, dx: float) -> float:
    """|V(d0 - dx) - V(d0 + dx)| / hbar for the Casimir potential (rad/s)."""
    K = casimir_prefactor(geom.particle_radius, mat.relative_permittivity)
    return K * abs(_power_law_difference(geom.d0_casimir, dx, 2)) / HBAR


def magdipole_phase_rate(geom: Geometry, mat: MaterialProps, B_ext: float, dx: float) -> float:
    m = induced_dipole(geom.particle_radius, mat.volume_susceptibility, B_ext)
    C = mirror_dipole_prefactor(m)
    return C * abs(_power_law_difference(geom.d0_mag, dx, 3)) / HBAR


# --- entanglement rates of the unshielded interactions ---------------------------

def rate_gravity(M_A, M_B, dx_A, dx_B, L) -> float:
    return G * M_A * M_B * dx_A * dx_B / (2 * HBAR * LN2 * L**3)


def rate_casimir(radius, eps_r, dx_A, dx_B, L, transmission=1.0) -> float:
    f = 1.0 if math.isinf(eps_r) else (eps_r - 1) / (eps_r + 2)
    return (transmission**2 * 161 * C_LIGHT / (128 * math.pi * LN2)
            * radius**6 * dx_A * dx_B / L**9 * f**2)


def rate_coulomb(q_A, q_B, dx_A, dx_B, L, transmission=1.0) -> float:
    return transmission * abs(q_A * q_B) * dx_A * dx_B / (8 * math.pi * EPS0 * HBAR * LN2 * L**3)


def rate_elec_dipole(p_A, p_B, dx_A, dx_B, L, transmission=1.0) -> float:
    return (transmission**2 * 3 * abs(p_A * p_B) * dx_A * dx_B
            / (8 * math.pi * EPS0 * HBAR * LN2 * L**5))


def rate_mag_dipole(m_A, m_B, dx_A, dx_B, L) -> float:
    return 3 * MU0 * abs(m_A * m_B) * dx_A * dx_B / (8 * math.pi * HBAR * LN2 * L**5)


def transmission(conductivity: float, thickness: float) -> float:
    return 2.0 / (Z0 * conductivity * thickness)


def thickness_for_transmission(conductivity: float, T: float) -> float:
    return 2.0 / (Z0 * conductivity * T)


E_CM = E_CHARGE * 1e-2  # dipole unit e*cm in C*m


def shield_thickness_bound(kind: str, *, particle: MaterialProps = SILICA,
                           shield: MaterialProps = COPPER, geom: Geometry = TABLE1_GEOMETRY,
                           charge: float = E_CHARGE, dipole: float = 1e-2 * E_CM) -> float:
    """Smallest conductive thickness that pushes the shielded rate below gravity.

    Coulomb leakage is suppressed by T, Casimir and dipole leakage by T^2, with
    T = 2/(Z0 sigma d_s).  The delocalization cancels from the comparison.
    """
    if shield.conductivity is None:
        raise DomainError("shield conductivity unknown")
    L, R = geom.half_separation, geom.particle_radius
    M = particle_mass(particle, R)
    g = rate_gravity(M, M, 1.0, 1.0, L)
    if not g > 0:
        raise DomainError("gravitational rate vanishes")
    if kind == "coulomb":
        T = g / rate_coulomb(charge, charge, 1.0, 1.0, L)
    elif kind == "casimir":
        T = math.sqrt(g / rate_casimir(R, particle.relative_permittivity, 1.0, 1.0, L))
    elif kind == "elec_dipole":
        T = math.sqrt(g / rate_elec_dipole(dipole, dipole, 1.0, 1.0, L))
    else:
        raise DomainError(f"unknown interaction kind {kind!r}")
    return thickness_for_transmission(shield.conductivity, T)


_EXPONENTS = {"coulomb": 1, "elec_dipole": 3, "mag_dipole": 3, "casimir": 7}


def potential_ratio(kind: str, *, particle: MaterialProps = SILICA,
                    geom: Geometry = TABLE1_GEOMETRY, charge: float = E_CHARGE,
                    dipole: float = 1e-2 * E_CM, B_ext: float = TABLE1_B_TRAP) -> float:
    """kappa = |V_grav| / |V_other| at the center separation 2L."""
    L, R = geom.half_separation, geom.particle_radius
    r = 2 * L
    M = particle_mass(particle, R)
    v_grav = G * M * M / r
    if kind == "coulomb":
        v = charge**2 / (4 * math.pi * EPS0 * r)
    elif kind == "elec_dipole":
        v = 2 * dipole**2 / (4 * math.pi * EPS0 * r**3)
    elif kind == "mag_dipole":
        m = induced_dipole(R, particle.volume_susceptibility, B_ext)
        v = 2 * MU0 * m**2 / (4 * math.pi * r**3)
    elif kind == "casimir":
        eps = particle.relative_permittivity
        f = 1.0 if math.isinf(eps) else (eps - 1) / (eps + 2)
        v = 23 * HBAR * C_LIGHT * R**6 * f**2 / (4 * math.pi * r**7)
    else:
        raise DomainError(f"unknown interaction kind {kind!r}")
    return v_grav / v


def shield_radius_bound(d: int, kappa: float, L: float) -> float:
    """Radius so that the interaction leaking around the shield edge stays below gravity."""
    if d not in (1, 3, 7):
        raise DomainError("potential exponent must be 1, 3 or 7")
    if not 0 < kappa <= 1:
        raise DomainError("kappa must lie in (0, 1]")
    return L * math.sqrt(kappa ** (-2.0 / d) - 1.0)


def shield_radius_for(kind: str, **kw) -> float:
    geom = kw.get("geom", TABLE1_GEOMETRY)
    return shield_radius_bound(_EXPONENTS[kind], potential_ratio(kind, **kw), geom.half_separation)


def superconducting_thickness(london_depth: float, B_trap: float, B_target: float) -> float:
    _check_positive(london_depth=london_depth, B_trap=B_trap, B_target=B_target)
    if B_target >= B_trap:
        warnings.warn("target field not below trap field; no screening needed", stacklevel=2)
        return 0.0
    return london_depth * math.log(B_trap / B_target)


def max_external_field(mat: MaterialProps, geom: Geometry = TABLE1_GEOMETRY,
                       M_A: float | None = None, M_B: float | None = None) -> float:
    """Largest field for which the induced-dipole rate stays below the gravity rate."""
    L, R = geom.half_separation, geom.particle_radius
    M = particle_mass(mat, R)
    M_A, M_B = M_A or M, M_B or M
    chi = abs(mat.volume_susceptibility)
    if chi == 0:
        warnings.warn("no dipole response: field is unbounded", stacklevel=2)
        return math.inf
    # rate_mag_dipole(m, m) = rate_gravity  ->  m^2 = 4 pi G M_A M_B L^2 / (3 mu0)
    m_max = math.sqrt(4 * math.pi * G * M_A * M_B * L**2 / (3 * MU0))
    return 3 * MU0 * m_max / (4 * math.pi * R**3 * chi)


def external_gravity_phase_rate(dx: float, M: float, g_ext: float) -> float:
    if min(dx, M, g_ext) < 0:
        raise DomainError("inputs must be non-negative")
    return 2 * dx * M * g_ext / HBAR


def min_squeezing(L0: float, omega: float, en_min: float, tau: float, rho: float):
    """Required delocalization relative to the trap ground-state width.

    Returns (dx/x0, r, dB) with r = -ln(dx/x0) and dB = 20 |r| / ln 10.
    """
    _check_positive(L0=L0, omega=omega, tau=tau, rho=rho)
    if en_min < 0:
        raise DomainError("E_N,min must be non-negative")
    ratio = math.sqrt(3 * L0**3 * omega * en_min * LN2 / (G * math.pi * rho * tau))
    r = -math.log(ratio) if ratio > 0 else -math.inf
    return ratio, r, 20 * abs(r) / math.log(10)


def summary(geom: Geometry, mat: MaterialProps, B_ext: float, dx: float) -> dict:
    cs = couplings(geom, mat, B_ext)
    return {
        "lambda": cs.lam, "eta": cs.eta, "delta": cs.delta, "dipole_moment": cs.dipole_moment,
        "d0_casimir": cs.d0_casimir, "d0_mag": cs.d0_mag,
        "mass": particle_mass(mat, geom.particle_radius),
        "t0": time_unit(cs.lam, dx) if cs.lam > 0 else float("nan"),
    }
