"""Quadratic Hamiltonians over labeled modes.

Geometry: particle A sits at +L, particle B at -L, the shield mid-plane at 0.
Each particle's local coordinates (x, y) map to the lab frame as
x' = +-L + x sin(theta) - y cos(theta) and y' = x cos(theta) + y sin(theta), so
theta = pi/2 is the linear orientation (x along the inter-particle axis) and
theta = 0 the parallel one.  The particle-shield gap of particle i is

    d_i = d0 + xi_L_i + s_i [x_i sin(theta + xi_th_i) - y_i cos(theta + xi_th_i)]

with s_A = +1, s_B = -1.  A shield displacement q u(r) reduces d_A and
increases d_B.  Series coefficients come from symbolic expansion of the exact
potentials (done once, cached) instead of hand-copied tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import CompositionError, DomainError, GeometryError

PARTICLE_MODES = ("xA", "yA", "xB", "yB")
ORIENTATIONS = {"parallel": 0.0, "linear": math.pi / 2}


def orientation_angle(orientation: str | float) -> float:
    if isinstance(orientation, str):
        try:
            return ORIENTATIONS[orientation]
        except KeyError:
            raise DomainError(f"unknown orientation {orientation!r}") from None
    return float(orientation)


def shield_label(k: int, l: int) -> str:
    return f"q{k}_{l}"


def particle_modes(particle: str, with_y: bool = True) -> tuple[str, ...]:
    return (f"x{particle}", f"y{particle}") if with_y else (f"x{particle}",)


# --- QuadraticForm ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """H = 1/2 r^T G r + g^T r + c with r = (x_1, p_1, x_2, p_2, ...) in SI units."""

    modes: tuple[str, ...]
    G: np.ndarray
    g: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        modes = tuple(self.modes)
        if len(set(modes)) != len(modes):
            raise CompositionError(f"duplicate mode labels in {modes}")
        n = 2 * len(modes)
        G = np.array(self.G, dtype=float).reshape(n, n)
        g = np.array(self.g, dtype=float).reshape(n)
        scale = np.max(np.abs(G)) if G.size else 0.0
        if G.size and np.max(np.abs(G - G.T)) > 1e-12 * max(scale, 1e-300):
            raise CompositionError("G must be symmetric")
        G = 0.5 * (G + G.T)
        G.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "c", float(self.c))

    @classmethod
    def zero(cls, modes: Sequence[str]) -> "QuadraticForm":
        n = 2 * len(modes)
        return cls(tuple(modes), np.zeros((n, n)), np.zeros(n), 0.0)

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def index(self, mode: str, quad: str = "x") -> int:
        return 2 * self.modes.index(mode) + (0 if quad == "x" else 1)

    def embed(self, modes: Sequence[str]) -> "QuadraticForm":
        modes = tuple(modes)
        missing = [m for m in self.modes if m not in modes]
        if missing:
            raise CompositionError(f"modes {missing} absent from target ordering")
        idx = np.array([2 * modes.index(m) + j for m in self.modes for j in (0, 1)], dtype=int)
        n = 2 * len(modes)
        G = np.zeros((n, n))
        g = np.zeros(n)
        G[np.ix_(idx, idx)] = self.G
        g[idx] = self.g
        return QuadraticForm(modes, G, g, self.c)

    def restrict(self, modes: Sequence[str]) -> "QuadraticForm":
        """Drop modes not listed (their quadratures are set to zero)."""
        modes = tuple(m for m in modes if m in self.modes)
        idx = np.array([2 * self.modes.index(m) + j for m in modes for j in (0, 1)], dtype=int)
        return QuadraticForm(modes, self.G[np.ix_(idx, idx)], self.g[idx], self.c)

    def energy(self, r: np.ndarray) -> float:
        r = np.asarray(r, dtype=float)
        return float(0.5 * r @ self.G @ r + self.g @ r + self.c)

    def coefficient(self, a: str, b: str | None = None, qa: str = "x", qb: str = "x") -> float:
        """Coefficient of the monomial a*b (or the linear term of a) as written in H."""
        i = self.index(a, qa)
        if b is None:
            return float(self.g[i])
        j = self.index(b, qb)
        return float(self.G[i, j] if i != j else 0.5 * self.G[i, i])

    def __add__(self, other: "QuadraticForm") -> "QuadraticForm":
        return assemble([self, other])

    def allclose(self, other: "QuadraticForm", rtol=1e-12, atol=0.0) -> bool:
        if set(self.modes) != set(other.modes):
            return False
        o = other.embed(self.modes)
        scale = max(np.max(np.abs(self.G), initial=0.0), np.max(np.abs(o.G), initial=0.0))
        gscale = max(np.max(np.abs(self.g), initial=0.0), np.max(np.abs(o.g), initial=0.0))
        return (np.allclose(self.G, o.G, rtol=0, atol=atol + rtol * scale)
                and np.allclose(self.g, o.g, rtol=0, atol=atol + rtol * gscale)
                and math.isclose(self.c, o.c, rel_tol=rtol, abs_tol=atol + 1e-300))


def assemble(forms: Sequence[QuadraticForm], modes: Sequence[str] | None = None) -> QuadraticForm:
    """Mode-aligned sum.  The union ordering follows PARTICLE_MODES then sorted shield labels."""
    forms = list(forms)
    if modes is None:
        union = {m for f in forms for m in f.modes}
        modes = canonical_order(union)
    total = QuadraticForm.zero(modes)
    G = np.zeros_like(total.G)
    g = np.zeros_like(total.g)
    c = 0.0
    for f in forms:
        e = f.embed(modes)
        G += e.G
        g += e.g
        c += e.c
    return QuadraticForm(tuple(modes), G, g, c)


def _shield_key(label: str):
    k, l = label[1:].split("_")
    return int(k), int(l)


def canonical_order(labels) -> tuple[str, ...]:
    labels = set(labels)
    head = [m for m in PARTICLE_MODES if m in labels]
    rest = sorted((m for m in labels if m not in PARTICLE_MODES), key=_shield_key)
    return tuple(head + rest)


def _form_from_monomials(modes: tuple[str, ...], lin: dict, quad: dict, c: float = 0.0) -> QuadraticForm:
    """Build a position-only form from {mode: coeff} and {(m1, m2): coeff} (m1 <= m2 in H)."""
    n = 2 * len(modes)
    G = np.zeros((n, n))
    g = np.zeros(n)
    for m, v in lin.items():
        g[2 * modes.index(m)] += v
    for (a, b), v in quad.items():
        i, j = 2 * modes.index(a), 2 * modes.index(b)
        if i == j:
            G[i, i] += 2 * v
        else:
            G[i, j] += v
            G[j, i] += v
    return QuadraticForm(modes, G, g, c)


# --- noise draws ------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseDraw:
    """One realization of the quasi-static parameter noise.

    Shield displacement moves the two gaps in opposite directions and the shield
    tilt enters both angles equally; detector offsets act on one particle only.
    """

    shield_L: float = 0.0
    shield_theta: float = 0.0
    detA_L: float = 0.0
    detA_theta: float = 0.0
    detB_L: float = 0.0
    detB_theta: float = 0.0
    trap_A: float = 0.0
    trap_B: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.__dict__.values()):
            raise DomainError("noise values must be finite")

    def xi_L(self, particle: str) -> float:
        if particle == "A":
            return self.shield_L + self.detA_L
        return -self.shield_L + self.detB_L

    def xi_theta(self, particle: str) -> float:
        det = self.detA_theta if particle == "A" else self.detB_theta
        return self.shield_theta + det

    def trap_force(self, particle: str) -> float:
        return self.trap_A if particle == "A" else self.trap_B

    @property
    def tag(self) -> str:
        shield = self.shield_L != 0 or self.shield_theta != 0
        det = any(v != 0 for v in (self.detA_L, self.detA_theta, self.detB_L, self.detB_theta))
        if shield and det:
            return "mixed"
        return "shield_correlated" if shield else "detector_uncorrelated"

    @staticmethod
    def from_mapping(values: dict) -> "NoiseDraw":
        return NoiseDraw(**values)


ZERO_DRAW = NoiseDraw()


def _sign(particle: str) -> float:
    if particle not in ("A", "B"):
        raise DomainError(f"particle must be 'A' or 'B', got {particle!r}")
    return 1.0 if particle == "A" else -1.0


# --- symbolic expansions ------------------------------------------------------------

POS_MONOMIALS = ("1", "x", "y", "xx", "xy", "yy")
NOISE_MONOMIALS = ("1", "L", "T", "LL", "LT", "TT")


@lru_cache(maxsize=None)
def _surface_expansion(n: int) -> Callable:
    """Coefficients of -d0^2 (d/d0)^-n, second order in (x, y) and in (xi_L, xi_theta).

    The result multiplies eta (n=2, PFA) or delta (n=3, mirror dipole).  Returns a
    callable (theta, d0, s) -> 6x6 array indexed [position monomial, noise monomial].
    """
    import sympy as sp

    x, y, eL, eT, th, d0, s = sp.symbols("x y eL eT theta d0 s", real=True)
    sn = sp.sin(th) * (1 - eT**2 / 2) + sp.cos(th) * eT
    cs = sp.cos(th) * (1 - eT**2 / 2) - sp.sin(th) * eT
    z = (eL + s * (x * sn - y * cs)) / d0
    series = sum(sp.binomial(-n, k) * z**k for k in range(5))
    poly = sp.Poly(sp.expand(-d0**2 * series), x, y, eL, eT)
    pos_idx = {(0, 0): 0, (1, 0): 1, (0, 1): 2, (2, 0): 3, (1, 1): 4, (0, 2): 5}
    noi_idx = {(0, 0): 0, (1, 0): 1, (0, 1): 2, (2, 0): 3, (1, 1): 4, (0, 2): 5}
    table = [[sp.Integer(0)] * 6 for _ in range(6)]
    for (px, py, pl, pt), coeff in poly.terms():
        if (px, py) in pos_idx and (pl, pt) in noi_idx:
            table[pos_idx[(px, py)]][noi_idx[(pl, pt)]] += coeff
    table = [[sp.simplify(sp.expand(c.subs(s**2, 1))) for c in row] for row in table]
    fn = sp.lambdify((th, d0, s), table, "math")
    return lambda theta, d0_val, sign: np.array(fn(theta, d0_val, sign), dtype=float)


@lru_cache(maxsize=None)
def surface_expansion_symbolic(n: int):
    """Symbolic coefficient table for documentation and tests."""
    import sympy as sp

    x, y, eL, eT, th, d0, s = sp.symbols("x y eL eT theta d0 s", real=True)
    sn = sp.sin(th) * (1 - eT**2 / 2) + sp.cos(th) * eT
    cs = sp.cos(th) * (1 - eT**2 / 2) - sp.sin(th) * eT
    z = (eL + s * (x * sn - y * cs)) / d0
    expr = sp.expand(-d0**2 * sum(sp.binomial(-n, k) * z**k for k in range(5)))
    return expr, (x, y, eL, eT, th, d0, s)


@lru_cache(maxsize=None)
def _shield_expansion(n: int) -> Callable:
    """q-dependent terms of -d0^2 (d/d0)^-n with w = q (u0 + du y'), second order in (x, y, q)."""
    import sympy as sp

    x, y, q, th, d0, s, u0, du = sp.symbols("x y q theta d0 s u0 du", real=True)
    a = x * sp.sin(th) - y * sp.cos(th)
    yp = x * sp.cos(th) + y * sp.sin(th)
    z = s * (a - q * (u0 + du * yp)) / d0
    expr = sp.expand(-d0**2 * sum(sp.binomial(-n, k) * z**k for k in range(3)))
    poly = sp.Poly(expr, x, y, q)
    keys = {(0, 0, 1): "q", (0, 0, 2): "qq", (1, 0, 1): "xq", (0, 1, 1): "yq"}
    out = {k: sp.Integer(0) for k in keys.values()}
    for mon, coeff in poly.terms():
        if mon in keys:
            out[keys[mon]] += coeff
    names = tuple(out)
    fns = {k: sp.lambdify((th, d0, s, u0, du), sp.simplify(out[k].subs(s**2, 1)), "math") for k in names}
    return lambda theta, d0v, sign, u0v, duv: {k: float(f(theta, d0v, sign, u0v, duv)) for k, f in fns.items()}


@lru_cache(maxsize=None)
def _gravity_expansion() -> Callable:
    """Second-order expansion of -G M^2/|r_A - r_B| in units of lambda = G M^2/(4 L^3)."""
    import sympy as sp

    xA, yA, xB, yB, tA, tB, L = sp.symbols("xA yA xB yB tA tB L", real=True)
    rAx = L + xA * sp.sin(tA) - yA * sp.cos(tA)
    rAy = xA * sp.cos(tA) + yA * sp.sin(tA)
    rBx = -L + xB * sp.sin(tB) - yB * sp.cos(tB)
    rBy = xB * sp.cos(tB) + yB * sp.sin(tB)
    dist = sp.sqrt((rAx - rBx) ** 2 + (rAy - rBy) ** 2)
    expr = -4 * L**3 / dist
    q = (xA, yA, xB, yB)
    at0 = {v: 0 for v in q}
    # Taylor coefficients from derivatives at the origin (much faster than series + simplify)
    lin = {PARTICLE_MODES[i]: sp.diff(expr, q[i]).subs(at0) for i in range(4)}
    quad = {}
    for i in range(4):
        for j in range(i, 4):
            c = sp.diff(expr, q[i], q[j]).subs(at0)
            quad[(PARTICLE_MODES[i], PARTICLE_MODES[j])] = c / 2 if i == j else c
    lin_f = {k: sp.lambdify((tA, tB, L), v, "math") for k, v in lin.items()}
    quad_f = {k: sp.lambdify((tA, tB, L), v, "math") for k, v in quad.items()}
    return lambda a, b, Lv: ({k: float(f(a, b, Lv)) for k, f in lin_f.items()},
                             {k: float(f(a, b, Lv)) for k, f in quad_f.items()})


# --- exact potentials (used by finite-difference checks and exact cat phases) ------

def pfa_potential(d, K: float):
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise GeometryError("particle surface touches the shield")
    return -K / d**2


def mirror_dipole_potential(d, C: float):
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise GeometryError("dipole center inside the shield")
    return -C / d**3


def surface_gap(particle: str, theta: float, d0: float, x: float, y: float,
                xi_L: float = 0.0, xi_theta: float = 0.0) -> float:
    s = _sign(particle)
    return d0 + xi_L + s * (x * math.sin(theta + xi_theta) - y * math.cos(theta + xi_theta))


def gravity_potential(xA, yA, xB, yB, thA, thB, L, lam):
    """Exact -G M_A M_B/r written through lambda = G M_A M_B/(4 L^3)."""
    rx = 2 * L + xA * np.sin(thA) - yA * np.cos(thA) - xB * np.sin(thB) + yB * np.cos(thB)
    ry = xA * np.cos(thA) + yA * np.sin(thA) - xB * np.cos(thB) - yB * np.sin(thB)
    return -4 * lam * L**3 / np.hypot(rx, ry)


# --- builders -------------------------------------------------------------------------

def gravity_form(theta_A: float, theta_B: float, lam: float, L: float,
                 with_y: bool = True) -> QuadraticForm:
    """Second-order gravitational Hamiltonian (constant term dropped)."""
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    lin, quad = _gravity_expansion()(theta_A, theta_B, L)
    modes = PARTICLE_MODES if with_y else ("xA", "xB")
    lin = {k: lam * v for k, v in lin.items() if k in modes}
    quad = {k: lam * v for k, v in quad.items() if k[0] in modes and k[1] in modes}
    return _form_from_monomials(modes, lin, quad)


def _surface_form(n: int, particle: str, orientation, strength: float, d0: float,
                  draw: NoiseDraw, with_y: bool) -> QuadraticForm:
    if not d0 > 0:
        raise GeometryError("d0 must be positive")
    if strength < 0:
        raise DomainError("coupling strength must be non-negative")
    theta = orientation_angle(orientation)
    s = _sign(particle)
    table = _surface_expansion(n)(theta, d0, s)
    xl, xt = draw.xi_L(particle), draw.xi_theta(particle)
    noise = np.array([1.0, xl, xt, xl * xl, xl * xt, xt * xt])
    c = strength * table @ noise
    mx, my = particle_modes(particle, True)
    lin = {mx: c[1]}
    quad = {(mx, mx): c[3]}
    modes = (mx,)
    if with_y:
        modes = (mx, my)
        lin[my] = c[2]
        quad[(mx, my)] = c[4]
        quad[(my, my)] = c[5]
    return _form_from_monomials(modes, lin, quad, c[0])


def casimir_form(particle: str, orientation, eta: float, d0: float,
                 draw: NoiseDraw = ZERO_DRAW, with_y: bool = True) -> QuadraticForm:
    """PFA particle-shield potential, second order in positions and noise."""
    return _surface_form(2, particle, orientation, eta, d0, draw, with_y)


def magdipole_form(particle: str, orientation, delta: float, d0: float,
                   draw: NoiseDraw = ZERO_DRAW, with_y: bool = True) -> QuadraticForm:
    """Mirror-dipole particle-shield potential, second order in positions and noise."""
    return _surface_form(3, particle, orientation, delta, d0, draw, with_y)


def kinetic_form(M: float, modes: Sequence[str]) -> QuadraticForm:
    n = len(modes)
    G = np.zeros((2 * n, 2 * n))
    for i in range(n):
        G[2 * i + 1, 2 * i + 1] = 1.0 / M
    return QuadraticForm(tuple(modes), G, np.zeros(2 * n))


@dataclass(frozen=True, eq=False)
class TrapForm:
    form: QuadraticForm
    spring: float
    forces: dict = field(default_factory=dict)

    def equilibrium_shift(self, particle: str) -> float:
        if self.spring == 0:
            raise DomainError("no restoring force")
        return self.forces.get(particle, 0.0) / self.spring


def trap_form(omega: float, M: float, draw: NoiseDraw = ZERO_DRAW,
              particles: Sequence[str] = ("A", "B")) -> TrapForm:
    """1/2 M w^2 x_i^2 + xi_i x_i for the listed particles."""
    if omega < 0:
        raise DomainError("trap frequency must be non-negative")
    k = M * omega**2
    forces = {p: draw.trap_force(p) for p in particles}
    if k == 0 and any(v != 0 for v in forces.values()):
        raise DomainError("static force without restoring trap")
    modes = tuple(f"x{p}" for p in particles)
    lin = {f"x{p}": forces[p] for p in particles}
    quad = {(f"x{p}", f"x{p}"): 0.5 * k for p in particles}
    return TrapForm(_form_from_monomials(modes, lin, quad), k, forces)


def oscillator_form(label: str, m_eff: float, omega: float) -> QuadraticForm:
    G = np.diag([m_eff * omega**2, 1.0 / m_eff])
    return QuadraticForm((label,), G, np.zeros(2))


def shield_coupling_form(mode, kind: str, orientation, strength: float, d0: float,
                         particles: Sequence[str] = ("A", "B"), with_y: bool = True,
                         dx_hint: float | None = None) -> QuadraticForm:
    """q-dependent terms of the particle-shield potential for one plate mode.

    ``mode`` needs attributes k, l, u0, du.  Only terms containing q are
    returned; the particle-only terms come from casimir_form/magdipole_form.
    """
    n = {"casimir": 2, "magdipole": 3}.get(kind)
    if n is None:
        raise DomainError(f"unknown coupling kind {kind!r}")
    if dx_hint is not None and abs(dx_hint * mode.du) > 0.1:
        import warnings

        warnings.warn("linearized mode profile questionable: |dx du| > 0.1", stacklevel=2)
    theta = orientation_angle(orientation)
    qlab = shield_label(mode.k, mode.l)
    modes = [qlab]
    lin, quad = {}, {}
    for p in particles:
        co = _shield_expansion(n)(theta, d0, _sign(p), mode.u0, mode.du)
        mx, my = particle_modes(p, True)
        modes += [mx, my] if with_y else [mx]
        lin[qlab] = lin.get(qlab, 0.0) + strength * co["q"]
        quad[(qlab, qlab)] = quad.get((qlab, qlab), 0.0) + strength * co["qq"]
        quad[(mx, qlab)] = strength * co["xq"]
        if with_y:
            quad[(my, qlab)] = strength * co["yq"]
    return _form_from_monomials(canonical_order(modes), lin, quad)
