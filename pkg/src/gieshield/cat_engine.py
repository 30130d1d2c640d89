"""Two-level cat states: analytic gravity evolution, noise averaging, shield channel.

Each particle sits in (|+dx> + |-dx>)/sqrt(2); the joint basis is ordered
|++>, |+->, |-+>, |-->.  All channels considered here are diagonal in that
basis, so every evolved state is the initial projector with its coherences
multiplied by phases and damping factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from .constants import HBAR
from .errors import ConfigError, DomainError, GeometryError, NumericError
from .hamiltonians import (NoiseDraw, ZERO_DRAW, _shield_expansion, _sign, _surface_expansion,
                           gravity_form, gravity_potential)
from .negativity import SmallDensityMatrix, log_negativity_density
from .params import CouplingSet

BRANCH_SIGNS = np.array([(1, 1), (1, -1), (-1, 1), (-1, -1)], dtype=float)
NOISE_FIELDS = ("shield_L", "shield_theta", "detA_L", "detA_theta", "detB_L", "detB_theta")
KINDS = {"casimir": 2, "magdipole": 3}

# d xi_{L,theta}(particle) / d field, mirroring NoiseDraw.xi_L / xi_theta
_CHAIN = {
    "shield_L": {"A": ("L", 1.0), "B": ("L", -1.0)},
    "shield_theta": {"A": ("T", 1.0), "B": ("T", 1.0)},
    "detA_L": {"A": ("L", 1.0)},
    "detA_theta": {"A": ("T", 1.0)},
    "detB_L": {"B": ("L", 1.0)},
    "detB_theta": {"B": ("T", 1.0)},
}


@dataclass(frozen=True)
class CatConfig:
    dx_A: float
    dx_B: float
    theta_A: float
    theta_B: float
    couplings: CouplingSet
    t: float = 0.0
    L: float = 20e-6
    kinds: tuple[str, ...] = ("casimir", "magdipole")

    def __post_init__(self):
        if not (self.dx_A > 0 and self.dx_B > 0):
            raise DomainError("superposition sizes must be positive")
        if self.t < 0:
            raise DomainError("evolution time must be non-negative")
        if not self.L > 0:
            raise GeometryError("half separation must be positive")
        bad = set(self.kinds) - set(KINDS)
        if bad:
            raise ConfigError(f"unknown interaction kinds {sorted(bad)}")

    def at(self, t: float) -> "CatConfig":
        return CatConfig(self.dx_A, self.dx_B, self.theta_A, self.theta_B, self.couplings,
                         t, self.L, self.kinds)

    def dx(self, particle: str) -> float:
        return self.dx_A if particle == "A" else self.dx_B

    def theta(self, particle: str) -> float:
        return self.theta_A if particle == "A" else self.theta_B

    def strength(self, kind: str) -> tuple[float, float]:
        c = self.couplings
        return (c.eta, c.d0_casimir) if kind == "casimir" else (c.delta, c.d0_mag)


def symmetric_config(dx: float, theta: float, couplings: CouplingSet, t: float = 0.0,
                     L: float = 20e-6, kinds=("casimir", "magdipole")) -> CatConfig:
    return CatConfig(dx, dx, theta, theta, couplings, t, L, tuple(kinds))


# --- gravity -------------------------------------------------------------------

def cat_phase(cfg: CatConfig) -> float:
    """Entangling phase rate lambda dxA dxB (2 sA sB - cA cB) / hbar (rad/s)."""
    lam = cfg.couplings.lam
    return lam * cfg.dx_A * cfg.dx_B * (2 * math.sin(cfg.theta_A) * math.sin(cfg.theta_B)
                                        - math.cos(cfg.theta_A) * math.cos(cfg.theta_B)) / HBAR


def branch_positions(cfg: CatConfig) -> np.ndarray:
    """(4, 2) array of x_A, x_B per branch."""
    return BRANCH_SIGNS * np.array([cfg.dx_A, cfg.dx_B])


def gravity_energies(cfg: CatConfig) -> np.ndarray:
    """Branch energies from the second-order gravity Hamiltonian (J)."""
    form = gravity_form(cfg.theta_A, cfg.theta_B, cfg.couplings.lam, cfg.L, with_y=False)
    out = np.empty(4)
    for i, (xa, xb) in enumerate(branch_positions(cfg)):
        out[i] = form.energy(np.array([xa, 0.0, xb, 0.0]))
    return out - out.mean()


def _phase_matrix(E: np.ndarray, t: float) -> np.ndarray:
    ph = np.asarray(E) * t / HBAR
    return np.exp(-1j * (ph[:, None] - ph[None, :]))


def _state(data: np.ndarray) -> SmallDensityMatrix:
    return SmallDensityMatrix(data, (2, 2))


def evolve_gravity(cfg: CatConfig, t: float | None = None, local_phases: bool = True) -> SmallDensityMatrix:
    t = cfg.t if t is None else t
    E = gravity_energies(cfg)
    if not local_phases:
        # keep only the entangling part E_i = A sA sB / 2
        s = BRANCH_SIGNS[:, 0] * BRANCH_SIGNS[:, 1]
        E = 0.25 * np.dot(E, s) * s
    return _state(0.25 * _phase_matrix(E, t))


def cat_log_negativity(phi_t) -> np.ndarray:
    """log2(1 + |sin(phi t)|)."""
    return np.log2(1.0 + np.abs(np.sin(phi_t)))


# --- first-order noise ---------------------------------------------------------

@dataclass(frozen=True)
class GammaSet:
    """Dephasing exponents keyed by (particle, kind, vary) with vary in {"L", "theta"}."""

    values: Mapping[tuple[str, str, str], float] = field(default_factory=dict)

    def __post_init__(self):
        for k, v in self.values.items():
            if not (v >= 0 and math.isfinite(v)):
                raise DomainError(f"gamma {k} must be finite and non-negative")
            if k[0] not in ("A", "B") or k[1] not in KINDS or k[2] not in ("L", "theta"):
                raise DomainError(f"bad gamma key {k}")

    def get(self, particle: str, kind: str, vary: str) -> float:
        return float(self.values.get((particle, kind, vary), 0.0))

    def total_sq(self, particle: str) -> float:
        return float(sum(v * v for k, v in self.values.items() if k[0] == particle))

    @staticmethod
    def symmetric(gamma: float, kind: str = "casimir", vary: str = "L") -> "GammaSet":
        return GammaSet({("A", kind, vary): gamma, ("B", kind, vary): gamma})


def gamma_factors(kind: str, vary: str, theta: float, dx: float, t: float, dxi: float,
                  couplings: CouplingSet) -> float:
    """Closed-form first-order dephasing exponent for one particle."""
    if dxi < 0 or dx <= 0 or t < 0:
        raise DomainError("need dx > 0, t >= 0, deviation >= 0")
    if kind == "casimir":
        k, lever, c_theta, c_L = couplings.eta, couplings.d0_casimir, math.sqrt(8), math.sqrt(72)
    elif kind == "magdipole":
        k, lever, c_theta, c_L = couplings.delta, couplings.d0_mag, math.sqrt(18), math.sqrt(288)
    else:
        raise DomainError(f"unknown kind {kind!r}")
    if vary == "theta":
        return abs(c_theta * lever * k * t * dx * dxi * math.cos(theta) / HBAR)
    if vary == "L":
        return abs(c_L * k * t * dx * dxi * math.sin(theta) / HBAR)
    raise DomainError("vary must be 'L' or 'theta'")


def gamma_set(cfg: CatConfig, deviations: Mapping[str, float], t: float | None = None) -> GammaSet:
    """GammaSet for per-detector (or per-field) deviations, using the closed forms.

    ``deviations`` uses the keys "L"/"theta" (applied to both particles) or
    NoiseDraw field names.
    """
    t = cfg.t if t is None else t
    vals = {}
    for p in ("A", "B"):
        for vary in ("L", "theta"):
            keys = (vary, f"det{p}_{vary}", f"shield_{vary}")
            dev = math.sqrt(sum(deviations.get(k, 0.0) ** 2 for k in keys))
            if dev == 0:
                continue
            for kind in cfg.kinds:
                g = gamma_factors(kind, vary, cfg.theta(p), cfg.dx(p), t, dev, cfg.couplings)
                if g > 0:
                    vals[(p, kind, vary)] = g
    return GammaSet(vals)


def _check_deviations(deviations: Mapping[str, float]):
    bad = set(deviations) - set(NOISE_FIELDS)
    if bad:
        raise ConfigError(f"unknown noise fields {sorted(bad)}")
    if any(v < 0 or not math.isfinite(v) for v in deviations.values()):
        raise DomainError("deviations must be finite and non-negative")


def noise_gradients(cfg: CatConfig) -> dict[str, np.ndarray]:
    """dE_i/d(field) for every noise field at first order (J per m or per rad)."""
    out = {}
    slopes = {}
    for p in ("A", "B"):
        sl = {"L": 0.0, "T": 0.0}
        for kind in cfg.kinds:
            strength, d0 = cfg.strength(kind)
            if strength == 0:
                continue
            table = _surface_expansion(KINDS[kind])(cfg.theta(p), d0, _sign(p))
            sl["L"] += strength * table[1, 1]
            sl["T"] += strength * table[1, 2]
        slopes[p] = sl
    xs = branch_positions(cfg)
    for f, chain in _CHAIN.items():
        grad = np.zeros(4)
        for p, (var, c) in chain.items():
            grad += c * slopes[p][var] * xs[:, 0 if p == "A" else 1]
        out[f] = grad
    return out


def damping_exponents(cfg: CatConfig, deviations: Mapping[str, float], t: float | None = None) -> np.ndarray:
    """Gaussian-average exponents Gamma_ij = 1/2 sum_f ((dE_i - dE_j)/d f * dev_f * t / hbar)^2."""
    _check_deviations(deviations)
    t = cfg.t if t is None else t
    grads = noise_gradients(cfg)
    G = np.zeros((4, 4))
    for f, dev in deviations.items():
        if dev == 0:
            continue
        a = grads[f] * dev * t / HBAR
        G += 0.5 * (a[:, None] - a[None, :]) ** 2
    return G


def averaged_state(cfg: CatConfig, deviations: Mapping[str, float], t: float | None = None) -> SmallDensityMatrix:
    """Quasi-static Gaussian average over any mix of shield and detector fields."""
    t = cfg.t if t is None else t
    rho = evolve_gravity(cfg, t).data * np.exp(-damping_exponents(cfg, deviations, t))
    return _state(rho)


def averaged_log_negativity(cfg: CatConfig, deviations: Mapping[str, float], t: float | None = None) -> float:
    return log_negativity_density(averaged_state(cfg, deviations, t))


def _detector_exponents(gA2: float, gB2: float) -> np.ndarray:
    s = BRANCH_SIGNS
    dA = (s[:, 0][:, None] != s[:, 0][None, :]).astype(float)
    dB = (s[:, 1][:, None] != s[:, 1][None, :]).astype(float)
    return gA2 * dA + gB2 * dB


def averaged_detector_variations(cfg: CatConfig, gammas: GammaSet,
                                 t: float | None = None) -> tuple[SmallDensityMatrix, float]:
    """Uncorrelated per-particle noise: coherences damped by exp(-gA^2) and exp(-gB^2) factors."""
    t = cfg.t if t is None else t
    G = _detector_exponents(gammas.total_sq("A"), gammas.total_sq("B"))
    rho = _state(evolve_gravity(cfg, t).data * np.exp(-G))
    return rho, log_negativity_density(rho)


def _shield_exponents(gammas: GammaSet) -> np.ndarray:
    G = np.zeros((4, 4))
    keys = {(k[1], k[2]) for k in gammas.values}
    for kind, vary in keys:
        a = gammas.get("A", kind, vary)
        b = gammas.get("B", kind, vary)
        # a shield shift moves the gaps oppositely, so its phase follows x_A + x_B;
        # a tilt follows x_A - x_B
        same, flip = ((a + b) ** 2, (a - b) ** 2) if vary == "L" else ((a - b) ** 2, (a + b) ** 2)
        E = np.zeros((4, 4))
        E[0, 1] = E[2, 3] = b * b
        E[0, 2] = E[1, 3] = a * a
        E[0, 3] = same
        E[1, 2] = flip
        G += E + E.T
    return G


def averaged_shield_variations(cfg: CatConfig, gammas: GammaSet,
                               t: float | None = None) -> tuple[SmallDensityMatrix, float]:
    """Noise of the shield itself, common to both particles.

    Each (kind, vary) pair contributes (gA + gB)^2 on one double-flip coherence
    and (gA - gB)^2 on the other; pairs are combined by adding exponents.
    """
    t = cfg.t if t is None else t
    rho = _state(evolve_gravity(cfg, t).data * np.exp(-_shield_exponents(gammas)))
    return rho, log_negativity_density(rho)


def detector_closed_form(gA2: float, gB2: float, phi_t: float) -> float:
    eA, eB = math.exp(-gA2), math.exp(-gB2)
    disc = eA * eA + eB * eB - 2 * eA * eB * math.cos(2 * phi_t)
    val = 0.5 * (1 + eA * eB + math.sqrt(max(disc, 0.0)))
    return max(0.0, math.log2(val))


def symmetric_detector_closed_form(g2: float, phi_t: float) -> float:
    return max(0.0, math.log2(math.exp(-g2) * (math.cosh(g2) + abs(math.sin(phi_t)))))


def symmetric_shield_closed_form(g2: float, phi_t: float) -> float:
    root = math.sqrt(4 * math.exp(2 * g2) * math.sin(phi_t) ** 2 + math.sinh(2 * g2) ** 2)
    val = 0.25 * (3 + math.exp(-4 * g2) + 2 * math.exp(-2 * g2) * root)
    return max(0.0, math.log2(val))


def monte_carlo_average(cfg: CatConfig, deviations: Mapping[str, float], n_draws: int = 100_000,
                        seed: int = 0, batches: int = 20, t: float | None = None) -> tuple[float, float]:
    """E_N of the sample-averaged state with first-order phases, and a batch standard error."""
    _check_deviations(deviations)
    t = cfg.t if t is None else t
    rng = np.random.default_rng(seed)
    grads = noise_gradients(cfg)
    fields = [f for f, v in deviations.items() if v > 0]
    base = evolve_gravity(cfg, t).data
    per = n_draws // batches
    if per < 1:
        raise DomainError("need at least one draw per batch")
    sums = []
    for _ in range(batches):
        xi = rng.standard_normal((per, len(fields))) * np.array([deviations[f] for f in fields])
        ph = xi @ np.array([grads[f] for f in fields]) * t / HBAR if fields else np.zeros((per, 4))
        z = np.exp(-1j * ph)
        sums.append(np.einsum("ni,nj->ij", z, z.conj()) / per)
    rho_b = [base * s for s in sums]
    en_b = np.array([log_negativity_density(r, (2, 2)) for r in rho_b])
    en = log_negativity_density(base * np.mean(sums, axis=0), (2, 2))
    return en, float(en_b.std(ddof=1) / math.sqrt(batches))


def critical_deviation(cfg: CatConfig, field_name: str, threshold: float = 1e-2,
                       lo: float = 1e-24, hi: float = 1.0, rtol: float = 1e-3,
                       model=None) -> float:
    """Deviation of one noise field at which E_N falls to ``threshold`` (log-space bisection).

    ``model(cfg, deviations) -> E_N`` defaults to the first-order Gaussian average.
    """
    if field_name not in NOISE_FIELDS:
        raise ConfigError(f"unknown noise field {field_name!r}")
    model = model or averaged_log_negativity
    f = lambda lg: model(cfg, {field_name: 10.0**lg}) - threshold
    a, b = math.log10(lo), math.log10(hi)
    fa, fb = f(a), f(b)
    if fa < 0:
        raise NumericError("entanglement already below threshold at the lower bracket")
    if fb > 0:
        raise NumericError("entanglement survives the upper bracket")
    while b - a > rtol / math.log(10):
        m = 0.5 * (a + b)
        if f(m) > 0:
            a = m
        else:
            b = m
    return 10.0 ** (0.5 * (a + b))


# --- exact potentials ----------------------------------------------------------

def _power_shift(d0: float, dd, n: int):
    """d^-n - d0^-n at d = d0 + dd without cancellation."""
    return np.expm1(-n * np.log1p(dd / d0)) / d0**n


def _gap_shift(s: float, theta: float, x, xi_L, xi_T):
    # x (sin(theta + e) - sin theta) = 2 x cos(theta + e/2) sin(e/2)
    return xi_L + s * x * 2 * np.cos(theta + 0.5 * xi_T) * np.sin(0.5 * xi_T)


def exact_branch_shifts(cfg: CatConfig, draws: Sequence[NoiseDraw]) -> np.ndarray:
    """Noise-induced branch energy shifts V(d(xi)) - V(d(0)) with unexpanded potentials, (N, 4)."""
    xs = branch_positions(cfg)
    out = np.zeros((len(draws), 4))
    for kind in cfg.kinds:
        strength, d0 = cfg.strength(kind)
        if strength == 0:
            continue
        n = KINDS[kind]
        pref = strength * d0 ** (n + 2)  # K or C in -K/d^n
        for p, col in (("A", 0), ("B", 1)):
            s, th = _sign(p), cfg.theta(p)
            gap0 = d0 + s * xs[:, col] * math.sin(th)
            if np.any(gap0 <= 0):
                raise GeometryError(f"branch of particle {p} touches the shield")
            xl = np.array([d.xi_L(p) for d in draws])[:, None]
            xt = np.array([d.xi_theta(p) for d in draws])[:, None]
            dd = _gap_shift(s, th, xs[None, :, col], xl, xt)
            if np.any(gap0[None, :] + dd <= 0):
                raise GeometryError(f"noise draw pushes particle {p} into the shield")
            out += -pref * _power_shift(gap0[None, :], dd, n)
    return out


def exact_gravity_energies(cfg: CatConfig) -> np.ndarray:
    xs = branch_positions(cfg)
    lam = cfg.couplings.lam
    E = np.array([gravity_potential(xa, 0.0, xb, 0.0, cfg.theta_A, cfg.theta_B, cfg.L, lam)
                  for xa, xb in xs])
    return E - E.mean()


def exact_potential_state(cfg: CatConfig, deviations: Mapping[str, float], order: int = 16,
                          t: float | None = None) -> SmallDensityMatrix:
    """Quadrature-averaged state with unexpanded potentials evaluated at the four branch positions.

    Noise-free surface energies only add local phases and are left out.
    """
    from .gaussian_engine import gauss_hermite_grid

    _check_deviations(deviations)
    t = cfg.t if t is None else t
    fields = [f for f, v in deviations.items() if v > 0]
    if len(fields) > 4:
        raise ConfigError("at most four simultaneous noise fields for tensor quadrature")
    nodes, w = gauss_hermite_grid(len(fields), order)
    draws = [NoiseDraw(**{f: float(x) * deviations[f] for f, x in zip(fields, row)}) for row in nodes]
    shifts = exact_branch_shifts(cfg, draws) if fields else np.zeros((1, 4))
    z = np.exp(-1j * shifts * t / HBAR)
    avg = np.einsum("n,ni,nj->ij", w, z, z.conj())
    rho = 0.25 * _phase_matrix(exact_gravity_energies(cfg), t) * avg
    return _state(rho)


def exact_potential_dephasing(cfg: CatConfig, deviations: Mapping[str, float], order: int = 16,
                              t: float | None = None) -> float:
    return log_negativity_density(exact_potential_state(cfg, deviations, order, t))


def exact_cat_phase(cfg: CatConfig) -> float:
    """Entangling phase rate from the unexpanded gravitational potential (rad/s)."""
    E = exact_gravity_energies(cfg)
    return (E[0] - E[1] - E[2] + E[3]) / (2 * HBAR)


# --- thermally populated shield modes ----------------------------------------------

def shield_couplings(cfg: CatConfig, modes, kinds: Sequence[str] | None = None) -> np.ndarray:
    """Branch couplings g_j (J) for every mode, shape (modes, 4); H_int = sum g_j |j><j| (a + a^+)."""
    kinds = cfg.kinds if kinds is None else tuple(kinds)
    out = np.zeros((len(modes), 4))
    for m, mode in enumerate(modes):
        for kind in kinds:
            strength, d0 = cfg.strength(kind)
            if strength == 0:
                continue
            exp = _shield_expansion(KINDS[kind])
            cA = strength * exp(cfg.theta_A, d0, _sign("A"), mode.u0, mode.du)["xq"]
            cB = strength * exp(cfg.theta_B, d0, _sign("B"), mode.u0, mode.du)["xq"]
            out[m] += mode.q_zpf * (cA * cfg.dx_A * BRANCH_SIGNS[:, 0] + cB * cfg.dx_B * BRANCH_SIGNS[:, 1])
    return out


def thermal_shield_series(cfg: CatConfig, modes, times, T: float | None = None,
                          g: np.ndarray | None = None, gravity: bool = True) -> list[SmallDensityMatrix]:
    """States at every time under gravity plus linearly coupled shield modes.

    Modes are re-thermalized at ``T`` when given; ``g`` overrides the computed couplings (J).
    """
    from . import _kernels
    from .shield_modes import at_temperature

    if T is not None:
        if T < 0:
            raise DomainError("temperature must be non-negative")
        modes = [at_temperature(m, T) for m in modes]
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise DomainError("times must be non-negative")
    g = shield_couplings(cfg, modes) if g is None else np.asarray(g, dtype=float)
    if g.shape != (len(modes), 4):
        raise DomainError(f"coupling array must have shape ({len(modes)}, 4)")
    omegas = np.array([m.omega for m in modes], dtype=float)
    nbar = np.array([m.nbar for m in modes], dtype=float)
    gam, ph = _kernels.shield_decoherence(g / HBAR, omegas, nbar, times)
    E = gravity_energies(cfg) if gravity else np.zeros(4)
    out = []
    for k, t in enumerate(times):
        rho = 0.25 * _phase_matrix(E, t) * np.exp(-gam[k] + 1j * ph[k])
        out.append(_state(rho))
    return out


def evolve_with_thermal_shield(cfg: CatConfig, modes, T: float | None = None, t: float | None = None,
                               g: np.ndarray | None = None, gravity: bool = True) -> SmallDensityMatrix:
    t = cfg.t if t is None else t
    return thermal_shield_series(cfg, modes, [t], T, g, gravity)[0]


def log_negativity_series(states: Sequence[SmallDensityMatrix]) -> np.ndarray:
    return np.array([log_negativity_density(s) for s in states])


def decoherence_product(cfg: CatConfig, modes, times, g: np.ndarray | None = None) -> np.ndarray:
    """Smallest coherence magnitude relative to its initial value under the shield channel alone."""
    states = thermal_shield_series(cfg, modes, times, g=g, gravity=False)
    off = ~np.eye(4, dtype=bool)
    return np.array([4 * np.min(np.abs(s.data[off])) for s in states])

