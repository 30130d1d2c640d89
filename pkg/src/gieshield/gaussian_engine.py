"""Gaussian-state propagation, quasi-static averaging and Markovian diffusion.

Quadratures are stored dimensionless per mode, x = x0 X and p = (hbar/x0) P, so the
equations of motion read r' = K r + b with K = Omega G_hat, G_hat = T G T / hbar.

States are propagated in a local interaction frame: the single-mode (block-diagonal)
part K0 of a reference Hamiltonian and its affine drive are removed analytically.
Local symplectic maps leave the logarithmic negativity unchanged, and the frame keeps
covariance entries of order one even when the lab-frame momenta grow to 1e10 or more.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.linalg import expm

from . import _kernels
from .constants import HBAR
from .errors import ConfigError, DomainError, NumericError, StateError
from .hamiltonians import PARTICLE_MODES, NoiseDraw, QuadraticForm, ZERO_DRAW
from .negativity import log_negativity_gaussian, omega, symplectic_spectrum

NOISE_FIELDS = ("shield_L", "shield_theta", "detA_L", "detA_theta", "detB_L", "detB_theta",
                "trap_A", "trap_B")
TRAP_FIELDS = ("trap_A", "trap_B")
PHYS_TOL = 1e-9
STEP_TOL = 1e-9


# --- frames and states -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Frame:
    """Local affine map r_lab = R r_I + offset at one instant (R block-diagonal by party)."""

    R: np.ndarray
    offset: np.ndarray

    def to_lab(self, d: np.ndarray, sigma: np.ndarray):
        return self.R @ d + self.offset, self.R @ sigma @ self.R.T


@dataclass(frozen=True, eq=False)
class GaussianState:
    """First moments d and covariance sigma of dimensionless quadratures.

    ``scales`` holds x0 (m) per mode.  When ``frame`` is set the moments live in
    that local interaction frame; ``lab()`` maps them back.
    """

    modes: tuple[str, ...]
    d: np.ndarray
    sigma: np.ndarray
    scales: np.ndarray
    t: float = 0.0
    frame: Frame | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = 2 * len(self.modes)
        d = np.array(self.d, dtype=float).reshape(n)
        s = np.array(self.sigma, dtype=float).reshape(n, n)
        s = 0.5 * (s + s.T)
        sc = np.array(self.scales, dtype=float).reshape(len(self.modes))
        if np.any(sc <= 0):
            raise StateError("mode scales must be positive")
        for a in (d, s, sc):
            a.setflags(write=False)
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "scales", sc)

    @property
    def V(self) -> np.ndarray:
        return self.sigma + np.outer(self.d, self.d)

    def lab(self) -> "GaussianState":
        if self.frame is None:
            return self
        d, s = self.frame.to_lab(self.d, self.sigma)
        return GaussianState(self.modes, d, s, self.scales, self.t, None, dict(self.meta))

    def si_covariance(self) -> np.ndarray:
        """Lab-frame covariance in SI units (m, kg m/s)."""
        lab = self.lab()
        T = np.diag(_scale_vector(self.scales))
        return T @ lab.sigma @ T

    def symplectic_eigenvalues(self) -> np.ndarray:
        return symplectic_spectrum(self.sigma)

    def is_physical(self, tol: float = PHYS_TOL) -> bool:
        return bool(np.min(self.symplectic_eigenvalues()) >= 0.5 - tol)

    def log_negativity(self, party: Sequence[str] | str = "A") -> float:
        return log_negativity_gaussian(self.sigma, _partition(self.modes, party))

    def purity_determinant(self) -> float:
        """det(2 sigma); equals 1 for pure states."""
        return float(np.linalg.det(2 * self.sigma))

    def reduced(self, modes: Sequence[str]) -> "GaussianState":
        """Marginal on ``modes`` (partial trace = dropping rows and columns)."""
        missing = [m for m in modes if m not in self.modes]
        if missing:
            raise StateError(f"modes {missing} not in state")
        idx = np.array([2 * self.modes.index(m) + j for m in modes for j in (0, 1)], dtype=int)
        rest = np.setdiff1d(np.arange(2 * len(self.modes)), idx)
        src, frame = self, None
        if self.frame is not None:
            R = self.frame.R
            if np.any(R[np.ix_(idx, rest)]) or np.any(R[np.ix_(rest, idx)]):
                src = self.lab()
            else:
                frame = Frame(R[np.ix_(idx, idx)], self.frame.offset[idx])
        sc = np.array([self.scales[self.modes.index(m)] for m in modes])
        return GaussianState(tuple(modes), src.d[idx], src.sigma[np.ix_(idx, idx)], sc, self.t,
                             frame, dict(self.meta))

    def particle_log_negativity(self) -> float:
        """A|B negativity after tracing out every non-particle mode."""
        keep = [m for m in self.modes if m in PARTICLE_MODES]
        return self.reduced(keep).log_negativity("A")


def _partition(modes: Sequence[str], party) -> list[int]:
    if isinstance(party, str):
        idx = [i for i, m in enumerate(modes) if m.endswith(party)]
    else:
        idx = [modes.index(m) for m in party]
    if not idx:
        raise StateError(f"no modes for party {party!r}")
    return idx


def _scale_vector(scales: np.ndarray) -> np.ndarray:
    out = np.empty(2 * len(scales))
    out[0::2] = scales
    out[1::2] = HBAR / scales
    return out


def initial_state(widths: Mapping[str, float], nbar: float | Mapping[str, float] = 0.0,
                  modes: Sequence[str] | None = None) -> GaussianState:
    """Thermal squeezed product state with position spread ``widths[mode]``.

    sigma = (1 + 2 nbar) diag(dx^2, hbar^2/(4 dx^2)) per mode; with x0 = dx this is
    diag(1, 1/4) in the stored units.
    """
    modes = tuple(modes) if modes is not None else tuple(widths)
    sig = np.zeros((2 * len(modes), 2 * len(modes)))
    scales = []
    for i, m in enumerate(modes):
        w = widths[m]
        if not w > 0:
            raise StateError(f"width of {m} must be positive")
        nb = nbar.get(m, 0.0) if isinstance(nbar, Mapping) else nbar
        if nb < 0:
            raise StateError("thermal occupation must be non-negative")
        sig[2 * i, 2 * i] = 1 + 2 * nb
        sig[2 * i + 1, 2 * i + 1] = 0.25 * (1 + 2 * nb)
        scales.append(w)
    return GaussianState(modes, np.zeros(len(sig)), sig, np.array(scales))


def check_physical(state: GaussianState, tol: float = PHYS_TOL) -> None:
    nu = state.symplectic_eigenvalues()
    if np.min(nu) < 0.5 - tol:
        raise StateError(f"unphysical covariance: smallest symplectic eigenvalue {np.min(nu):.3e}")


# --- scaled generators -------------------------------------------------------------

def scaled_system(form: QuadraticForm, state: GaussianState) -> tuple[np.ndarray, np.ndarray]:
    """(K, b) for r' = K r + b in the state's dimensionless units."""
    if tuple(form.modes) != state.modes:
        form = form.embed(state.modes)
    T = _scale_vector(state.scales)
    Gh = form.G * np.outer(T, T) / HBAR
    gh = form.g * T / HBAR
    Om = omega(len(state.modes))
    return Om @ Gh, Om @ gh


def _local_blocks(K: np.ndarray):
    n = K.shape[0] // 2
    blocks = np.array([K[2 * m:2 * m + 2, 2 * m:2 * m + 2] for m in range(n)])
    # K_mm = Omega G_mm: [[gxp, gpp], [-gxx, -gxp]], w^2 = det
    w2 = np.array([np.linalg.det(b) for b in blocks]) if n else np.zeros(0)
    tr = np.abs(blocks[:, 0, 0] + blocks[:, 1, 1]) if n else np.zeros(0)
    if np.any(tr > 1e-9 * (np.abs(blocks).max(axis=(1, 2)) + 1e-300)):
        raise NumericError("local generator is not traceless")
    return blocks, w2


def _block_diag(blocks: np.ndarray) -> np.ndarray:
    n = len(blocks)
    out = np.zeros((2 * n, 2 * n))
    for m in range(n):
        out[2 * m:2 * m + 2, 2 * m:2 * m + 2] = blocks[m]
    return out


def _position_only(K: np.ndarray) -> bool:
    # no momentum in H means x' = 0: all x rows of K vanish
    return not np.any(K[0::2, :])


def _unit_force_columns(state: GaussianState, particles: Sequence[str]) -> np.ndarray:
    cols = []
    for p in particles:
        mode = f"x{p}"
        if mode not in state.modes:
            raise DomainError(f"force on {mode} but the mode is absent")
        i = state.modes.index(mode)
        c = np.zeros(2 * len(state.modes))
        c[2 * i + 1] = -state.scales[i] / HBAR  # b = Omega T e_x / hbar
        cols.append(c)
    return np.array(cols).T if cols else np.zeros((2 * len(state.modes), 0))


@dataclass(frozen=True, eq=False)
class FlowResult:
    """Interaction-frame flow on a time grid.

    phi[j] maps initial to final deviations, shift[j] is the drive-induced displacement,
    force_response[j] holds one column per unit static force and diffusion[j] is the
    accumulated noise covariance.  frame_R[j], frame_offset[j] map back to the lab.
    """

    times: np.ndarray
    phi: np.ndarray
    shift: np.ndarray
    force_response: np.ndarray
    diffusion: np.ndarray
    frame_R: np.ndarray
    frame_offset: np.ndarray
    method: str

    def frame(self, j: int) -> Frame:
        return Frame(self.frame_R[j], self.frame_offset[j])


def _diffusion_matrix(state: GaussianState, D: float | Mapping[str, float] | None) -> np.ndarray | None:
    if D is None:
        return None
    n = 2 * len(state.modes)
    out = np.zeros((n, n))
    for p in ("A", "B"):
        Dp = D.get(p, 0.0) if isinstance(D, Mapping) else D
        if Dp < 0:
            raise DomainError("diffusion constant must be non-negative")
        mode = f"x{p}"
        if mode in state.modes and Dp > 0:
            i = state.modes.index(mode)
            out[2 * i + 1, 2 * i + 1] = 2 * Dp * state.scales[i] ** 2 / HBAR**2
    return out if np.any(out) else None


def _frame_series(blocks, w2, b_ref, times):
    T, n = len(times), 2 * len(blocks)
    R = np.zeros((T, n, n))
    off = np.zeros((T, n))
    for j, t in enumerate(times):
        Rj, _, F = _kernels.fallback.frame_matrices(blocks, w2, t)
        R[j] = Rj
        off[j] = F @ b_ref
    return R, off


def flow(state: GaussianState, form: QuadraticForm, times: Sequence[float],
         reference: QuadraticForm | None = None, D=None,
         force_particles: Sequence[str] = (), h_max: float | None = None) -> FlowResult:
    """Solve the affine moment equations in the local frame of ``reference``.

    Three solvers, picked by structure:
    position-only Hamiltonians are integrated exactly (nilpotent generator);
    position-only particles coupled to shield oscillators use the closed-form
    driven-oscillator solution; anything else uses fixed-step RK4 with step halving.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(times < 0) or np.any(np.diff(times) < 0):
        raise DomainError("times must be non-negative and non-decreasing")
    reference = form if reference is None else reference
    K, b = scaled_system(form, state)
    K0full, b_ref = scaled_system(reference, state)
    forces = _unit_force_columns(state, force_particles)
    Dm = _diffusion_matrix(state, D)
    n = K.shape[0]
    T = len(times)

    if _position_only(K) and _position_only(K0full):
        blocks, w2 = _local_blocks(K0full)
        K1 = K - _block_diag(blocks)
        # R(s) = I + s K0 and A(s) = K1 because every product of x->p maps vanishes
        phi = np.eye(n)[None] + times[:, None, None] * K1[None]
        shift = times[:, None] * (b - b_ref)[None]
        fr = times[:, None, None] * forces[None]
        diff = np.zeros((T, n, n)) if Dm is None else times[:, None, None] * Dm[None]
        R, off = _frame_series(blocks, w2, b_ref, times)
        return FlowResult(times, phi, shift, fr, diff, R, off, "exact")

    if Dm is None and _bath_structure(state, K) and _bath_structure(state, K0full):
        return _bath_flow(state, K, b, K0full, b_ref, forces, times)

    blocks, w2 = _local_blocks(K0full)
    K1 = K - _block_diag(blocks)
    drives = np.column_stack([b - b_ref, forces]) if forces.size else (b - b_ref)[:, None]
    has_diff = Dm is not None
    Dm = np.zeros((n, n)) if Dm is None else Dm
    if h_max is None:
        rate = max(np.sqrt(np.max(np.abs(w2), initial=0.0)), _frame_norm(K1, blocks, w2, times[-1] if T else 0.0))
        h_max = 0.02 / rate if rate > 0 else (times[-1] if T and times[-1] > 0 else 1.0)
    phi, H, sig = _rk4_checked(blocks, w2, K1, b_ref, drives, Dm, has_diff, times, h_max)
    R, off = _frame_series(blocks, w2, b_ref, times)
    return FlowResult(times, phi, H[:, :, 0], H[:, :, 1:], sig, R, off, "rk4")


# --- particles without kinetic terms coupled to oscillators --------------------------

def _split_modes(state: GaussianState):
    part = [i for i, m in enumerate(state.modes) if m in PARTICLE_MODES]
    bath = [i for i, m in enumerate(state.modes) if m not in PARTICLE_MODES]
    return part, bath


def _bath_structure(state: GaussianState, K: np.ndarray) -> bool:
    """True if particles carry no momentum terms and oscillators couple only to particle positions."""
    part, bath = _split_modes(state)
    if not bath or not part:
        return False
    X = [2 * i for i in part]
    Pp = [2 * i + 1 for i in part]
    if np.any(K[X, :]) or np.any(K[:, Pp]):
        return False
    for a in bath:
        for c in bath:
            if a != c and np.any(K[2 * a:2 * a + 2, 2 * c:2 * c + 2]):
                return False
    return True


def _local_functions3(w2: float, s: np.ndarray):
    """f0, f1, f2, f3 with f_{k+1} = int_0^s f_k (f0 = cos(ws) or cosh)."""
    s = np.asarray(s, dtype=float)
    f0, f1, f2 = (np.empty_like(s) for _ in range(3))
    for j, sj in enumerate(s):
        a, b_, c = _kernels.fallback.local_functions(np.array([w2]), float(sj))
        f0[j], f1[j], f2[j] = a[0], b_[0], c[0]
    if w2 == 0:
        f3 = s**3 / 6
    else:
        w = math.sqrt(abs(w2))
        z = w * s
        small = np.abs(z) < 1e-3
        f3 = np.empty_like(s)
        if w2 > 0:
            f3[~small] = (z[~small] - np.sin(z[~small])) / w**3
            f3[small] = s[small] ** 3 / 6 * (1 - z[small] ** 2 / 20)
        else:
            f3[~small] = (np.sinh(z[~small]) - z[~small]) / w**3
            f3[small] = s[small] ** 3 / 6 * (1 + z[small] ** 2 / 20)
    return f0, f1, f2, f3


def _bath_lab_map(state, K, b, times, extra_cols):
    """Exact lab-frame S(t), h(t) with the particle-local position->momentum shear excluded.

    Returns (S, h, H_extra, local_shear) where the excluded shear is K_loc * t with
    K_loc the particle-local part of K; callers add it back through the frame.
    """
    part, bath = _split_modes(state)
    n = K.shape[0]
    T = len(times)
    X = np.array([2 * i for i in part])
    Pp = X + 1
    Kpx = K[np.ix_(Pp, X)]
    loc = np.zeros_like(Kpx)
    for party in ("A", "B"):
        idx = [k for k, i in enumerate(part) if state.modes[i].endswith(party)]
        loc[np.ix_(idx, idx)] = Kpx[np.ix_(idx, idx)]
    S = np.zeros((T, n, n))
    S[:, range(n), range(n)] = 1.0
    S[:, Pp[:, None], X[None, :]] = times[:, None, None] * (Kpx - loc)[None]
    cols = np.column_stack([b, extra_cols]) if extra_cols.size else b[:, None]
    Hc = np.zeros((T, n, cols.shape[1]))
    Hc[:, Pp, :] = times[:, None, None] * cols[Pp][None]
    mediated = np.zeros((T, len(X), len(X)))
    for a in bath:
        z = np.array([2 * a, 2 * a + 1])
        k = K[np.ix_(z, z)]
        w2 = float(np.linalg.det(k))
        f0, f1, f2, f3 = _local_functions3(w2, times)
        I2 = np.eye(2)
        Rm = f0[:, None, None] * I2 + f1[:, None, None] * k
        Fm = f1[:, None, None] * I2 + f2[:, None, None] * k
        Qm = f2[:, None, None] * I2 + f3[:, None, None] * k
        Kpz = K[np.ix_(Pp, z)]
        Kzx = K[np.ix_(z, X)]
        S[:, z[:, None], z[None, :]] = Rm
        S[:, z[:, None], X[None, :]] = Fm @ Kzx
        S[:, Pp[:, None], z[None, :]] = Kpz[None] @ Fm
        mediated += Kpz[None] @ Qm @ Kzx[None]
        Hc[:, z, :] = Fm @ cols[z][None]
        Hc[:, Pp, :] += Kpz[None] @ Qm @ cols[z][None]
    S[:, Pp[:, None], X[None, :]] += mediated
    return S, Hc[:, :, 0], Hc[:, :, 1:], loc, mediated


def _bath_flow(state, K, b, K0, b_ref, forces, times) -> FlowResult:
    part, bath = _split_modes(state)
    n = K.shape[0]
    T = len(times)
    X = np.array([2 * i for i in part])
    Pp = X + 1
    S, h, Hf, loc, _ = _bath_lab_map(state, K, b, times, forces)
    S0, h0, _, loc0, med0 = _bath_lab_map(state, K0, b_ref, times, np.zeros((n, 0)))
    med_loc = _party_local(state, part, med0)
    # frame: reference particle-local shear (static plus shield-mediated) and free oscillators
    Lb = np.zeros((T, n, n))
    Lb[:, range(n), range(n)] = 1.0
    for a in bath:
        z = slice(2 * a, 2 * a + 2)
        Lb[:, z, z] = S0[:, z, z]
    Lb_inv = np.linalg.inv(Lb)
    L = Lb.copy()
    L[:, Pp[:, None], X[None, :]] = times[:, None, None] * loc0[None] + med_loc
    # the excluded shear difference is added back analytically, without large cancellations
    S[:, Pp[:, None], X[None, :]] += times[:, None, None] * (loc - loc0)[None] - med_loc
    phi = Lb_inv @ S
    shift = np.einsum("tij,tj->ti", Lb_inv, h - h0)
    fr = Lb_inv @ Hf
    return FlowResult(times, phi, shift, fr, np.zeros((T, n, n)), L, h0, "oscillator")


def _party_local(state, part, M):
    out = np.zeros_like(M)
    for party in ("A", "B"):
        idx = [k for k, i in enumerate(part) if state.modes[i].endswith(party)]
        out[:, np.array(idx)[:, None], np.array(idx)[None, :]] = M[:, np.array(idx)[:, None], np.array(idx)[None, :]]
    return out


def _frame_norm(K1, blocks, w2, tmax) -> float:
    """Rough bound on |A(s)| over the run, used for the RK4 step size."""
    if not np.any(K1):
        return 0.0
    probe = np.linspace(0, tmax, 9) if tmax > 0 else [0.0]
    best = 0.0
    for s in probe:
        R, Ri, _ = _kernels.fallback.frame_matrices(blocks, w2, s)
        best = max(best, np.linalg.norm(Ri @ K1 @ R, 2))
    return best


def _rk4_checked(blocks, w2, K1, b_ref, drives, Dm, has_diff, times, h_max):
    run = _kernels.rk4_interaction
    out = run(blocks, w2, K1, b_ref, drives, 0, Dm, has_diff, times, h_max)
    err = math.inf
    for _ in range(6):
        fine = run(blocks, w2, K1, b_ref, drives, 0, Dm, has_diff, times, h_max / 2)
        err = max(_rel_err(a, b) for a, b in zip(out, fine))
        if err < STEP_TOL:
            return fine
        out, h_max = fine, h_max / 2
    raise NumericError(f"RK4 step-halving did not converge (last relative change {err:.2e}); "
                       f"try dt <= {h_max / 2:.3e} s")


def _rel_err(a, b) -> float:
    scale = max(np.max(np.abs(b)), 1.0)
    return float(np.max(np.abs(a - b)) / scale) if a.size else 0.0


def _states_from_flow(state: GaussianState, fl: FlowResult, label: str = "") -> list[GaussianState]:
    out = []
    for j, t in enumerate(fl.times):
        P = fl.phi[j]
        d = P @ state.d + fl.shift[j]
        s = P @ state.sigma @ P.T + fl.diffusion[j]
        out.append(GaussianState(state.modes, d, s, state.scales, state.t + t, fl.frame(j),
                                 {"method": fl.method, "label": label}))
    return out


def _lab_start(state: GaussianState) -> GaussianState:
    if state.frame is not None:
        state = state.lab()
    check_physical(state)
    return state


# --- public propagation ------------------------------------------------------------

def propagate(state: GaussianState, H: QuadraticForm, t: float, reference: QuadraticForm | None = None) -> GaussianState:
    """Closed-system evolution for time t (result expressed in a local frame)."""
    if t < 0:
        raise DomainError("t must be non-negative")
    return propagate_grid(state, H, [t], reference)[0]


def propagate_grid(state: GaussianState, H: QuadraticForm, times: Sequence[float],
                   reference: QuadraticForm | None = None) -> list[GaussianState]:
    state = _lab_start(state)
    _check_modes(state, H)
    fl = flow(state, H, times, reference)
    return _states_from_flow(state, fl)


def propagate_expm(state: GaussianState, H: QuadraticForm, t: float) -> GaussianState:
    """Lab-frame reference solution through the augmented matrix exponential."""
    state = _lab_start(state)
    K, b = scaled_system(H, state)
    n = K.shape[0]
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = K
    aug[:n, n] = b
    E = expm(aug * t)
    S, h = E[:n, :n], E[:n, n]
    return GaussianState(state.modes, S @ state.d + h, S @ state.sigma @ S.T, state.scales,
                         state.t + t, None, {"method": "expm"})


def _check_modes(state: GaussianState, H: QuadraticForm) -> None:
    extra = set(H.modes) - set(state.modes)
    if extra:
        raise StateError(f"Hamiltonian acts on modes {sorted(extra)} missing from the state")


# --- noise ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseSpec:
    """Noise description.  ``deviations`` maps NoiseDraw field names to standard deviations."""

    kind: str = "quasi_static"
    deviations: Mapping[str, float] = field(default_factory=dict)
    D: float | Mapping[str, float] = 0.0
    t_c: float | None = None

    def __post_init__(self):
        if self.kind not in ("quasi_static", "markovian"):
            raise ConfigError(f"unknown noise kind {self.kind!r}")
        bad = set(self.deviations) - set(NOISE_FIELDS)
        if bad:
            raise ConfigError(f"unknown noise parameters {sorted(bad)}")
        if any(v < 0 for v in self.deviations.values()):
            raise ConfigError("standard deviations must be non-negative")
        Ds = self.D.values() if isinstance(self.D, Mapping) else [self.D]
        if any(v < 0 for v in Ds):
            raise ConfigError("diffusion constant must be non-negative")

    @property
    def active(self) -> tuple[str, ...]:
        return tuple(k for k in NOISE_FIELDS if self.deviations.get(k, 0.0) > 0)

    @property
    def tag(self) -> str:
        shield = any(k.startswith("shield") for k in self.active)
        return "shield_correlated" if shield else "detector_uncorrelated"


def gauss_hermite_grid(dims: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor nodes (N, dims) and weights for a standard normal in ``dims`` dimensions."""
    x, w = hermegauss(order)
    w = w / math.sqrt(2 * math.pi)
    if dims == 0:
        return np.zeros((1, 0)), np.ones(1)
    nodes = np.array(list(itertools.product(x, repeat=dims)))
    weights = np.prod(np.array(list(itertools.product(w, repeat=dims))), axis=1)
    return nodes, weights


def smolyak_grid(dims: int, level: int) -> tuple[np.ndarray, np.ndarray]:
    """Smolyak sparse grid from nested-free Gauss-Hermite rules of order 2l - 1."""
    pts: dict[tuple, float] = {}
    for ks in itertools.product(range(1, level + 1), repeat=dims):
        q = sum(ks)
        if not (level <= q <= level + dims - 1):
            continue
        coef = (-1) ** (level + dims - 1 - q) * math.comb(dims - 1, level + dims - 1 - q)
        rules = []
        for k in ks:
            x, w = hermegauss(2 * k - 1)
            rules.append((x, w / math.sqrt(2 * math.pi)))
        for combo in itertools.product(*[range(len(r[0])) for r in rules]):
            key = tuple(round(float(rules[i][0][c]), 14) for i, c in enumerate(combo))
            wt = coef * np.prod([rules[i][1][c] for i, c in enumerate(combo)])
            pts[key] = pts.get(key, 0.0) + wt
    keys = sorted(pts)
    return np.array(keys, dtype=float), np.array([pts[k] for k in keys])


def average_quasistatic(state0: GaussianState, form_builder: Callable[[NoiseDraw], QuadraticForm],
                        noise: NoiseSpec, t: float | Sequence[float], quad_order: int = 20,
                        sparse_level: int | None = None, workers: int = 1):
    """Ensemble-averaged Gaussian moments over quasi-static parameter noise.

    Trap force offsets enter linearly and are averaged exactly; every other active
    parameter is integrated by Gauss-Hermite quadrature.  Returns one state for a
    scalar ``t`` and a list for a grid.  sigma_bar = <sigma> + Cov[d] over nodes.
    """
    if noise.kind != "quasi_static":
        raise ConfigError("average_quasistatic needs quasi_static noise")
    if quad_order < 2:
        raise ConfigError("quad_order must be >= 2")
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    state0 = _lab_start(state0)
    ref = form_builder(ZERO_DRAW)
    _check_modes(state0, ref)
    quad_dims = [k for k in noise.active if k not in TRAP_FIELDS]
    trap_dims = [k for k in noise.active if k in TRAP_FIELDS]
    if len(quad_dims) > 4 and sparse_level is None:
        raise ConfigError(f"{len(quad_dims)} noise dimensions exceed the tensor-grid limit of 4; "
                          "pass sparse_level to use a Smolyak grid")
    if sparse_level is not None and quad_dims:
        nodes, weights = smolyak_grid(len(quad_dims), sparse_level)
        grid = f"smolyak-{sparse_level}"
    else:
        nodes, weights = gauss_hermite_grid(len(quad_dims), quad_order)
        grid = f"tensor-{quad_order}"
    particles = [k.split("_")[1] for k in trap_dims]
    sd = np.array([noise.deviations[k] for k in quad_dims])

    def run(node):
        draw = NoiseDraw(**{k: float(v) for k, v in zip(quad_dims, sd * node)})
        return flow(state0, form_builder(draw), times, ref, force_particles=particles)

    if workers > 1 and len(nodes) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as ex:
            flows = list(ex.map(run, nodes))  # map keeps node order: fixed reduction order
    else:
        flows = [run(node) for node in nodes]

    n = 2 * len(state0.modes)
    T = len(times)
    mean_d = np.zeros((T, n))
    second = np.zeros((T, n, n))
    sig = np.zeros((T, n, n))
    for w, fl in zip(weights, flows):
        d = np.einsum("tij,j->ti", fl.phi, state0.d) + fl.shift
        s = np.einsum("tij,jk,tlk->til", fl.phi, state0.sigma, fl.phi) + fl.diffusion
        if trap_dims:
            Hc = fl.force_response * np.array([noise.deviations[k] for k in trap_dims])[None, None, :]
            s = s + np.einsum("tim,tjm->tij", Hc, Hc)
        mean_d += w * d
        second += w * np.einsum("ti,tj->tij", d, d)
        sig += w * s
    cov = second - np.einsum("ti,tj->tij", mean_d, mean_d)
    out = []
    for j in range(T):
        s = sig[j] + cov[j]
        out.append(GaussianState(state0.modes, mean_d[j], s, state0.scales, state0.t + times[j],
                                 flows[0].frame(j), {"grid": grid, "nodes": len(nodes),
                                                  "noise_dims": quad_dims + trap_dims}))
    return out[0] if scalar else out


def trap_quasistatic_covariance(state: GaussianState, H: QuadraticForm, dxi: float | Mapping[str, float],
                                t: float | Sequence[float]) -> np.ndarray:
    """Cov_xi[d] = dxi^2 sum_i h_i h_i^T with h_i the response to a unit static force on particle i.

    Returned in the local interaction frame of H (shape (n, n) or (T, n, n)).
    """
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    state = _lab_start(state)
    particles = [p for p in ("A", "B") if f"x{p}" in state.modes]
    fl = flow(state, H, times, force_particles=particles)
    sd = np.array([dxi.get(p, 0.0) if isinstance(dxi, Mapping) else dxi for p in particles])
    Hc = fl.force_response * sd[None, None, :]
    cov = np.einsum("tim,tjm->tij", Hc, Hc)
    return cov[0] if scalar else cov


def evolve_markovian(state: GaussianState, H: QuadraticForm, D: float | Mapping[str, float],
                     t: float | Sequence[float], dt: float | None = None):
    """Covariance evolution with momentum diffusion d<p_i^2>/dt = 2 D_i.

    D is in SI units (kg^2 m^2 s^-3); D = factor * hbar * lambda expresses it in the
    natural unit.  ``dt`` caps the RK4 step; step halving enforces 1e-9 agreement.
    """
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    state = _lab_start(state)
    _check_modes(state, H)
    fl = flow(state, H, times, D=D, h_max=dt)
    states = _states_from_flow(state, fl, label="markovian")
    return states[0] if scalar else states


def effective_frequency(omega_trap: float, lam: float, delta: float, eta: float, M: float) -> float:
    """Trap frequency softened by the attractive curvatures: w'^2 = w^2 - (lam + 12 delta + 6 eta)/M."""
    if M <= 0:
        raise DomainError("mass must be positive")
    w2 = omega_trap**2 - (lam + 12 * delta + 6 * eta) / M
    if w2 <= 0:
        raise DomainError("inverted potential: the trap cannot hold against the surface attraction")
    return math.sqrt(w2)


def entanglement_rate(theta: float, lam: float, dx_A: float, dx_B: float,
                      dy_A: float = 0.0, dy_B: float = 0.0) -> float:
    """Initial slope dE_N/dt of the pure Gaussian state under the gravity coupling alone."""
    A = lam * (math.sin(theta) ** 2 - 0.5 * math.cos(theta) ** 2)
    B = lam * (math.cos(theta) ** 2 - 0.5 * math.sin(theta) ** 2)
    return 2 * (abs(A) * dx_A * dx_B + abs(B) * dy_A * dy_B) / (HBAR * math.log(2))


def linear_order_spectrum(theta: float, lam: float, dx_A: float, dx_B: float, dy_A: float,
                          dy_B: float, t: float, nbar: float = 0.0) -> np.ndarray:
    """Symplectic eigenvalues of the partially transposed state to first order in t."""
    A = lam * (math.sin(theta) ** 2 - 0.5 * math.cos(theta) ** 2)
    B = lam * (math.cos(theta) ** 2 - 0.5 * math.sin(theta) ** 2)
    f = 1 + 2 * nbar
    ax = A * t * dx_A * dx_B * f / HBAR
    by = B * t * dy_A * dy_B / HBAR
    return np.sort([abs(ax + 0.5 * f), abs(ax - 0.5 * f), abs(by + 0.5), abs(by - 0.5)])


def log_negativity_series(states: Sequence[GaussianState], party="A") -> np.ndarray:
    return np.array([s.log_negativity(party) for s in states])
