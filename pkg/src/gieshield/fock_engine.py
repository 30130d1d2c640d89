"""Continuous cat states in a truncated number basis.

Each particle starts in a symmetric superposition of two displaced squeezed
vacua centred at +-d/2.  Quadratures are x = x0 (a + a^+) and
p = -i hbar/(2 x0) (a - a^+), so the vacuum has position spread x0.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import linalg, optimize

from .constants import HBAR
from .errors import ConfigError, DomainError, NumericError, TruncationError
from .hamiltonians import NoiseDraw, QuadraticForm
from .negativity import SmallDensityMatrix, log_negativity_density

MAX_PRODUCT_DIM = 40_000
TAIL_BUDGET = 1e-8


@dataclass(frozen=True)
class FockSpec:
    N: int
    x0: float
    modes: tuple[str, ...] = ("xA", "xB")

    def __post_init__(self):
        if self.N < 8:
            raise DomainError("truncation N must be at least 8")
        if not self.x0 > 0:
            raise DomainError("scale x0 must be positive")
        if self.N ** len(self.modes) > MAX_PRODUCT_DIM:
            raise ConfigError(f"product dimension {self.N ** len(self.modes)} exceeds {MAX_PRODUCT_DIM}")

    @property
    def dim(self) -> int:
        return self.N ** len(self.modes)


def overlap(sigma: float, d: float) -> float:
    """Branch overlap S = exp(-d^2 / (8 sigma^2))."""
    return math.exp(-d * d / (8 * sigma * sigma))


def _variance(sigma: float, d: float) -> float:
    return sigma * sigma + d * d / (4 * (1 + overlap(sigma, d)))


@dataclass(frozen=True)
class ContinuousCatParams:
    sigma: float
    d: float
    dx: float

    def __post_init__(self):
        if not (self.sigma > 0 and self.d >= 0 and self.dx > 0):
            raise DomainError("need sigma > 0, d >= 0, dx > 0")
        if abs(_variance(self.sigma, self.d) - self.dx**2) > 1e-10 * self.dx**2:
            raise DomainError("sigma, d and dx do not satisfy the variance constraint")

    @property
    def overlap(self) -> float:
        return overlap(self.sigma, self.d)


def variance_match(dx: float, d: float) -> float:
    """Branch width sigma such that the superposition has position spread dx."""
    if not dx > 0:
        raise DomainError("dx must be positive")
    if d < 0:
        raise DomainError("separation must be non-negative")
    if d >= 2 * dx:
        raise DomainError("no branch width reproduces dx when d >= 2 dx")
    if d == 0:
        return dx
    f = lambda s: _variance(s, d) - dx * dx
    # f -> d^2/4 - dx^2 < 0 as sigma -> 0 and f(dx) > 0
    lo, hi = 1e-6 * dx, dx
    sigma = optimize.brentq(f, lo, hi, xtol=1e-14 * dx, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(f(sigma)) > 1e-12 * dx * dx:
        raise NumericError("variance matching did not converge")
    return sigma


def cat_params(dx: float, d: float) -> ContinuousCatParams:
    return ContinuousCatParams(variance_match(dx, d), d, dx)


# --- operators -------------------------------------------------------------------

def annihilation(N: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1)


def position_matrix(N: int, x0: float) -> np.ndarray:
    a = annihilation(N)
    return x0 * (a + a.T)


def momentum_matrix(N: int, x0: float) -> np.ndarray:
    a = annihilation(N)
    return -1j * HBAR / (2 * x0) * (a - a.T)


def _branch_vectors(params: ContinuousCatParams, x0: float, n_work: int) -> np.ndarray:
    a = annihilation(n_work)
    r = -math.log(params.sigma / x0)
    alpha = params.d / (4 * x0)
    vac = np.zeros(n_work)
    vac[0] = 1.0
    sq = linalg.expm(0.5 * r * (a @ a - a.T @ a.T)) @ vac
    out = []
    for sgn in (1, -1):
        out.append(linalg.expm(sgn * alpha * (a.T - a)) @ sq)
    return np.array(out)


def single_cat_vector(params: ContinuousCatParams, N: int, x0: float, tail_budget: float = TAIL_BUDGET) -> np.ndarray:
    """Normalized one-particle state in the first N number states."""
    n_work = 2 * N + 40
    plus, minus = _branch_vectors(params, x0, n_work)
    psi = plus + minus
    psi /= np.linalg.norm(psi)
    tail = float(np.sum(psi[N:] ** 2))
    if tail > tail_budget:
        raise TruncationError(f"tail population {tail:.2e} beyond N={N}",
                              suggested_n=suggest_truncation(params, x0, tail_budget))
    psi = psi[:N] / np.linalg.norm(psi[:N])
    return psi.astype(complex)


def suggest_truncation(params: ContinuousCatParams, x0: float, tail_budget: float = TAIL_BUDGET,
                       n_max: int = 200) -> int:
    """Smallest multiple of 8 whose tail population is below the budget."""
    n_work = 2 * n_max + 40
    plus, minus = _branch_vectors(params, x0, n_work)
    psi = plus + minus
    pop = psi**2 / np.sum(psi**2)
    tails = np.cumsum(pop[::-1])[::-1]
    for N in range(8, n_max + 1, 8):
        if tails[N] < tail_budget:
            return N
    raise TruncationError(f"no truncation up to {n_max} meets the tail budget", suggested_n=None)


def build_cat_state(params: ContinuousCatParams, spec: FockSpec) -> np.ndarray:
    """Two-particle product state as an (N, N) amplitude array."""
    if len(spec.modes) != 2:
        raise ConfigError("continuous cats are built for two particle modes")
    psi = single_cat_vector(params, spec.N, spec.x0)
    return np.outer(psi, psi)


def moments(psi: np.ndarray, N: int, x0: float) -> tuple[float, float]:
    """<x> and Var(x) for a one-particle amplitude vector."""
    X = position_matrix(N, x0)
    m = float(np.real(psi.conj() @ X @ psi))
    m2 = float(np.real(psi.conj() @ X @ X @ psi))
    return m, m2 - m * m


# --- Hamiltonians --------------------------------------------------------------

def _quadrature_ops(spec: FockSpec) -> list[np.ndarray]:
    n = len(spec.modes)
    X = position_matrix(spec.N, spec.x0)
    P = momentum_matrix(spec.N, spec.x0)
    eye = np.eye(spec.N)
    ops = []
    for k in range(n):
        for single in (X, P):
            parts = [eye] * n
            parts[k] = single
            op = parts[0]
            for q in parts[1:]:
                op = np.kron(op, q)
            ops.append(op)
    return ops


def _embed_form(form: QuadraticForm, spec: FockSpec) -> QuadraticForm:
    extra = [m for m in form.modes if m not in spec.modes]
    if extra:
        raise ConfigError(f"form acts on modes {extra} that are not in the truncated basis")
    return form.embed(spec.modes)


def hamiltonian_matrix(form: QuadraticForm, spec: FockSpec) -> np.ndarray:
    """Matrix of 1/2 r^T G r + g^T r + c with symmetrized operator products."""
    form = _embed_form(form, spec)
    ops = _quadrature_ops(spec)
    n = len(ops)
    H = np.zeros((spec.dim, spec.dim), dtype=complex)
    H += form.c * np.eye(spec.dim)
    for i in range(n):
        if form.g[i]:
            H += form.g[i] * ops[i]
        for j in range(n):
            if form.G[i, j]:
                H += 0.25 * form.G[i, j] * (ops[i] @ ops[j] + ops[j] @ ops[i])
    scale = max(np.max(np.abs(H)), 1e-300)
    if np.max(np.abs(H - H.conj().T)) > 1e-10 * scale:
        raise NumericError("Hamiltonian matrix is not Hermitian after truncation")
    return 0.5 * (H + H.conj().T)


def _position_only(form: QuadraticForm) -> bool:
    p = np.arange(1, 2 * form.n_modes, 2)
    return not (np.any(form.G[p, :]) or np.any(form.g[p]))


@dataclass
class _Grid:
    U: np.ndarray  # columns: position eigenvectors of the truncated X
    q: np.ndarray


def _position_grid(spec: FockSpec) -> _Grid:
    q, U = np.linalg.eigh(position_matrix(spec.N, spec.x0))
    return _Grid(U, q)


def _grid_energies(form: QuadraticForm, spec: FockSpec, grid: _Grid) -> np.ndarray:
    """Energy of a position-only form on the product grid, shape (N,) * modes."""
    form = _embed_form(form, spec)
    n = len(spec.modes)
    mesh = np.meshgrid(*([grid.q] * n), indexing="ij")
    E = np.full(mesh[0].shape, form.c)
    for i in range(n):
        E += form.g[2 * i] * mesh[i]
        for j in range(n):
            E += 0.5 * form.G[2 * i, 2 * j] * mesh[i] * mesh[j]
    return E


def _to_grid(psi: np.ndarray, grid: _Grid) -> np.ndarray:
    return grid.U.T @ psi @ grid.U


def _from_grid(psi: np.ndarray, grid: _Grid) -> np.ndarray:
    return grid.U @ psi @ grid.U.T


def evolve_pure(psi: np.ndarray, form: QuadraticForm, t: float, spec: FockSpec) -> np.ndarray:
    """Exact evolution of an (N, N) amplitude array under a time-independent form."""
    if len(spec.modes) != 2:
        raise ConfigError("evolve_pure expects two modes")
    form = _embed_form(form, spec)
    if _position_only(form):
        grid = _position_grid(spec)
        E = _grid_energies(form, spec, grid)
        return _from_grid(_to_grid(psi, grid) * np.exp(-1j * E * t / HBAR), grid)
    w, V = np.linalg.eigh(hamiltonian_matrix(form, spec))
    vec = V @ (np.exp(-1j * w * t / HBAR) * (V.conj().T @ psi.reshape(-1)))
    return vec.reshape(psi.shape)


def log_negativity_pure(psi: np.ndarray) -> float:
    """2 log2 of the sum of Schmidt coefficients of an (N, N) amplitude array."""
    s = np.linalg.svd(psi, compute_uv=False)
    s = s / np.linalg.norm(s)
    return float(max(0.0, 2 * math.log2(np.sum(s))))


def entanglement_series(params: ContinuousCatParams, form: QuadraticForm, times: Sequence[float],
                        spec: FockSpec) -> np.ndarray:
    """Noise-free E_N(t) for a position-only form (one diagonalization, phases per time)."""
    form = _embed_form(form, spec)
    if not _position_only(form):
        psi0 = build_cat_state(params, spec)
        return np.array([log_negativity_pure(evolve_pure(psi0, form, t, spec)) for t in times])
    grid = _position_grid(spec)
    E = _grid_energies(form, spec, grid)
    psi_g = _to_grid(build_cat_state(params, spec), grid)
    # Schmidt coefficients are invariant under the real orthogonal grid change
    return np.array([log_negativity_pure(psi_g * np.exp(-1j * E * t / HBAR)) for t in times])


# --- averaging -----------------------------------------------------------------

def evolve_average(psi0: np.ndarray, form_builder: Callable[[NoiseDraw], QuadraticForm], noise,
                   t: float, spec: FockSpec, quad_order: int = 12, workers: int = 1) -> SmallDensityMatrix:
    """Gauss-Hermite average of exactly evolved states over quasi-static noise."""
    from .gaussian_engine import gauss_hermite_grid

    if getattr(noise, "kind", "quasi_static") != "quasi_static":
        raise ConfigError("only quasi-static noise is averaged in the number basis")
    devs = {k: v for k, v in noise.deviations.items() if v > 0}
    fields = sorted(devs)
    if len(fields) > 4:
        raise ConfigError("at most four noise fields for tensor quadrature")
    nodes, w = gauss_hermite_grid(len(fields), quad_order)
    draws = [NoiseDraw(**{f: float(x) * devs[f] for f, x in zip(fields, row)}) for row in nodes]

    def one(draw):
        psi = evolve_pure(psi0, form_builder(draw), t, spec).reshape(-1)
        norm = np.vdot(psi, psi).real
        if abs(norm - 1.0) > 1e-9:
            raise NumericError(f"norm drifted to {norm}")
        return psi

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            vecs = list(ex.map(one, draws))
    else:
        vecs = [one(d) for d in draws]
    V = np.array(vecs)
    rho = (V.T * w) @ V.conj()
    rho = 0.5 * (rho + rho.conj().T)
    return SmallDensityMatrix(rho, (spec.N, spec.N))


def log_negativity(rho: SmallDensityMatrix) -> float:
    return log_negativity_density(rho)


def initial_slope(values: np.ndarray, times: np.ndarray) -> float:
    """Least-squares slope of E_N through the origin over the given early times."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    return float(np.dot(times, values) / np.dot(times, times))


def converged_series(params: ContinuousCatParams, form: QuadraticForm, times: Sequence[float],
                     x0: float | None = None, tol: float = 1e-4, n_max: int = 200) -> tuple[np.ndarray, int]:
    """E_N(t) with N raised by half until the series changes by less than ``tol``.

    Returns the series at the accepted N and that N.
    """
    x0 = params.dx if x0 is None else x0
    N = suggest_truncation(params, x0, n_max=n_max)
    prev = entanglement_series(params, form, times, FockSpec(N, x0))
    while True:
        nxt = min(n_max, int(math.ceil(1.5 * N / 8)) * 8)
        if nxt == N:
            raise TruncationError(f"E_N not converged to {tol} below N={n_max}", suggested_n=None)
        cur = entanglement_series(params, form, times, FockSpec(nxt, x0))
        if np.max(np.abs(cur - prev)) < tol:
            return prev, N
        prev, N = cur, nxt
