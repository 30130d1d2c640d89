"""Pure numpy implementations of the hot kernels (same signatures as _core)."""

from __future__ import annotations

import numpy as np


def _sinc(x):
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    big = np.abs(x) > 1e-4
    out[big] = np.sin(x[big]) / x[big]
    xs = x[~big]
    out[~big] = 1.0 - xs * xs / 6.0
    return out


def _sinhc(x):
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    big = np.abs(x) > 1e-4
    out[big] = np.sinh(x[big]) / x[big]
    xs = x[~big]
    out[~big] = 1.0 + xs * xs / 6.0
    return out


def local_functions(w2: np.ndarray, s: float):
    """f0 = cos(ws), f1 = sin(ws)/w, f2 = (1 - cos ws)/w^2 per mode (hyperbolic if w2 < 0)."""
    w2 = np.asarray(w2, dtype=float)
    f0 = np.empty_like(w2)
    f1 = np.empty_like(w2)
    f2 = np.empty_like(w2)
    pos = w2 >= 0
    w = np.sqrt(w2[pos])
    f0[pos] = np.cos(w * s)
    f1[pos] = s * _sinc(w * s)
    f2[pos] = 0.5 * s * s * _sinc(0.5 * w * s) ** 2
    v = np.sqrt(-w2[~pos])
    f0[~pos] = np.cosh(v * s)
    f1[~pos] = s * _sinhc(v * s)
    f2[~pos] = 0.5 * s * s * _sinhc(0.5 * v * s) ** 2
    return f0, f1, f2


def frame_matrices(blocks: np.ndarray, w2: np.ndarray, s: float):
    """Block-diagonal R(s) = exp(K0 s), its inverse, and the drive integral F(s) = int_0^s R."""
    nm = blocks.shape[0]
    f0, f1, f2 = local_functions(w2, s)
    eye = np.eye(2)
    R = np.zeros((2 * nm, 2 * nm))
    Ri = np.zeros_like(R)
    F = np.zeros_like(R)
    for m in range(nm):
        sl = slice(2 * m, 2 * m + 2)
        R[sl, sl] = f0[m] * eye + f1[m] * blocks[m]
        Ri[sl, sl] = f0[m] * eye - f1[m] * blocks[m]
        F[sl, sl] = f1[m] * eye + f2[m] * blocks[m]
    return R, Ri, F


def _rhs(s, Phi, Hd, Sig, blocks, w2, K1, b_ref, drives, ref_col, D, has_diff):
    R, Ri, F = frame_matrices(blocks, w2, s)
    A = Ri @ K1 @ R
    B = drives.copy()
    if ref_col >= 0:
        B[:, ref_col] += K1 @ (F @ b_ref)
    B = Ri @ B
    dPhi = A @ Phi
    dH = A @ Hd + B
    if has_diff:
        DI = Ri @ D @ Ri.T
        dSig = A @ Sig + Sig @ A.T + DI
    else:
        dSig = None
    return dPhi, dH, dSig


def rk4_interaction(blocks, w2, K1, b_ref, drives, ref_col, D, has_diff, times, h_max):
    """Fixed-step RK4 for the interaction-frame flow.

    Integrates Phi' = A Phi, H' = A H + B, Sig' = A Sig + Sig A^T + D_I with
    A(s) = R(s)^-1 K1 R(s) and returns the three arrays at every entry of ``times``
    (which must be non-decreasing and start at or after 0).
    """
    blocks = np.ascontiguousarray(blocks, dtype=float)
    n = K1.shape[0]
    m = drives.shape[1]
    T = len(times)
    out_phi = np.zeros((T, n, n))
    out_h = np.zeros((T, n, m))
    out_sig = np.zeros((T, n, n))
    Phi = np.eye(n)
    Hd = np.zeros((n, m))
    Sig = np.zeros((n, n))
    s = 0.0
    args = (blocks, w2, K1, b_ref, drives, ref_col, D, has_diff)
    for j, t_next in enumerate(times):
        span = t_next - s
        nsteps = int(np.ceil(span / h_max - 1e-12)) if span > 0 else 0
        h = span / nsteps if nsteps else 0.0
        for _ in range(nsteps):
            k1 = _rhs(s, Phi, Hd, Sig, *args)
            k2 = _rhs(s + h / 2, Phi + h / 2 * k1[0], Hd + h / 2 * k1[1],
                      Sig + h / 2 * k1[2] if has_diff else Sig, *args)
            k3 = _rhs(s + h / 2, Phi + h / 2 * k2[0], Hd + h / 2 * k2[1],
                      Sig + h / 2 * k2[2] if has_diff else Sig, *args)
            k4 = _rhs(s + h, Phi + h * k3[0], Hd + h * k3[1],
                      Sig + h * k3[2] if has_diff else Sig, *args)
            Phi = Phi + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            Hd = Hd + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            if has_diff:
                Sig = Sig + h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
            s += h
        s = t_next
        out_phi[j] = Phi
        out_h[j] = Hd
        out_sig[j] = Sig
    return out_phi, out_h, out_sig


def shield_decoherence(g: np.ndarray, omegas: np.ndarray, nbar: np.ndarray, times: np.ndarray):
    """Exponent and phase sums of the thermal-shield channel for every branch pair.

    g has shape (modes, 4) in units of hbar (rad/s).  Returns (gamma, phase) with
    shapes (T, 4, 4): gamma_ij = sum_k |g_i - g_j|^2 |f1|^2 (1/2 + nbar) and
    phase_ij = sum_k f2 (g_i^2 - g_j^2).
    """
    T = len(times)
    gamma = np.zeros((T, 4, 4))
    phase = np.zeros((T, 4, 4))
    for k in range(len(omegas)):
        w = omegas[k]
        dg2 = (g[k][:, None] - g[k][None, :]) ** 2
        sq = g[k][:, None] ** 2 - g[k][None, :] ** 2
        wt = w * times
        f1sq = 2.0 * (1.0 - np.cos(wt)) / w**2
        f2 = (wt - np.sin(wt)) / w**2
        gamma += f1sq[:, None, None] * dg2[None] * (0.5 + nbar[k])
        phase += f2[:, None, None] * sq[None]
    return gamma, phase
