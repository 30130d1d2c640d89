# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: interaction-frame RK4 and thermal-shield channel sums."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sinh, cosh, sqrt, fabs, ceil

cnp.import_array()


cdef inline double _sinc(double x) nogil:
    if fabs(x) > 1e-4:
        return sin(x) / x
    return 1.0 - x * x / 6.0


cdef inline double _sinhc(double x) nogil:
    if fabs(x) > 1e-4:
        return sinh(x) / x
    return 1.0 + x * x / 6.0


cdef void _frame(double[:, :, ::1] blocks, double[::1] w2, double s,
                 double[:, ::1] R, double[:, ::1] Ri, double[:, ::1] F) noexcept nogil:
    cdef Py_ssize_t nm = blocks.shape[0]
    cdef Py_ssize_t m, a, b
    cdef double f0, f1, f2, w
    for m in range(nm):
        if w2[m] >= 0:
            w = sqrt(w2[m])
            f0 = cos(w * s)
            f1 = s * _sinc(w * s)
            f2 = 0.5 * s * s * _sinc(0.5 * w * s) ** 2
        else:
            w = sqrt(-w2[m])
            f0 = cosh(w * s)
            f1 = s * _sinhc(w * s)
            f2 = 0.5 * s * s * _sinhc(0.5 * w * s) ** 2
        for a in range(2):
            for b in range(2):
                R[2 * m + a, 2 * m + b] = f1 * blocks[m, a, b]
                Ri[2 * m + a, 2 * m + b] = -f1 * blocks[m, a, b]
                F[2 * m + a, 2 * m + b] = f2 * blocks[m, a, b]
            R[2 * m + a, 2 * m + a] += f0
            Ri[2 * m + a, 2 * m + a] += f0
            F[2 * m + a, 2 * m + a] += f1


cdef void _block_conj(double[:, ::1] Ri, double[:, ::1] K1, double[:, ::1] R,
                      double[:, ::1] A, Py_ssize_t n) noexcept nogil:
    """A = Ri K1 R exploiting the 2x2 block-diagonal structure of Ri and R."""
    cdef Py_ssize_t i, j, bi, bj, a, b
    cdef double acc
    cdef double tmp[2][2]
    for bi in range(0, n, 2):
        for bj in range(0, n, 2):
            for a in range(2):
                for b in range(2):
                    tmp[a][b] = K1[bi + a, bj] * R[bj, bj + b] + K1[bi + a, bj + 1] * R[bj + 1, bj + b]
            for a in range(2):
                for b in range(2):
                    A[bi + a, bj + b] = Ri[bi + a, bi] * tmp[0][b] + Ri[bi + a, bi + 1] * tmp[1][b]


cdef void _rhs(double s, double[:, ::1] Phi, double[:, ::1] Hd, double[:, ::1] Sig,
               double[:, :, ::1] blocks, double[::1] w2, double[:, ::1] K1, double[::1] b_ref,
               double[:, ::1] drives, int ref_col, double[:, ::1] D, bint has_diff,
               double[:, ::1] R, double[:, ::1] Ri, double[:, ::1] F, double[:, ::1] A,
               double[::1] vtmp, double[::1] vtmp2, double[:, ::1] Btmp, double[:, ::1] Mtmp,
               double[:, ::1] dPhi, double[:, ::1] dH, double[:, ::1] dSig) noexcept nogil:
    cdef Py_ssize_t n = K1.shape[0]
    cdef Py_ssize_t m = drives.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc
    _frame(blocks, w2, s, R, Ri, F)
    _block_conj(Ri, K1, R, A, n)
    for i in range(n):
        for j in range(m):
            Btmp[i, j] = drives[i, j]
    if ref_col >= 0:
        for i in range(n):
            acc = 0.0
            for k in range(n):
                acc = acc + F[i, k] * b_ref[k]
            vtmp[i] = acc
        for i in range(n):
            acc = 0.0
            for k in range(n):
                acc = acc + K1[i, k] * vtmp[k]
            Btmp[i, ref_col] += acc
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc = acc + A[i, k] * Phi[k, j]
            dPhi[i, j] = acc
        for j in range(m):
            acc = 0.0
            for k in range(n):
                acc = acc + A[i, k] * Hd[k, j] + Ri[i, k] * Btmp[k, j]
            dH[i, j] = acc
    if has_diff:
        # Mtmp = Ri D, then D_I = Mtmp Ri^T
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for k in range(n):
                    acc = acc + Ri[i, k] * D[k, j]
                Mtmp[i, j] = acc
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for k in range(n):
                    acc = acc + A[i, k] * Sig[k, j] + Sig[i, k] * A[j, k] + Mtmp[i, k] * Ri[j, k]
                dSig[i, j] = acc


def rk4_interaction(blocks, w2, K1, b_ref, drives, int ref_col, D, bint has_diff, times, double h_max):
    cdef double[:, :, ::1] bl = np.ascontiguousarray(blocks, dtype=np.float64)
    cdef double[::1] w2v = np.ascontiguousarray(w2, dtype=np.float64)
    cdef double[:, ::1] K = np.ascontiguousarray(K1, dtype=np.float64)
    cdef double[::1] br = np.ascontiguousarray(b_ref, dtype=np.float64)
    cdef double[:, ::1] dr = np.ascontiguousarray(drives, dtype=np.float64)
    cdef double[:, ::1] Dm = np.ascontiguousarray(D, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    cdef Py_ssize_t n = K.shape[0]
    cdef Py_ssize_t m = dr.shape[1]
    cdef Py_ssize_t T = tv.shape[0]
    out_phi = np.zeros((T, n, n))
    out_h = np.zeros((T, n, m))
    out_sig = np.zeros((T, n, n))
    cdef double[:, :, ::1] op = out_phi
    cdef double[:, :, ::1] oh = out_h
    cdef double[:, :, ::1] osg = out_sig
    cdef double[:, ::1] Phi = np.eye(n)
    cdef double[:, ::1] Hd = np.zeros((n, m))
    cdef double[:, ::1] Sig = np.zeros((n, n))
    cdef double[:, ::1] P2 = np.zeros((n, n))
    cdef double[:, ::1] H2 = np.zeros((n, m))
    cdef double[:, ::1] S2 = np.zeros((n, n))
    cdef double[:, :, ::1] kP = np.zeros((4, n, n))
    cdef double[:, :, ::1] kH = np.zeros((4, n, m))
    cdef double[:, :, ::1] kS = np.zeros((4, n, n))
    cdef double[:, ::1] R = np.zeros((n, n))
    cdef double[:, ::1] Ri = np.zeros((n, n))
    cdef double[:, ::1] F = np.zeros((n, n))
    cdef double[:, ::1] A = np.zeros((n, n))
    cdef double[:, ::1] Btmp = np.zeros((n, m))
    cdef double[:, ::1] Mtmp = np.zeros((n, n))
    cdef double[::1] vtmp = np.zeros(n)
    cdef double[::1] vtmp2 = np.zeros(n)
    cdef double s = 0.0, h, span, c, tn
    cdef Py_ssize_t j, step, nsteps, st, i, k
    cdef double coef[4]
    cdef double wts[4]
    coef[0] = 0.0; coef[1] = 0.5; coef[2] = 0.5; coef[3] = 1.0
    wts[0] = 1.0; wts[1] = 2.0; wts[2] = 2.0; wts[3] = 1.0
    with nogil:
        for j in range(T):
            tn = tv[j]
            span = tn - s
            nsteps = 0
            if span > 0:
                nsteps = <Py_ssize_t> ceil(span / h_max - 1e-12)
                if nsteps < 1:
                    nsteps = 1
            h = span / nsteps if nsteps > 0 else 0.0
            for step in range(nsteps):
                for st in range(4):
                    c = coef[st] * h
                    for i in range(n):
                        for k in range(n):
                            if st == 0:
                                P2[i, k] = Phi[i, k]
                                S2[i, k] = Sig[i, k]
                            else:
                                P2[i, k] = Phi[i, k] + c * kP[st - 1, i, k]
                                S2[i, k] = Sig[i, k] + c * kS[st - 1, i, k]
                        for k in range(m):
                            if st == 0:
                                H2[i, k] = Hd[i, k]
                            else:
                                H2[i, k] = Hd[i, k] + c * kH[st - 1, i, k]
                    _rhs(s + c, P2, H2, S2, bl, w2v, K, br, dr, ref_col, Dm, has_diff,
                         R, Ri, F, A, vtmp, vtmp2, Btmp, Mtmp, kP[st], kH[st], kS[st])
                for i in range(n):
                    for k in range(n):
                        Phi[i, k] += h / 6.0 * (kP[0, i, k] + 2 * kP[1, i, k] + 2 * kP[2, i, k] + kP[3, i, k])
                        if has_diff:
                            Sig[i, k] += h / 6.0 * (kS[0, i, k] + 2 * kS[1, i, k] + 2 * kS[2, i, k] + kS[3, i, k])
                    for k in range(m):
                        Hd[i, k] += h / 6.0 * (kH[0, i, k] + 2 * kH[1, i, k] + 2 * kH[2, i, k] + kH[3, i, k])
                s += h
            s = tn
            for i in range(n):
                for k in range(n):
                    op[j, i, k] = Phi[i, k]
                    osg[j, i, k] = Sig[i, k]
                for k in range(m):
                    oh[j, i, k] = Hd[i, k]
    return out_phi, out_h, out_sig


def shield_decoherence(g, omegas, nbar, times):
    cdef double[:, ::1] gv = np.ascontiguousarray(g, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(omegas, dtype=np.float64)
    cdef double[::1] nv = np.ascontiguousarray(nbar, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    cdef Py_ssize_t T = tv.shape[0]
    cdef Py_ssize_t K = wv.shape[0]
    gamma = np.zeros((T, 4, 4))
    phase = np.zeros((T, 4, 4))
    cdef double[:, :, ::1] ga = gamma
    cdef double[:, :, ::1] ph = phase
    cdef Py_ssize_t t, k, i, j
    cdef double w, wt, f1sq, f2, d
    with nogil:
        for t in range(T):
            for k in range(K):
                w = wv[k]
                wt = w * tv[t]
                f1sq = 2.0 * (1.0 - cos(wt)) / (w * w)
                f2 = (wt - sin(wt)) / (w * w)
                for i in range(4):
                    for j in range(4):
                        d = gv[k, i] - gv[k, j]
                        ga[t, i, j] += f1sq * d * d * (0.5 + nv[k])
                        ph[t, i, j] += f2 * (gv[k, i] * gv[k, i] - gv[k, j] * gv[k, j])
    return gamma, phase
