# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled time-stepping loop, one trajectory at a time.

Pointwise powers go through dense synthesis/analysis matrices, which covers
intervals and rectangles alike.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, isfinite

cnp.import_array()

cdef enum:
    EULER_ITO = 0
    HEUN_STRAT = 1
    EXP_EULER_ITO = 2


cdef void _nonlin(const double[:] c, double[:] out, const double[:] lam,
                  int n_exp, const double[:, :] S, const double[:, :] Aa,
                  double w, double[:] g, double[:] gp) noexcept nogil:
    cdef Py_ssize_t n = c.shape[0], G = S.shape[0], i, j
    cdef double h1 = 0.0, h2 = 0.0, l2 = 0.0, lpn = 0.0, s, v, p
    cdef int e
    for j in range(n):
        s = c[j] * c[j]
        l2 += s
        h1 += lam[j] * s
        h2 += lam[j] * lam[j] * s
    if n_exp == 1:
        for j in range(n):
            out[j] = (h2 + 2.0 * h1 + l2) * c[j] - c[j]
        return
    for i in range(G):
        v = 0.0
        for j in range(n):
            v += S[i, j] * c[j]
        g[i] = v
        p = v
        for e in range(2 * n_exp - 2):
            p *= v
        gp[i] = p
        lpn += p * v
    lpn *= w
    for j in range(n):
        v = 0.0
        for i in range(G):
            v += Aa[j, i] * gp[i]
        out[j] = (h2 + 2.0 * h1 + lpn) * c[j] - v


cdef void _noise(const double[:] c, const double[:, :] F, double[:] fu,
                 double[:, :] B) noexcept nogil:
    cdef Py_ssize_t N = F.shape[0], n = c.shape[0], k, j
    cdef double s
    for k in range(N):
        s = 0.0
        for j in range(n):
            s += F[k, j] * c[j]
        fu[k] = s
        for j in range(n):
            B[k, j] = F[k, j] - s * c[j]


cdef void _half_ito(const double[:] c, const double[:, :] F, const double[:] fu,
                    const double[:, :] B, double[:] out) noexcept nogil:
    # out += 0.5 * sum_k m_k(c)
    cdef Py_ssize_t N = F.shape[0], n = c.shape[0], k, j
    cdef double fB
    for k in range(N):
        fB = 0.0
        for j in range(n):
            fB += F[k, j] * B[k, j]
        for j in range(n):
            out[j] += 0.5 * (-fB * c[j] - fu[k] * B[k, j])


def integrate(const double[:] mu, const double[:] lam, const double[:, :] F,
              int n_active, int n_exp, const double[:, :] S,
              const double[:, :] Aa, double w, const double[:, :] c0,
              const double[:, :, :] dW, const double[:] dts, int scheme,
              bint renormalize, const long[:] rec_idx, double blowup):
    cdef Py_ssize_t E = c0.shape[0], n = c0.shape[1], N = F.shape[0]
    cdef Py_ssize_t Ssteps = dts.shape[0], G = S.shape[0], R = rec_idx.shape[0]
    cdef Py_ssize_t e, i, j, k, r
    cdef double dt, nrm, dw

    records_np = np.empty((E, R, n))
    fail_np = np.full(E, -1, dtype=np.int64)
    cdef double[:, :, :] records = records_np
    cdef long long[:] fail = fail_np

    cdef double[:] c = np.empty(n)
    cdef double[:] new = np.empty(n)
    cdef double[:] d0 = np.empty(n)
    cdef double[:] d1 = np.empty(n)
    cdef double[:] pred = np.empty(n)
    cdef double[:] noise = np.empty(n)
    cdef double[:] fu = np.empty(N)
    cdef double[:, :] B = np.empty((N, n))
    cdef double[:] g = np.empty(max(G, 1))
    cdef double[:] gp = np.empty(max(G, 1))
    cdef double[:] semi = np.empty(n)
    cdef double last_dt = -1.0

    with nogil:
        for e in range(E):
            for j in range(n):
                c[j] = c0[e, j]
            r = 0
            if rec_idx[0] == 0:
                for j in range(n):
                    records[e, 0, j] = c[j]
                r = 1
            for i in range(Ssteps):
                dt = dts[i]
                _noise(c, F, fu, B)
                for j in range(n):
                    noise[j] = 0.0
                for k in range(N):
                    dw = dW[e, i, k]
                    for j in range(n):
                        noise[j] += dw * B[k, j]
                _nonlin(c, d0, lam, n_exp, S, Aa, w, g, gp)
                if scheme == EULER_ITO:
                    _half_ito(c, F, fu, B, d0)
                    for j in range(n):
                        new[j] = c[j] + dt * (d0[j] - mu[j] * c[j]) + noise[j]
                elif scheme == HEUN_STRAT:
                    for j in range(n):
                        d0[j] = d0[j] - mu[j] * c[j]
                        pred[j] = c[j] + dt * d0[j] + noise[j]
                    for j in range(n_active, n):
                        pred[j] = 0.0
                    _nonlin(pred, d1, lam, n_exp, S, Aa, w, g, gp)
                    for j in range(n):
                        d1[j] = d1[j] - mu[j] * pred[j]
                    _noise(pred, F, fu, B)
                    for j in range(n):
                        new[j] = c[j] + 0.5 * dt * (d0[j] + d1[j]) + 0.5 * noise[j]
                    for k in range(N):
                        dw = 0.5 * dW[e, i, k]
                        for j in range(n):
                            new[j] += dw * B[k, j]
                else:
                    _half_ito(c, F, fu, B, d0)
                    if dt != last_dt:
                        for j in range(n):
                            semi[j] = exp(-dt * mu[j])
                        last_dt = dt
                    for j in range(n):
                        new[j] = semi[j] * (c[j] + dt * d0[j] + noise[j])
                for j in range(n_active, n):
                    new[j] = 0.0
                nrm = 0.0
                for j in range(n):
                    nrm += new[j] * new[j]
                nrm = sqrt(nrm)
                if renormalize:
                    for j in range(n):
                        new[j] = new[j] / nrm
                    nrm = 0.0
                    for j in range(n):
                        nrm += new[j] * new[j]
                    nrm = sqrt(nrm)
                if not isfinite(nrm) or nrm > blowup:
                    fail[e] = i
                    # freeze at the last good state for the remaining records
                    while r < R:
                        for j in range(n):
                            records[e, r, j] = c[j]
                        r += 1
                    break
                for j in range(n):
                    c[j] = new[j]
                if r < R and rec_idx[r] == i + 1:
                    for j in range(n):
                        records[e, r, j] = c[j]
                    r += 1
    return records_np, fail_np
