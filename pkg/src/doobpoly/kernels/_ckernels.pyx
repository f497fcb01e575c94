# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pure``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

cdef double NEG_PIVOT_TOL = 1e-8


cdef inline double ipow(double x, long k) nogil:
    cdef double r = 1.0
    while k > 0:
        if k & 1:
            r *= x
        x *= x
        k >>= 1
    return r


cdef void _eval_row(const long[:, ::1] exps, const double[::1] coefs, const long[::1] owner,
                    const double* x, int nv, double* out, int npoly) nogil:
    cdef Py_ssize_t t, j
    cdef double m
    for j in range(npoly):
        out[j] = 0.0
    for t in range(coefs.shape[0]):
        m = coefs[t]
        for j in range(nv):
            if exps[t, j]:
                m *= ipow(x[j], exps[t, j])
        out[owner[t]] += m


def eval_table(const long[:, ::1] exps, const double[::1] coefs, const long[::1] owner,
               int npoly, X):
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t B = Xv.shape[0], b
    cdef int nv = Xv.shape[1]
    out = np.zeros((B, npoly))
    cdef double[:, ::1] ov = out
    if coefs.shape[0] == 0:
        return out
    with nogil:
        for b in range(B):
            _eval_row(exps, coefs, owner, &Xv[b, 0], nv, &ov[b, 0], npoly)
    return out


def em_propose(X, h, Z, drift, gamma, preds, double jitter):
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef double[:, ::1] Zv = np.ascontiguousarray(Z, dtype=np.float64)
    cdef Py_ssize_t B = Xv.shape[0], b, i, j, k
    cdef int n = Xv.shape[1]
    cdef const long[:, ::1] de = drift[0]
    cdef const double[::1] dc = drift[1]
    cdef const long[::1] do = drift[2]
    cdef const long[:, ::1] ge = gamma[0]
    cdef const double[::1] gc = gamma[1]
    cdef const long[::1] go = gamma[2]
    cdef const long[:, ::1] pe = preds[0]
    cdef const double[::1] pc = preds[1]
    cdef const long[::1] po = preds[2]
    cdef int npred = preds[3]
    Y = np.empty((B, n))
    ok = np.ones(B, dtype=np.uint8)
    cdef double[:, ::1] Yv = Y
    cdef unsigned char[::1] okv = ok
    cdef double[::1] bvec = np.empty(n)
    cdef double[::1] G = np.empty(n * n)
    cdef double[::1] L = np.zeros(n * n)
    cdef double[::1] pv = np.empty(max(npred, 1))
    cdef double s, d, sh, acc
    cdef long bad = 0
    with nogil:
        for b in range(B):
            _eval_row(de, dc, do, &Xv[b, 0], n, &bvec[0], n)
            _eval_row(ge, gc, go, &Xv[b, 0], n, &G[0], n * n)
            for i in range(n * n):
                G[i] *= 2.0
                L[i] = 0.0
            for i in range(n):
                G[i * n + i] += jitter
            for j in range(n):
                s = G[j * n + j]
                for k in range(j):
                    s -= L[j * n + k] * L[j * n + k]
                if s < -NEG_PIVOT_TOL:
                    bad += 1
                d = sqrt(s) if s > 0 else 0.0
                L[j * n + j] = d
                for i in range(j + 1, n):
                    if d > 0:
                        acc = G[i * n + j]
                        for k in range(j):
                            acc -= L[i * n + k] * L[j * n + k]
                        L[i * n + j] = acc / d
                    else:
                        L[i * n + j] = 0.0
            sh = sqrt(hv[b])
            for i in range(n):
                acc = 0.0
                for k in range(i + 1):
                    acc += L[i * n + k] * Zv[b, k]
                Yv[b, i] = Xv[b, i] + bvec[i] * hv[b] + sh * acc
            if npred > 0:
                _eval_row(pe, pc, po, &Yv[b, 0], n, &pv[0], npred)
                for k in range(npred):
                    if not pv[k] > 0:
                        okv[b] = 0
                        break
    return Y, ok.astype(bool), bad


def path_law(PA, int start, int n, int N):
    cdef double[:, ::1] P = np.ascontiguousarray(PA, dtype=np.float64)
    cdef int k = P.shape[0]
    if N == 0:
        return np.ones(())
    out = np.zeros(int(k) ** n if n > 0 else 1)
    cdef double[::1] ov = out
    cdef long[::1] path = np.zeros(N, dtype=np.int64)
    cdef double[::1] prod = np.empty(N + 1)
    cdef Py_ssize_t level, i
    cdef long idx
    prod[0] = 1.0
    # odometer over all k^N paths, refreshing prefix products from the
    # lowest changed position
    level = 0
    with nogil:
        while True:
            for i in range(level, N):
                prod[i + 1] = prod[i] * P[start if i == 0 else path[i - 1], path[i]]
            idx = 0
            for i in range(n):
                idx = idx * k + path[i]
            ov[idx] += prod[N]
            i = N - 1
            while i >= 0 and path[i] == k - 1:
                path[i] = 0
                i -= 1
            if i < 0:
                break
            path[i] += 1
            level = i
    return out.reshape((k,) * n) if n > 0 else out.reshape(())
