# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``.

Signatures and results match the numpy fallback; only the loops differ.
The matrices in this package are small (tens of rows), where per-call
numpy overhead dominates, so plain triple loops win.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def krylov(A, B, Py_ssize_t k):
    cdef const double[:, ::1] a = np.ascontiguousarray(A, dtype=np.float64)
    cdef const double[:, ::1] b = np.ascontiguousarray(B, dtype=np.float64)
    cdef Py_ssize_t n = b.shape[0], m = b.shape[1]
    out_arr = np.empty((n, k * m))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, r, c, s, col, prev
    cdef double acc
    if k == 0:
        return out_arr
    for r in range(n):
        for c in range(m):
            out[r, c] = b[r, c]
    for i in range(1, k):
        for c in range(m):
            col = i * m + c
            prev = col - m
            for r in range(n):
                acc = 0.0
                for s in range(n):
                    acc += a[r, s] * out[s, prev]
                out[r, col] = acc
    return out_arr


def lti_rollout(A, B, x0, U):
    cdef const double[:, ::1] a = np.ascontiguousarray(A, dtype=np.float64)
    cdef const double[:, ::1] b = np.ascontiguousarray(B, dtype=np.float64)
    cdef const double[:, ::1] u = np.ascontiguousarray(U, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0], m = b.shape[1], T = u.shape[0]
    X_arr = np.empty((T + 1, n))
    cdef double[:, ::1] X = X_arr
    cdef const double[::1] x0v = np.ascontiguousarray(x0, dtype=np.float64)
    cdef Py_ssize_t t, r, s
    cdef double acc
    for r in range(n):
        X[0, r] = x0v[r]
    for t in range(T):
        for r in range(n):
            acc = 0.0
            for s in range(n):
                acc += a[r, s] * X[t, s]
            for s in range(m):
                acc += b[r, s] * u[t, s]
            X[t + 1, r] = acc
    return X_arr


def network_rollout(pack, x0, U):
    cdef const long long[::1] nd = pack.n_dims, md = pack.m_dims, pd = pack.p_dims
    cdef const long long[::1] xo = pack.x_off, po = pack.p_off, uo = pack.u_off
    cdef const long long[::1] ao = pack.a_off, bo = pack.b_off, co = pack.c_off
    cdef const long long[::1] gto = pack.g_to, gfrom = pack.g_from, go = pack.g_off
    cdef const double[::1] Af = pack.A_flat, Bf = pack.B_flat, Cf = pack.C_flat, Gf = pack.G_flat
    cdef Py_ssize_t nf = pack.n_followers
    cdef const double[:, ::1] u = np.ascontiguousarray(U, dtype=np.float64)
    cdef Py_ssize_t N = nd.shape[0], G = gto.shape[0], T = u.shape[0]
    cdef Py_ssize_t n_tot = xo[N], p_tot = po[N]

    X_arr = np.empty((T + 1, n_tot))
    W_arr = np.empty((T + 1, p_tot))
    cdef double[:, ::1] X = X_arr
    cdef double[:, ::1] W = W_arr
    cdef const double[::1] x0v = np.ascontiguousarray(x0, dtype=np.float64)
    cdef Py_ssize_t max_m = 0
    cdef Py_ssize_t t, i, j, g, r, s, ni, mi, pj
    cdef double acc
    for i in range(N):
        if md[i] > max_m:
            max_m = md[i]
    cdef double[::1] v = np.zeros(max_m)

    for r in range(n_tot):
        X[0, r] = x0v[r]
    for t in range(T + 1):
        for j in range(N):
            ni = nd[j]
            for r in range(pd[j]):
                acc = 0.0
                for s in range(ni):
                    acc += Cf[co[j] + r * ni + s] * X[t, xo[j] + s]
                W[t, po[j] + r] = acc
        if t == T:
            break
        g = 0
        for i in range(N):
            ni = nd[i]
            mi = md[i]
            if i < nf:
                for r in range(mi):
                    v[r] = 0.0
                # gain blocks are sorted by target, so scan forward
                while g < G and gto[g] < i:
                    g += 1
                while g < G and gto[g] == i:
                    j = gfrom[g]
                    pj = pd[j]
                    for r in range(mi):
                        acc = 0.0
                        for s in range(pj):
                            acc += Gf[go[g] + r * pj + s] * W[t, po[j] + s]
                        v[r] += acc
                    g += 1
            else:
                for r in range(mi):
                    v[r] = u[t, uo[i] + r]
            for r in range(ni):
                acc = 0.0
                for s in range(ni):
                    acc += Af[ao[i] + r * ni + s] * X[t, xo[i] + s]
                for s in range(mi):
                    acc += Bf[bo[i] + r * mi + s] * v[s]
                X[t + 1, xo[i] + r] = acc
    return X_arr, W_arr
