# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled product-vector ascent kernel.

Same objective, update rule and stopping rule as ``_pure.ascend``; rows are
processed one at a time so each restart stops as soon as it converges.
Both Hermitian operators are factored once as ``U diag(w) U†`` with the
null space dropped, so a product with them costs ``O(dim * rank)``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY

cnp.import_array()

# eigenvalues below this fraction of the largest are treated as null space
NULL_TOL = 1e-13


cdef inline double cabs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline double complex monomial(const double complex* pw, Py_ssize_t stride,
                                    const long* exps, Py_ssize_t n, Py_ssize_t drop) nogil:
    # prod_l pw[l, exps[l] - (l == drop)]; raw pointers avoid memoryview refcounting
    cdef Py_ssize_t l, e
    cdef double complex acc = 1.0
    for l in range(n):
        e = exps[l]
        if l == drop:
            e -= 1
        acc = acc * pw[l * stride + e]
    return acc


cdef double apply_factored(double complex[:, ::1] u, double[::1] ev,
                          double complex[::1] v, double complex[::1] t,
                          double complex[::1] out) nogil:
    # out = U diag(ev) U† v, returns <v|out>
    cdef Py_ssize_t dim = u.shape[0]
    cdef Py_ssize_t rank = u.shape[1]
    cdef Py_ssize_t i, a
    cdef double complex acc
    cdef double val = 0.0
    for a in range(rank):
        t[a] = 0.0
    for i in range(dim):
        for a in range(rank):
            t[a] = t[a] + u[i, a].conjugate() * v[i]
    for a in range(rank):
        val += ev[a] * cabs2(t[a])
        t[a] = ev[a] * t[a]
    for i in range(dim):
        acc = 0.0
        for a in range(rank):
            acc = acc + u[i, a] * t[a]
        out[i] = acc
    return val


cdef double evaluate_row(double complex[:, ::1] u_sym, double[::1] ev_sym,
                         double complex[:, ::1] u_pt, double[::1] ev_pt,
                         bint use_pt,
                         const long[:, ::1] exps_k, const double[::1] coef_k,
                         const long[:, ::1] exps_km1, const double[::1] coef_km1,
                         double complex[::1] f, double complex[::1] grad,
                         double complex[:, ::1] pw, double complex[:, ::1] pwc,
                         double complex[::1] c, double complex[::1] w,
                         double complex[::1] d, double complex[::1] x,
                         double complex[::1] y, double complex[::1] t) nogil:
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t s1 = exps_k.shape[0]
    cdef Py_ssize_t s2 = exps_km1.shape[0]
    cdef Py_ssize_t kmax = pw.shape[1] - 1
    cdef Py_ssize_t j, p, m, a
    cdef double complex acc, fb
    cdef Py_ssize_t st = pw.shape[1]
    cdef const double complex* ppw = &pw[0, 0]
    cdef const double complex* ppwc = &pwc[0, 0]
    cdef const long* pek = &exps_k[0, 0]
    cdef const long* pek1 = &exps_km1[0, 0]
    cdef double g1 = 0.0, g2 = 0.0

    for j in range(n):
        pw[j, 0] = 1.0
        pwc[j, 0] = 1.0
        fb = f[j].conjugate()
        for p in range(1, kmax + 1):
            pw[j, p] = pw[j, p - 1] * f[j]
            pwc[j, p] = pwc[j, p - 1] * fb

    for m in range(s1):
        c[m] = coef_k[m] * monomial(ppw, st, pek + m * n, n, -1)
    g1 = apply_factored(u_sym, ev_sym, c, t, w)
    for j in range(n):
        acc = 0.0
        for m in range(s1):
            if exps_k[m, j] > 0:
                acc = acc + coef_k[m] * exps_k[m, j] * monomial(ppwc, st, pek + m * n, n, j) * w[m]
        grad[j] = acc

    if not use_pt:
        return g1

    for m in range(s2):
        d[m] = coef_km1[m] * monomial(ppw, st, pek1 + m * n, n, -1)
    for a in range(n):
        fb = f[a].conjugate()
        for m in range(s2):
            x[a * s2 + m] = fb * d[m]
    g2 = apply_factored(u_pt, ev_pt, x, t, y)
    for j in range(n):
        acc = 0.0
        for m in range(s2):
            if exps_km1[m, j] > 0:
                fb = coef_km1[m] * exps_km1[m, j] * monomial(ppwc, st, pek1 + m * n, n, j)
                for a in range(n):
                    acc = acc + f[a] * fb * y[a * s2 + m]
        fb = 0.0
        for m in range(s2):
            fb = fb + d[m].conjugate() * y[j * s2 + m]
        grad[j] = 0.5 * (grad[j] + acc + fb.conjugate())
    return 0.5 * (g1 + g2)


def _factor(q):
    q = np.asarray(q, dtype=complex)
    w, v = np.linalg.eigh(0.5 * (q + q.conj().T))
    scale = float(np.abs(w).max()) if w.size else 0.0
    keep = np.abs(w) > NULL_TOL * scale
    if not keep.any():
        keep[-1] = True
    return np.ascontiguousarray(v[:, keep]), np.ascontiguousarray(w[keep])


def ascend(q_sym, q_pt, exps_k, coef_k, exps_km1, coef_km1, f0,
           long max_iter, double g_tol, double step_tol, double shift):
    cdef bint use_pt = q_pt is not None
    us_arr, ws_arr = _factor(q_sym)
    up_arr, wp_arr = _factor(q_pt) if use_pt else (np.zeros((1, 1), dtype=complex), np.zeros(1))
    cdef double complex[:, ::1] us = us_arr
    cdef double[::1] ws = ws_arr
    cdef double complex[:, ::1] up = up_arr
    cdef double[::1] wp = wp_arr
    cdef const long[:, ::1] ek = np.ascontiguousarray(exps_k, dtype=np.int_)
    cdef const double[::1] ck = np.ascontiguousarray(coef_k, dtype=float)
    cdef const long[:, ::1] ek1 = np.ascontiguousarray(exps_km1, dtype=np.int_)
    cdef const double[::1] ck1 = np.ascontiguousarray(coef_km1, dtype=float)

    f_out = np.array(f0, dtype=complex, copy=True, order="C")
    f_out /= np.linalg.norm(f_out, axis=1, keepdims=True)
    g_out = np.empty(f_out.shape[0], dtype=float)
    it_out = np.zeros(f_out.shape[0], dtype=np.int64)
    cdef double complex[:, ::1] F = f_out
    cdef double[::1] G = g_out
    cdef cnp.int64_t[::1] IT = it_out

    cdef Py_ssize_t n = F.shape[1]
    cdef Py_ssize_t s1 = ek.shape[0]
    cdef Py_ssize_t s2 = ek1.shape[0]
    cdef Py_ssize_t kmax = 0
    cdef Py_ssize_t j, r, it
    for j in range(n):
        kmax += ek[0, j]

    cdef double complex[::1] f = np.empty(n, dtype=complex)
    cdef double complex[::1] grad = np.empty(n, dtype=complex)
    cdef double complex[::1] new = np.empty(n, dtype=complex)
    cdef double complex[:, ::1] pw = np.empty((n, kmax + 1), dtype=complex)
    cdef double complex[:, ::1] pwc = np.empty((n, kmax + 1), dtype=complex)
    cdef double complex[::1] c = np.empty(s1, dtype=complex)
    cdef double complex[::1] w = np.empty(s1, dtype=complex)
    cdef double complex[::1] d = np.empty(s2, dtype=complex)
    cdef double complex[::1] x = np.empty(n * s2, dtype=complex)
    cdef double complex[::1] y = np.empty(n * s2, dtype=complex)
    cdef double complex[::1] t = np.empty(max(us.shape[1], up.shape[1]), dtype=complex)

    cdef double g, g_prev, norm, mag, moved
    cdef double complex overlap, phase

    with nogil:
        for r in range(F.shape[0]):
            for j in range(n):
                f[j] = F[r, j]
            g_prev = -INFINITY
            for it in range(max_iter):
                g = evaluate_row(us, ws, up, wp, use_pt, ek, ck, ek1, ck1, f, grad,
                                 pw, pwc, c, w, d, x, y, t)
                norm = 0.0
                for j in range(n):
                    new[j] = grad[j] + shift * f[j]
                    norm += cabs2(new[j])
                norm = sqrt(norm)
                if norm == 0.0:
                    IT[r] += 1
                    break
                overlap = 0.0
                for j in range(n):
                    new[j] = new[j] / norm
                    overlap = overlap + new[j].conjugate() * f[j]
                mag = sqrt(cabs2(overlap))
                phase = overlap / mag if mag > 0.0 else 1.0
                moved = 0.0
                for j in range(n):
                    moved += cabs2(new[j] * phase - f[j])
                    f[j] = new[j]
                moved = sqrt(moved)
                IT[r] += 1
                if fabs(g - g_prev) < g_tol and moved < step_tol:
                    break
                g_prev = g
            G[r] = evaluate_row(us, ws, up, wp, use_pt, ek, ck, ek1, ck1, f, grad,
                                pw, pwc, c, w, d, x, y, t)
            for j in range(n):
                F[r, j] = f[j]
    return f_out, g_out, it_out
