# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the hot inner loops.

Signatures mirror ``fallback.py`` one to one; the backend-agreement tests
compare the two on random inputs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, isnan, sqrt

cnp.import_array()


def csr_matvec(const long long[::1] indptr, const long long[::1] indices,
               const double[::1] data, const double[::1] x, double[::1] out):
    cdef Py_ssize_t nrows = indptr.shape[0] - 1
    cdef Py_ssize_t i, p
    cdef double acc
    for i in range(nrows):
        acc = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            acc += data[p] * x[indices[p]]
        out[i] = acc
    return np.asarray(out)


def csr_matvec_t(const long long[::1] indptr, const long long[::1] indices,
                 const double[::1] data, const double[::1] y, double[::1] out):
    cdef Py_ssize_t nrows = indptr.shape[0] - 1
    cdef Py_ssize_t i, p
    cdef double yi
    out[:] = 0.0
    for i in range(nrows):
        yi = y[i]
        if yi != 0.0:
            for p in range(indptr[i], indptr[i + 1]):
                out[indices[p]] += data[p] * yi
    return np.asarray(out)


def csr_solve_lower(const long long[::1] indptr, const long long[::1] indices,
                    const double[::1] data, const long long[::1] diag_pos,
                    const double[::1] b, double[::1] out, int transposed):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, p
    cdef double acc, xi
    if not transposed:
        for i in range(n):
            acc = b[i]
            for p in range(indptr[i], diag_pos[i]):
                acc -= data[p] * out[indices[p]]
            out[i] = acc / data[diag_pos[i]]
    else:
        for i in range(n):
            out[i] = b[i]
        for i in range(n - 1, -1, -1):
            xi = out[i] / data[diag_pos[i]]
            out[i] = xi
            for p in range(indptr[i], diag_pos[i]):
                out[indices[p]] -= data[p] * xi
    return np.asarray(out)


cdef inline void _givens(double a, double b, double* c, double* s, double* r) noexcept nogil:
    cdef double tau
    if b == 0.0:
        c[0] = 1.0
        s[0] = 0.0
        r[0] = a
    elif a == 0.0:
        c[0] = 0.0
        s[0] = 1.0
        r[0] = b
    elif fabs(b) > fabs(a):
        tau = a / b
        s[0] = 1.0 / sqrt(1.0 + tau * tau)
        if b < 0.0:
            s[0] = -s[0]
        c[0] = s[0] * tau
        r[0] = b / s[0]
    else:
        tau = b / a
        c[0] = 1.0 / sqrt(1.0 + tau * tau)
        if a < 0.0:
            c[0] = -c[0]
        s[0] = c[0] * tau
        r[0] = a / c[0]


def qr_rank1_update(double[:, ::1] q, double[:, ::1] r,
                    const double[::1] u, const double[::1] v, double[::1] w):
    """In-place Q R <- Q R + u v^T via two Givens sweeps."""
    cdef Py_ssize_t s = q.shape[0]
    cdef Py_ssize_t i, j, col
    cdef double c, sn, rad, acc, ti, tj
    for i in range(s):
        acc = 0.0
        for j in range(s):
            acc += q[j, i] * u[j]
        w[i] = acc
    for i in range(s - 2, -1, -1):
        if w[i + 1] == 0.0:
            continue
        _givens(w[i], w[i + 1], &c, &sn, &rad)
        w[i] = rad
        w[i + 1] = 0.0
        for col in range(i, s):
            ti = r[i, col]
            tj = r[i + 1, col]
            r[i, col] = c * ti + sn * tj
            r[i + 1, col] = -sn * ti + c * tj
        for j in range(s):
            ti = q[j, i]
            tj = q[j, i + 1]
            q[j, i] = c * ti + sn * tj
            q[j, i + 1] = -sn * ti + c * tj
    for col in range(s):
        r[0, col] += w[0] * v[col]
    for i in range(s - 1):
        if r[i + 1, i] == 0.0:
            continue
        _givens(r[i, i], r[i + 1, i], &c, &sn, &rad)
        for col in range(i, s):
            ti = r[i, col]
            tj = r[i + 1, col]
            r[i, col] = c * ti + sn * tj
            r[i + 1, col] = -sn * ti + c * tj
        r[i, i] = rad
        r[i + 1, i] = 0.0
        for j in range(s):
            ti = q[j, i]
            tj = q[j, i + 1]
            q[j, i] = c * ti + sn * tj
            q[j, i + 1] = -sn * ti + c * tj


def linf_ratio_test(const double[::1] residual, const double[::1] t, double gamma,
                    const cnp.uint8_t[::1] excluded):
    """Blocking step for the max-norm solver; see the fallback docstring."""
    cdef Py_ssize_t m = residual.shape[0]
    cdef Py_ssize_t i
    cdef double best_lo = -INFINITY, best_hi = -INFINITY
    cdef Py_ssize_t idx_lo = -1, idx_hi = -1
    cdef double den, num, ratio
    for i in range(m):
        if excluded[i]:
            continue
        den = t[i] - 1.0
        if den < 0.0:
            num = residual[i] + gamma
            if num < 0.0:
                num = 0.0
            ratio = num / den
            if ratio > best_lo:
                best_lo = ratio
                idx_lo = i
        den = -(t[i] + 1.0)
        if den < 0.0:
            num = gamma - residual[i]
            if num < 0.0:
                num = 0.0
            ratio = num / den
            if ratio > best_hi:
                best_hi = ratio
                idx_hi = i
    if idx_lo < 0 and idx_hi < 0:
        return np.nan, -1, 0
    if idx_hi < 0 or (idx_lo >= 0 and best_lo >= best_hi):
        return min(best_lo, 0.0), idx_lo, -1
    return min(best_hi, 0.0), idx_hi, 1


def l1_ratio_pos_min(const double[::1] residual, const double[::1] w,
                     const cnp.uint8_t[::1] nonbasic):
    cdef Py_ssize_t m = residual.shape[0]
    cdef Py_ssize_t i, idx = -1
    cdef double best = INFINITY, ratio
    for i in range(m):
        if not nonbasic[i]:
            continue
        # strictly positive ratio needs strictly matching signs
        if (residual[i] > 0.0 and w[i] > 0.0) or (residual[i] < 0.0 and w[i] < 0.0):
            ratio = residual[i] / w[i]
            if ratio > 0.0 and ratio < best:
                best = ratio
                idx = i
    if idx < 0:
        return np.nan, -1
    return best, idx


def l1_ratio_neg_max(const double[::1] residual, const double[::1] w,
                     const cnp.uint8_t[::1] nonbasic):
    cdef Py_ssize_t m = residual.shape[0]
    cdef Py_ssize_t i, idx = -1
    cdef double best = -INFINITY, ratio
    for i in range(m):
        if not nonbasic[i]:
            continue
        if (residual[i] > 0.0 and w[i] < 0.0) or (residual[i] < 0.0 and w[i] > 0.0):
            ratio = residual[i] / w[i]
            if ratio < 0.0 and ratio > best:
                best = ratio
                idx = i
    if idx < 0:
        return np.nan, -1
    return best, idx
