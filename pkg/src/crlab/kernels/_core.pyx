# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-degree log-sum-exp kernels for monomial norms and diagonals."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, INFINITY

cnp.import_array()

# terms this far below the running maximum contribute < 1e-21 and are skipped
DEF CUTOFF = -50.0


def log_moments(double[::1] lu, double[::1] lv, double[:, ::1] C):
    """Flat graded table of ``log sum_i exp(a1*lu_i + (k-a1)*lv_i + C[k, i])``."""
    cdef Py_ssize_t n = lu.shape[0]
    cdef Py_ssize_t K = C.shape[0] - 1
    cdef Py_ssize_t k, a1, i, base
    cdef double m, acc, t
    out_arr = np.empty((K + 1) * (K + 2) // 2)
    cdef double[::1] out = out_arr
    buf_arr = np.empty(n)
    cdef double[::1] buf = buf_arr
    diff_arr = np.empty(n)
    cdef double[::1] diff = diff_arr
    for i in range(n):
        diff[i] = lu[i] - lv[i]
    for k in range(K + 1):
        base = k * (k + 1) // 2
        for i in range(n):
            buf[i] = k * lv[i] + C[k, i]
        for a1 in range(k + 1):
            if a1 > 0:
                for i in range(n):
                    buf[i] += diff[i]
            m = -INFINITY
            for i in range(n):
                if buf[i] > m:
                    m = buf[i]
            acc = 0.0
            for i in range(n):
                t = buf[i] - m
                if t > CUTOFF:
                    acc += exp(t)
            out[base + a1] = m + log(acc)
    return out_arr


def diagonal_log_sums(double[::1] lr1, double[::1] lr2, double[::1] lognorms, Py_ssize_t K):
    """Per-degree ``log sum_{a1} r1^a1 r2^a2 / N_a`` for each point.

    ``lr1``/``lr2`` may be ``-inf`` on the axes; ``0 * -inf`` is taken as 0.
    """
    cdef Py_ssize_t P = lr1.shape[0]
    cdef Py_ssize_t p, k, a1, base
    cdef double x1, x2, m, acc, t, e1, e2
    out_arr = np.empty((P, K + 1))
    cdef double[:, ::1] out = out_arr
    buf_arr = np.empty(K + 1)
    cdef double[::1] buf = buf_arr
    for p in range(P):
        x1 = lr1[p]
        x2 = lr2[p]
        for k in range(K + 1):
            base = k * (k + 1) // 2
            m = -INFINITY
            for a1 in range(k + 1):
                e1 = a1 * x1 if a1 > 0 else 0.0
                e2 = (k - a1) * x2 if k > a1 else 0.0
                t = e1 + e2 - lognorms[base + a1]
                buf[a1] = t
                if t > m:
                    m = t
            if m == -INFINITY:
                out[p, k] = -INFINITY
                continue
            acc = 0.0
            for a1 in range(k + 1):
                t = buf[a1] - m
                if t > CUTOFF:
                    acc += exp(t)
            out[p, k] = m + log(acc)
    return out_arr
