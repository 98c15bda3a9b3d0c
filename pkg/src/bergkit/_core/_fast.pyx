# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: power-series evaluation and batched power moments.

All series in this package have nonnegative real coefficients evaluated at
either real points in [0, 1) or complex points in the unit disc, so only
those two cases are implemented.  Running powers are resynchronized from
exp/log periodically to keep the multiplicative drift below ~1e-13 even for
series with several hundred thousand terms.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, cos, exp, hypot, log, pow, sin

cnp.import_array()

DEF RESYNC = 4096


def poly_eval_d(double[::1] coeffs, double[::1] x):
    """sum_n coeffs[n] * x**n for each entry of x (forward accumulation)."""
    cdef Py_ssize_t n = coeffs.shape[0], m = x.shape[0]
    out_arr = np.zeros(m, dtype=np.float64)
    p_arr = np.ones(m, dtype=np.float64)
    cdef double[::1] acc = out_arr
    cdef double[::1] p = p_arr
    cdef Py_ssize_t i, k
    cdef double c, xi
    for i in range(n):
        c = coeffs[i]
        if i > 0 and (i % RESYNC) == 0:
            for k in range(m):
                p[k] = pow(x[k], <double> i)
        if c != 0.0:
            for k in range(m):
                acc[k] += c * p[k]
        for k in range(m):
            p[k] *= x[k]
    return out_arr


def poly_eval_z(double[::1] coeffs, double[::1] zr, double[::1] zi):
    """sum_n coeffs[n] * z**n for complex z given as (re, im) arrays."""
    cdef Py_ssize_t n = coeffs.shape[0], m = zr.shape[0]
    ar_arr = np.zeros(m, dtype=np.float64)
    ai_arr = np.zeros(m, dtype=np.float64)
    pr_arr = np.ones(m, dtype=np.float64)
    pi_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] ar = ar_arr, ai = ai_arr, pr = pr_arr, pi = pi_arr
    cdef Py_ssize_t i, k
    cdef double c, tr, rad, th
    for i in range(n):
        c = coeffs[i]
        if i > 0 and (i % RESYNC) == 0:
            for k in range(m):
                rad = hypot(zr[k], zi[k])
                if rad == 0.0:
                    pr[k] = 0.0
                    pi[k] = 0.0
                else:
                    th = atan2(zi[k], zr[k]) * i
                    rad = exp(log(rad) * i)
                    pr[k] = rad * cos(th)
                    pi[k] = rad * sin(th)
        if c != 0.0:
            for k in range(m):
                ar[k] += c * pr[k]
                ai[k] += c * pi[k]
        for k in range(m):
            tr = pr[k] * zr[k] - pi[k] * zi[k]
            pi[k] = pr[k] * zi[k] + pi[k] * zr[k]
            pr[k] = tr
    return ar_arr + 1j * ai_arr


def power_moments_d(double[::1] r, double[::1] w, long n0, long count):
    """m[j] = sum_k w[k] * r[k]**(n0 + j) for j = 0..count-1.

    r entries must lie in [0, 1); typical use is quadrature nodes against
    precomputed weights, giving all moments of a radial density in one pass.
    """
    cdef Py_ssize_t m = r.shape[0]
    out_arr = np.empty(count, dtype=np.float64)
    cdef double[::1] out = out_arr
    p_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] p = p_arr
    cdef Py_ssize_t j, k
    cdef double s
    for k in range(m):
        p[k] = pow(r[k], <double> n0) if r[k] > 0.0 else (1.0 if n0 == 0 else 0.0)
    for j in range(count):
        if j > 0 and (j % RESYNC) == 0:
            for k in range(m):
                p[k] = pow(r[k], <double> (n0 + j)) if r[k] > 0.0 else 0.0
        s = 0.0
        for k in range(m):
            s += w[k] * p[k]
        out[j] = s
        for k in range(m):
            p[k] *= r[k]
    return out_arr
