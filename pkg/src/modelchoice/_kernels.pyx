# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled log-likelihood kernels over arrays of parameter draws.

Family codes and coefficient layout (c0, a, b) are defined in
``modelchoice.kernels``; this module must agree with ``_fallback`` exactly.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p

cnp.import_array()

DEF POISSON = 0
DEF BINOMIAL = 1
DEF GAUSSIAN = 2


cdef inline double _ll(int code, double c0, double a, double b, double t) noexcept nogil:
    cdef double out = c0
    cdef double d
    if code == POISSON:
        return c0 + a * log(t) - b * t
    elif code == BINOMIAL:
        if a != 0.0:
            out += a * log(t)
        if b != 0.0:
            out += b * log1p(-t)
        return out
    else:
        d = t - a
        return c0 - b * d * d


def loglik(int code, double c0, double a, double b, const double[::1] theta):
    cdef Py_ssize_t i, n = theta.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for i in range(n):
            res[i] = _ll(code, c0, a, b, theta[i])
    return out


def count_exceed(int code, double c0, double a, double b,
                 const double[:, ::1] theta, const double[::1] thresholds,
                 bint greater):
    """Per row i, count columns j with l(theta[i, j]) > thresholds[i] (or < when not greater)."""
    cdef Py_ssize_t i, j, rows = theta.shape[0], cols = theta.shape[1]
    cdef long long c
    cdef double thr, v
    out = np.zeros(rows, dtype=np.int64)
    cdef long long[::1] res = out
    with nogil:
        for i in range(rows):
            thr = thresholds[i]
            c = 0
            for j in range(cols):
                v = _ll(code, c0, a, b, theta[i, j])
                if greater:
                    if v > thr:
                        c += 1
                elif v < thr:
                    c += 1
            res[i] = c
    return out
