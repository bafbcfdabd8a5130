"""Numpy implementation of the log-likelihood kernels.

Mirrors ``_kernels.pyx`` term by term so both backends give the same counts.
"""
import numpy as np

POISSON, BINOMIAL, GAUSSIAN = 0, 1, 2


def loglik(code, c0, a, b, theta):
    with np.errstate(divide="ignore"):  # log 0 = -inf at the boundary, as in the C version
        return _loglik(code, c0, a, b, np.asarray(theta, dtype=np.float64))


def _loglik(code, c0, a, b, t):
    if code == POISSON:
        return c0 + a * np.log(t) - b * t
    if code == BINOMIAL:
        out = np.full(t.shape, c0, dtype=np.float64)
        if a != 0.0:
            out = out + a * np.log(t)
        if b != 0.0:
            out = out + b * np.log1p(-t)
        return out
    d = t - a
    return c0 - b * d * d


def count_exceed(code, c0, a, b, theta, thresholds, greater):
    values = loglik(code, c0, a, b, theta)
    thr = np.asarray(thresholds, dtype=np.float64)[:, None]
    hits = values > thr if greater else values < thr
    return hits.sum(axis=1, dtype=np.int64)
