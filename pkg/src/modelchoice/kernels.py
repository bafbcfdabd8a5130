"""Backend selection for the hot log-likelihood loops.

The compiled ``_kernels`` extension is used when it was built; otherwise the
numpy fallback. Set ``MODELCHOICE_PURE_PYTHON=1`` to force the fallback.
"""
import os

import numpy as np

from . import _fallback

POISSON, BINOMIAL, GAUSSIAN = _fallback.POISSON, _fallback.BINOMIAL, _fallback.GAUSSIAN

_impl = _fallback
BACKEND = "python"
if os.environ.get("MODELCHOICE_PURE_PYTHON") != "1":
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback


def loglik(code, coef, theta, backend=None):
    impl = _pick(backend)
    c0, a, b = coef
    t = np.ascontiguousarray(theta, dtype=np.float64)
    if t.ndim != 1:
        return impl.loglik(code, c0, a, b, t.ravel()).reshape(t.shape)
    return impl.loglik(code, c0, a, b, t)


def count_exceed(code, coef, theta, thresholds, greater=True, backend=None):
    """Row-wise count of draws whose log-likelihood beats (or falls below) a threshold."""
    impl = _pick(backend)
    c0, a, b = coef
    t = np.ascontiguousarray(theta, dtype=np.float64)
    thr = np.ascontiguousarray(thresholds, dtype=np.float64)
    if t.ndim != 2 or thr.shape != (t.shape[0],):
        raise ValueError("theta must be 2-D with one threshold per row")
    return impl.count_exceed(code, c0, a, b, t, thr, bool(greater))


def _pick(backend):
    if backend is None:
        return _impl
    if backend == "python":
        return _fallback
    if backend == "cython":
        try:
            from . import _kernels
        except ImportError as exc:
            raise RuntimeError("compiled kernels are not available") from exc
        return _kernels
    raise ValueError(f"unknown backend {backend!r}")
