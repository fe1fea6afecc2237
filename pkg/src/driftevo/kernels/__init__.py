"""Hot kernels, dispatched to numba or numpy.

The backend is read from ``DRIFTEVO_BACKEND`` on import.  Call
``reload_backend()`` after changing the variable, or ``use_backend(name)``
to switch directly.
"""
import numpy as np

from .._backend import active_backend
from . import _numpy_impl

try:
    from . import _numba_impl
except ImportError:  # pragma: no cover - numba missing
    _numba_impl = None

__all__ = [
    "conj_perf_batch",
    "conj_agreement",
    "monotone_neighbors",
    "general_neighbors",
    "rotation_neighbors",
    "componentwise_neighbors",
    "spherical_perf_batch",
    "halfspace_agreement",
    "backend_module",
    "reload_backend",
    "use_backend",
]

_active = None


def backend_module(name=None):
    if name is None:
        return _active
    if name == "numba" and _numba_impl is not None:
        return _numba_impl
    return _numpy_impl


def reload_backend():
    """Re-read the environment flag; returns the backend name in use."""
    return use_backend(active_backend())


def use_backend(name):
    global _active
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    _active = backend_module(name)
    return "numba" if _active is _numba_impl else "numpy"


def current_backend():
    return "numba" if _active is _numba_impl else "numpy"


reload_backend()


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def conj_perf_batch(fpos, fneg, rpos, rneg):
    return _active.conj_perf_batch(np.int64(fpos), np.int64(fneg), _i64(rpos), _i64(rneg))


def conj_agreement(fpos, fneg, rpos, rneg, xbits):
    return _active.conj_agreement(
        np.int64(fpos), np.int64(fneg), _i64(rpos), _i64(rneg), _i64(xbits)
    )


def monotone_neighbors(pos, n, q):
    return _active.monotone_neighbors(np.int64(pos), int(n), int(q))


def general_neighbors(pos, neg, n, q):
    return _active.general_neighbors(np.int64(pos), np.int64(neg), int(n), int(q))


def rotation_neighbors(r, gauss, angle):
    return _active.rotation_neighbors(_f64(r), _f64(gauss), float(angle))


def componentwise_neighbors(r, step, count):
    return _active.componentwise_neighbors(_f64(r), float(step), int(count))


def spherical_perf_batch(f, R):
    return _active.spherical_perf_batch(_f64(f), np.atleast_2d(_f64(R)))


def halfspace_agreement(f, R, X):
    return _active.halfspace_agreement(_f64(f), np.atleast_2d(_f64(R)), _f64(X))
