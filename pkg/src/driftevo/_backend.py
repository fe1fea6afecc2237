"""Kernel backend selection.

The numba kernels are used when numba imports cleanly and the environment
variable ``DRIFTEVO_BACKEND`` is unset or ``numba``.  Setting it to ``numpy``
forces the vectorised fallback, which is also used when numba is missing.
"""
import os

ENV_VAR = "DRIFTEVO_BACKEND"


def _numba_available():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_AVAILABLE = _numba_available()


def requested_backend():
    value = os.environ.get(ENV_VAR, "numba").strip().lower()
    if value not in ("numba", "numpy"):
        raise ValueError(f"{ENV_VAR} must be 'numba' or 'numpy', got {value!r}")
    return value


def active_backend():
    if requested_backend() == "numba" and NUMBA_AVAILABLE:
        return "numba"
    return "numpy"
