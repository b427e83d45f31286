"""Numba switch.

Kernels are written once as plain loops and compiled with ``numba.njit``
unless ``QPQ_DISABLE_NUMBA`` is set to a truthy value (or numba is not
importable), in which case the dispatchers route to vectorised numpy
implementations instead.
"""

import os

_FALSY = {"", "0", "false", "no", "off"}

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("QPQ_DISABLE_NUMBA", "").strip().lower() in _FALSY


def njit(func):
    """Compile ``func`` in nopython mode when numba is enabled."""
    if USE_NUMBA:
        return numba.njit(cache=True)(func)
    return func


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
