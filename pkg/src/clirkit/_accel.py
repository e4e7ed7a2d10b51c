"""Numba toggle.

Set ``CLIRKIT_DISABLE_NUMBA=1`` to force the pure-numpy kernels. The flag is read
once, at import time.
"""
import importlib.util
import os

DISABLED = os.environ.get("CLIRKIT_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

NUMBA_INSTALLED = importlib.util.find_spec("numba") is not None

USE_NUMBA = NUMBA_INSTALLED and not DISABLED


def jit(fn):
    """Compile ``fn`` in nopython mode, or return None if numba is not installed."""
    if not NUMBA_INSTALLED:
        return None
    from numba import njit

    return njit(cache=True, nogil=True)(fn)
