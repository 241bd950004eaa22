"""Numba switch.

Set ``MSANA_DISABLE_JIT=1`` to run every kernel through its pure Python/numpy
path. The flag is read once at import time.
"""

import os

DISABLE_JIT = os.environ.get("MSANA_DISABLE_JIT", "0").lower() in ("1", "true", "yes")

try:
    if DISABLE_JIT:
        raise ImportError
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # numba missing or disabled
    _njit = None
    HAVE_NUMBA = False


def njit(func=None, **kwargs):
    """Compile with numba when enabled, otherwise return the function unchanged."""
    kwargs.setdefault("cache", True)

    def wrap(f):
        if not HAVE_NUMBA:
            return f
        return _njit(**kwargs)(f)

    if func is not None:
        return wrap(func)
    return wrap


def using_jit():
    return HAVE_NUMBA
