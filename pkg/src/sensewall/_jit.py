"""Numba switch.

Set ``SENSEWALL_DISABLE_JIT=1`` before import to run every kernel through its
pure Python / numpy fallback.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

DISABLED = os.environ.get("SENSEWALL_DISABLE_JIT", "").strip() not in ("", "0")
USE_NUMBA = numba is not None and not DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when available and enabled, identity otherwise."""
    if USE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def deco(fn):
        return fn

    return deco
