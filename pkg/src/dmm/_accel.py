"""Numba switch for the hot kernels.

Set ``DMM_DISABLE_NUMBA=1`` to force the pure-numpy code paths, e.g. when
debugging or on platforms without a working numba.
"""

import os

_disabled = os.environ.get("DMM_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False


def njit(func=None, **options):
    """``numba.njit`` with caching, or the identity when numba is off."""
    options.setdefault("cache", True)

    def wrap(f):
        if HAVE_NUMBA:
            return numba.njit(**options)(f)
        return f

    if func is None:
        return wrap
    return wrap(func)
