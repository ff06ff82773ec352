"""numba shim.

Set ``KXSKETCH_DISABLE_NUMBA=1`` to run every kernel through its pure-numpy
implementation. When numba is not importable the numpy path is used as well.
"""
import os

_flag = os.environ.get("KXSKETCH_DISABLE_NUMBA", "").strip().lower()
DISABLED = _flag not in ("", "0", "false", "no")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not DISABLED


def njit(func):
    """``numba.njit(cache=True)`` when numba is installed, identity otherwise."""
    if HAVE_NUMBA:
        return numba.njit(cache=True)(func)
    return func


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
