"""Numba switch for the hot kernels.

Set ``DTCBENCH_DISABLE_NUMBA=1`` before import to run every kernel as plain
Python (slow, but useful for debugging and for the benchmark baseline).
"""
import os

DISABLED = os.environ.get("DTCBENCH_DISABLE_NUMBA", "0").lower() in ("1", "true", "yes")

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

USING_NUMBA = numba is not None and not DISABLED


def njit(func):
    if USING_NUMBA:
        return numba.njit(cache=True)(func)
    return func
