"""JIT switch for the numeric kernels.

Set ``CCLIQUE_DISABLE_JIT=1`` to run every kernel through its pure
numpy/Python fallback. The flag is read once at import time.
"""
import os

_FLAG = os.environ.get("CCLIQUE_DISABLE_JIT", "").strip().lower()
DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    if DISABLED:
        raise ImportError
    from numba import njit as _njit

    HAS_NUMBA = True
except ImportError:
    _njit = None
    HAS_NUMBA = False


def jit(fn):
    """Compile ``fn`` with numba when enabled, otherwise return it unchanged."""
    if HAS_NUMBA:
        return _njit(cache=True, nogil=True)(fn)
    return fn
