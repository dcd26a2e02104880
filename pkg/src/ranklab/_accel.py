"""Optional numba acceleration.

Hot kernels (Monte Carlo rank accumulation, simplex pivoting, the subset
DP for rank aggregation) are compiled with numba when it is importable.
Setting the environment variable ``RANKLAB_DISABLE_NUMBA=1`` forces the
pure-numpy fallback implementations instead; results agree with the
compiled path to float round-off (integer statistics are identical).
"""

import os

_flag = os.environ.get("RANKLAB_DISABLE_NUMBA", "0").strip().lower()
NUMBA_DISABLED = _flag in ("1", "true", "yes", "on")

if NUMBA_DISABLED:
    NUMBA_AVAILABLE = False
else:
    try:
        import numba  # noqa: F401

        NUMBA_AVAILABLE = True
    except ImportError:
        NUMBA_AVAILABLE = False


def jit_or_none(func, **kwargs):
    """Return an njit-compiled copy of func, or None when numba is off."""
    if not NUMBA_AVAILABLE:
        return None
    from numba import njit

    kwargs.setdefault("cache", True)
    return njit(**kwargs)(func)
