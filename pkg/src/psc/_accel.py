"""Optional numba acceleration for hot kernels.

Set PSC_DISABLE_NUMBA=1 to force the pure-numpy fallback paths.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def numba_disabled_by_env() -> bool:
    return os.environ.get("PSC_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}


def jit_enabled() -> bool:
    """True when the jitted kernel path should be used (checked per call)."""
    return HAVE_NUMBA and not numba_disabled_by_env()


def njit(fn):
    """Compile fn with numba when available; otherwise return it unchanged."""
    if HAVE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn
