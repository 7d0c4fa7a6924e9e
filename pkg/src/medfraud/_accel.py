"""Backend selection for the compiled kernels.

Set ``MEDFRAUD_NUMBA=0`` to force the pure-numpy fallback. The flag is read
once at import time.
"""
import os

_FALSY = {"0", "false", "no", "off"}

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_AVAILABLE = numba is not None
if NUMBA_AVAILABLE and "NUMBA_THREADING_LAYER" not in os.environ:
    # skip the TBB probe, which warns on older TBB builds
    numba.config.THREADING_LAYER = "workqueue"
USE_NUMBA = NUMBA_AVAILABLE and os.environ.get("MEDFRAUD_NUMBA", "1").strip().lower() not in _FALSY


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise."""
    kwargs.setdefault("cache", True)

    def wrap(fn):
        if not NUMBA_AVAILABLE:
            return fn
        return numba.njit(**kwargs)(fn)

    if args and callable(args[0]):
        return wrap(args[0])
    return wrap


if NUMBA_AVAILABLE:
    prange = numba.prange
else:  # pragma: no cover
    prange = range


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
