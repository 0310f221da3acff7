"""Optional numba acceleration.

Hot kernels are written once as plain Python loops and compiled with
``numba.njit`` when numba is importable. Setting ``DDDKIT_DISABLE_NUMBA=1``
skips compilation; callers then dispatch to the vectorised numpy versions in
:mod:`dddkit.kernels`.
"""
import os

_FLAG = "DDDKIT_DISABLE_NUMBA"


def _disabled():
    return os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


try:
    if _disabled():
        raise ImportError
    import numba as _numba
except ImportError:
    _numba = None

HAS_NUMBA = _numba is not None


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise the identity decorator."""
    if _numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn
    kwargs.setdefault("cache", True)
    return _numba.njit(*args, **kwargs)
