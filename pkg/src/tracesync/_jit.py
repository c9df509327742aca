"""Switch between numba-compiled kernels and their interpreted fallback.

Set ``TRACESYNC_DISABLE_NUMBA=1`` before importing :mod:`tracesync` to run
every kernel as plain Python over numpy scalars.  Both paths execute the
same source and produce bit-identical results.
"""

import contextlib
import os

import numpy as np

_FLAG = os.environ.get("TRACESYNC_DISABLE_NUMBA", "").strip().lower()
NUMBA_ENABLED = _FLAG not in ("1", "true", "yes", "on")

if NUMBA_ENABLED:
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a hard dependency
        NUMBA_ENABLED = False

if NUMBA_ENABLED:

    def njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        return numba.njit(*args, **kwargs)

else:

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrapper(func):
            return func

        return wrapper


def kernel_context():
    """Context for calling a kernel.

    Interpreted kernels rely on wrapping uint64 arithmetic, which numpy
    flags as overflow on scalars.
    """
    if NUMBA_ENABLED:
        return contextlib.nullcontext()
    return np.errstate(over="ignore")
