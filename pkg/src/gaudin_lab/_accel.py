"""Switch between numba-compiled kernels and their pure-numpy twins.

Set ``GAUDIN_LAB_NUMBA=0`` in the environment before import to force the
numpy path (useful on platforms without numba or when debugging).
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and os.environ.get("GAUDIN_LAB_NUMBA", "1") not in ("0", "false", "no")

_JIT_KWARGS = {"nopython": True, "cache": True, "nogil": True}


def njit(fn):
    """Compile ``fn`` with numba when available, else return it unchanged."""
    if numba is None:
        return fn
    return numba.jit(**_JIT_KWARGS)(fn)


def backend():
    return "numba" if USE_NUMBA else "numpy"
