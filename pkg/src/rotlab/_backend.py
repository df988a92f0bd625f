"""Backend selection for the hot numeric kernels.

Every performance-critical loop in the package exists twice: a numba
``@njit`` version and a pure numpy/Python version with identical semantics.
Which one runs is decided once, at import time, by the environment variable
``ROTLAB_BACKEND``:

    ROTLAB_BACKEND=numba   force numba (ImportError if unavailable)
    ROTLAB_BACKEND=numpy   force the pure-numpy fallback
    unset / auto           numba when importable, numpy otherwise

``benchmarks/bench_backends.py`` times the two paths against each other.
"""

import os

_VALID = ("auto", "numba", "numpy")


def _resolve() -> str:
    choice = os.environ.get("ROTLAB_BACKEND", "auto").strip().lower()
    if choice not in _VALID:
        raise ValueError(
            f"ROTLAB_BACKEND must be one of {_VALID}, got {choice!r}"
        )
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _resolve()
USE_NUMBA = BACKEND == "numba"

if USE_NUMBA:
    from numba import njit, prange
else:  # pragma: no cover - exercised via ROTLAB_BACKEND=numpy runs
    def njit(*args, **kwargs):
        """No-op decorator standing in for numba.njit."""
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap

    prange = range
