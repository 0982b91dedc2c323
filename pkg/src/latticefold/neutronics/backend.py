"""Kernel backend selection.

LATTICEFOLD_KERNEL=numba|numpy pins the implementation; the default
(auto) takes the JIT path when numba imports cleanly and falls back to
the numpy/LAPACK kernel otherwise.
"""

import os

from . import kernels_numpy

_ENV_VAR = "LATTICEFOLD_KERNEL"


def _load_numba_kernels():
    from . import kernels_numba

    return kernels_numba


def active_backend_name() -> str:
    choice = os.environ.get(_ENV_VAR, "auto").lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(f"{_ENV_VAR} must be auto, numba or numpy, got {choice!r}")
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        _load_numba_kernels()
        return "numba"
    try:
        _load_numba_kernels()
        return "numba"
    except ImportError:
        return "numpy"


def get_kernels():
    """Module providing solve_two_group for the active backend."""
    if active_backend_name() == "numba":
        return _load_numba_kernels()
    return kernels_numpy
