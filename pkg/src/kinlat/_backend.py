"""Kernel backend selection: numba JIT when available, plain numpy otherwise.

The hot loops (wave interaction sum, collision operator, chain force) exist
twice, once decorated with ``numba.njit`` and once in vectorized numpy.
``KINLAT_NO_NUMBA=1`` in the environment forces the numpy path; so does an
ImportError at numba import time.  ``benchmarks/bench_kernels.py`` times the
two paths against each other.
"""

from __future__ import annotations

import os

_ENV_FLAG = "KINLAT_NO_NUMBA"

try:
    from numba import njit  # noqa: F401

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        # mimic the decorator-with-arguments form; compilation is a no-op
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap


# resolved once at import; tests override per call instead of mutating this
USING_NUMBA = HAS_NUMBA and os.environ.get(_ENV_FLAG, "") not in ("1", "true", "yes")


def default_backend() -> str:
    """Name of the backend picked at import time, ``"numba"`` or ``"numpy"``."""
    return "numba" if USING_NUMBA else "numpy"


def resolve_backend(backend: str | None) -> str:
    """Validate an explicit backend request, falling back to the default.

    Asking for numba when it is not importable is an error rather than a
    silent downgrade; the silent path only exists for ``backend=None``.
    """
    if backend is None:
        return default_backend()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}, expected 'numba' or 'numpy'")
    if backend == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend
