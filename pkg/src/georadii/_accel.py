"""Optional numba acceleration with a pure-Python fallback.

Every hot kernel in this package is written once, as a plain Python function,
and compiled with ``numba.njit`` at import time unless the environment variable
``GEORADII_NO_NUMBA=1`` is set (or numba is unavailable). Both paths execute
the same source, so results agree to the last float operation reordering.

``GEORADII_THREADS`` caps the numba thread pool (defaults to numba's own
default). The fallback path is single-threaded and slow; it exists for
debugging and for environments without a working numba install.
"""

from __future__ import annotations

import os

_disabled = os.environ.get("GEORADII_NO_NUMBA", "").strip() in ("1", "true", "yes")

if not _disabled:
    try:
        import numba

        _threads = os.environ.get("GEORADII_THREADS", "").strip()
        if _threads:
            numba.set_num_threads(max(1, int(_threads)))
        HAS_NUMBA = True
    except ImportError:  # pragma: no cover - exercised via GEORADII_NO_NUMBA in CI
        numba = None
        HAS_NUMBA = False
else:
    numba = None
    HAS_NUMBA = False


if HAS_NUMBA:
    from numba import prange
else:
    prange = range


def maybe_njit(*args, **kwargs):
    """``numba.njit`` when acceleration is on, identity decorator otherwise."""
    if HAS_NUMBA:
        kwargs.setdefault("cache", True)
        # nopython kernels touch no Python objects, so they can release the
        # GIL; thread pools running independent suites then scale on cores
        kwargs.setdefault("nogil", True)
        return numba.njit(*args, **kwargs)

    def _identity(func):
        return func

    # support both @maybe_njit and @maybe_njit(signature...)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return _identity
