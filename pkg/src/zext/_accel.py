"""JIT selection for the numeric kernels.

Set ``ZEXT_DISABLE_NUMBA=1`` (or numba's own ``NUMBA_DISABLE_JIT=1``) to run
the pure-numpy fallbacks instead of the compiled kernels.
"""

from __future__ import annotations

import os

_FLAG_VALUES = {"1", "true", "yes", "on"}


def _flag(name: str) -> bool:
    return os.getenv(name, "").strip().lower() in _FLAG_VALUES


try:  # pragma: no cover - exercised implicitly
    import numba as _numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not (_flag("ZEXT_DISABLE_NUMBA") or _flag("NUMBA_DISABLE_JIT"))

NUMBA_OPTS = {"cache": True, "nogil": True}


def njit(fn):
    """Compile ``fn`` with numba when it is available, else return it as is."""
    if _numba is None:
        return fn
    return _numba.njit(**NUMBA_OPTS)(fn)
