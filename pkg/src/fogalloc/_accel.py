"""Backend selection for the numeric kernels.

Kernels are written once as plain Python over numpy arrays. When numba is
importable and ``FOGALLOC_NO_NUMBA`` is unset (or ``0``), the dispatcher hands
out an ``@njit`` compiled copy; otherwise the interpreted source runs as-is.
The flag is read on every dispatch so tests can flip it with ``monkeypatch``.
"""

from __future__ import annotations

import os
from typing import Callable

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None

ENV_FLAG = "FOGALLOC_NO_NUMBA"

_compiled: dict[Callable, Callable] = {}


def numba_available() -> bool:
    return numba is not None


def use_numba() -> bool:
    if numba is None:
        return False
    return os.environ.get(ENV_FLAG, "0").strip().lower() in ("", "0", "false", "no")


def jitable(fn: Callable) -> Callable:
    """Mark a helper as callable from compiled kernels; ``fn`` is returned unchanged."""
    if numba is not None:
        from numba.extending import register_jitable

        register_jitable(fn)
    return fn


def dispatch(fn: Callable) -> Callable:
    """Return the compiled kernel for ``fn`` if numba is enabled, else ``fn``."""
    if not use_numba():
        return fn
    jitted = _compiled.get(fn)
    if jitted is None:
        jitted = numba.njit(cache=True)(fn)
        _compiled[fn] = jitted
    return jitted
