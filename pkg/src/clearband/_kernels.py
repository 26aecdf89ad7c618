"""Kernel backend selection: compiled core when available, numpy otherwise.

Set CLEARBAND_BACKEND=numpy|cython to force a choice; pipeline objects also
accept a per-instance ``backend`` argument so both can be benchmarked side
by side.
"""

from __future__ import annotations

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

_BACKENDS = {"numpy": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels


def available_backends() -> tuple[str, ...]:
    return tuple(_BACKENDS)


def default_backend() -> str:
    forced = os.environ.get("CLEARBAND_BACKEND")
    if forced:
        if forced not in _BACKENDS:
            raise ValueError(
                f"CLEARBAND_BACKEND={forced!r} not available; "
                f"choose from {sorted(_BACKENDS)}")
        return forced
    return "cython" if "cython" in _BACKENDS else "numpy"


def get(name: str | None = None):
    """Return the kernel module for ``name`` (default: selected backend)."""
    if name is None:
        return _BACKENDS[default_backend()]
    if hasattr(name, "band_accumulate"):  # already a kernel module
        return name
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown backend {name!r}; available: {sorted(_BACKENDS)}") from None
