"""Kernel backend selection: compiled extension if available, numpy otherwise.

The environment variable FLOCSOLVE_BACKEND ("compiled" | "python") pins the
choice at import time; ``set_backend`` switches it at runtime (used by the
benchmark and the parity tests).
"""
from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

HAVE_COMPILED = _compiled is not None

_IMPLS = {"python": _kernels_py}
if HAVE_COMPILED:
    _IMPLS["compiled"] = _compiled

_active_name = "compiled" if HAVE_COMPILED else "python"
_forced = os.environ.get("FLOCSOLVE_BACKEND")
if _forced:
    if _forced not in _IMPLS:
        raise ImportError(
            f"FLOCSOLVE_BACKEND={_forced!r} requested but only {sorted(_IMPLS)} available")
    _active_name = _forced
_active = _IMPLS[_active_name]


def active_backend() -> str:
    return _active_name


def set_backend(name: str) -> None:
    global _active, _active_name
    if name not in _IMPLS:
        raise ValueError(f"unknown backend {name!r}; available: {sorted(_IMPLS)}")
    _active = _IMPLS[name]
    _active_name = name


def contract_vec(tensor, vec):
    return _active.contract_vec(tensor, vec)


def contract_rows(weights, tensor):
    return _active.contract_rows(weights, tensor)
