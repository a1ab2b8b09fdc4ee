"""Kernel backend selection.

The compiled Cython kernel is preferred when its extension module is
importable; otherwise the pure-Python twin takes over. Selection
happens once at import, can be forced with the environment variable
STASIM_PURE_PYTHON=1, and can be switched at runtime (used by the
benchmark and the backend-equivalence tests) with set_backend().
"""

from __future__ import annotations

import os

from stasim._kernels import tilesim_py

_BACKENDS = {"pure": tilesim_py}

try:
    from stasim._kernels import _tilesim

    _BACKENDS["compiled"] = _tilesim
except ImportError:  # pragma: no cover - depends on the build environment
    pass

if os.environ.get("STASIM_PURE_PYTHON"):
    _active = "pure"
else:
    _active = "compiled" if "compiled" in _BACKENDS else "pure"

GATING_OFF = tilesim_py.GATING_OFF
GATING_LANE = tilesim_py.GATING_LANE
GATING_PE = tilesim_py.GATING_PE


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def current_backend() -> str:
    return _active


def get_backend(name: str):
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; have {available_backends()}") from None


def set_backend(name: str) -> None:
    global _active
    get_backend(name)
    _active = name


def active_module():
    return _BACKENDS[_active]
