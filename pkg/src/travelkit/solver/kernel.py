"""Search-kernel selection: compiled extension when available, else pure Python.

Set TRAVELKIT_KERNEL=python or TRAVELKIT_KERNEL=c to force a backend; the
default prefers the compiled one.
"""

from __future__ import annotations

import os

from . import _search_py

try:
    from . import _search_c
except ImportError:
    _search_c = None


def available_backends() -> dict:
    out = {"python": _search_py}
    if _search_c is not None:
        out["c"] = _search_c
    return out


def get_backend(name: str | None = None):
    backends = available_backends()
    if name is None:
        name = os.environ.get("TRAVELKIT_KERNEL", "")
    if not name:
        return backends.get("c", backends["python"])
    if name not in backends:
        raise ValueError(f"kernel backend {name!r} not available (have: {sorted(backends)})")
    return backends[name]


_active = get_backend()
backend_name: str = _active.BACKEND
search_exhaustive = _active.search_exhaustive
