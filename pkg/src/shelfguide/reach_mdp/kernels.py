"""Sweep kernel selection: compiled Cython core when built, numpy otherwise.

Override with SHELFGUIDE_KERNEL=cython|numpy (useful for benchmarking and
for testing both paths).
"""
from __future__ import annotations

import os

from . import _sweep_py

_FORCED = os.environ.get("SHELFGUIDE_KERNEL")

try:
    from . import _sweep as _sweep_ext
except ImportError:
    _sweep_ext = None

if _FORCED == "numpy":
    _impl = _sweep_py
elif _FORCED == "cython":
    if _sweep_ext is None:
        raise ImportError(
            "SHELFGUIDE_KERNEL=cython but the compiled kernel is not built; "
            "run pip install -e . --no-build-isolation")
    _impl = _sweep_ext
elif _FORCED is not None:
    raise ValueError(f"SHELFGUIDE_KERNEL={_FORCED!r}: expected cython or numpy")
else:
    _impl = _sweep_ext if _sweep_ext is not None else _sweep_py

BACKEND: str = _impl.BACKEND
sweep = _impl.sweep


def available_backends() -> dict[str, object]:
    out = {"numpy": _sweep_py.sweep}
    if _sweep_ext is not None:
        out["cython"] = _sweep_ext.sweep
    return out
