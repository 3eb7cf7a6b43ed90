"""Kernel backend selection.

The hot per-patch kernels exist twice: a compiled extension (built at
install time) and a plain numpy module with the same functions.  Import
the extension if it is there, otherwise fall back silently.  Set
TACTILEFOOT_FORCE_NUMPY=1 to skip the extension, e.g. for benchmarking.
"""

from __future__ import annotations

import os

from . import _dis_np


def _load():
    if os.environ.get("TACTILEFOOT_FORCE_NUMPY"):
        return _dis_np, "numpy"
    try:
        from . import _dis_cy
        return _dis_cy, "cython"
    except ImportError:
        return _dis_np, "numpy"


_impl, ACTIVE = _load()


def get_backend(name=None):
    """Return (module, name).  name=None picks the active default."""
    if name is None:
        return _impl, ACTIVE
    if name == "numpy":
        return _dis_np, "numpy"
    if name == "cython":
        from . import _dis_cy
        return _dis_cy, "cython"
    raise ValueError(f"unknown backend {name!r}")
