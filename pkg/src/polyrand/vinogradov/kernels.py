"""Counting-kernel backend selection.

The Cython extension is preferred; the numpy twin is used when the
extension is unavailable or when POLYRAND_PURE_PYTHON=1 is set.  Both
expose ``count_enumerate`` / ``count_histogram`` with identical exact
results, so callers never care which one is active.
"""

from __future__ import annotations

import os

from . import _counting_py

if os.environ.get("POLYRAND_PURE_PYTHON") == "1":
    _impl = _counting_py
else:
    try:
        from . import _counting as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _counting_py

BACKEND: str = _impl.BACKEND
count_enumerate = _impl.count_enumerate
count_histogram = _impl.count_histogram
