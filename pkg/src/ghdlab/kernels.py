"""Kernel dispatch: compiled extension if present, NumPy fallback otherwise.

``BACKEND`` records which implementation was selected.  Set
``GHDLAB_PURE_PYTHON=1`` before import to force the fallback (used by the
equivalence tests and the benchmark).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("GHDLAB_PURE_PYTHON") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.IMPLEMENTATION

wht_inplace = _impl.wht_inplace
index_popcount_hist = _impl.index_popcount_hist
xor_popcount_hist = _impl.xor_popcount_hist
pairwise_distance_hist = _impl.pairwise_distance_hist


def implementations():
    """All available kernel implementations, for tests and benchmarks."""
    impls = [_kernels_py]
    if _impl is not _kernels_py:
        impls.append(_impl)
    else:
        try:
            from . import _kernels  # type: ignore[attr-defined]

            impls.append(_kernels)
        except ImportError:
            pass
    return impls
