"""Pure-NumPy implementations of the hot kernels.

Same contracts as the compiled module ``ghdlab._kernels``; this version is
selected at import time when the extension is unavailable (or when
``GHDLAB_PURE_PYTHON=1``).  All integer arithmetic is exact for the value
ranges the workbench allows (set sizes at most 2**26, pair counts at most
2**52).
"""

from __future__ import annotations

import numpy as np

IMPLEMENTATION = "python"

_pop_cache: dict[int, np.ndarray] = {}


def _index_popcounts(n: int) -> np.ndarray:
    """Popcounts of 0..2**n-1 as uint8, built by doubling and cached."""
    pc = _pop_cache.get(n)
    if pc is None:
        pc = np.zeros(1, dtype=np.uint8)
        for _ in range(n):
            pc = np.concatenate([pc, pc + 1])
        _pop_cache[n] = pc
    return pc


def wht_inplace(a: np.ndarray) -> None:
    """In-place Walsh-Hadamard transform of a length-2**k int64 array."""
    size = a.shape[0]
    h = 1
    while h < size:
        blocks = a.reshape(-1, 2, h)
        left = blocks[:, 0, :].copy()
        right = blocks[:, 1, :]
        blocks[:, 0, :] = left + right
        blocks[:, 1, :] = left - right
        h *= 2


def index_popcount_hist(values: np.ndarray, n: int) -> np.ndarray:
    """hist[d] = sum of values[z] over indices z with popcount(z) == d."""
    pc = _index_popcounts(n)
    total = int(values.sum(dtype=object)) if values.size else 0
    if abs(total) < 2**53 and (values >= 0).all():
        # float64 accumulation is exact: partial sums stay below 2**53
        hist = np.bincount(pc, weights=values.astype(np.float64), minlength=n + 1)
        return hist.astype(np.int64)
    hist = np.zeros(n + 1, dtype=np.int64)
    np.add.at(hist, pc, values)
    return hist


def xor_popcount_hist(codes: np.ndarray, x: int, n: int) -> np.ndarray:
    """Histogram of popcount(codes ^ x) over a uint64 code array."""
    d = np.bitwise_count(codes ^ np.uint64(x))
    return np.bincount(d, minlength=n + 1).astype(np.int64)


def pairwise_distance_hist(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """Exact distance histogram over all pairs from two uint64 code arrays."""
    if a.shape[0] > b.shape[0]:
        a, b = b, a
    hist = np.zeros(n + 1, dtype=np.int64)
    for x in a:
        d = np.bitwise_count(b ^ x)
        hist += np.bincount(d, minlength=n + 1)
    return hist
