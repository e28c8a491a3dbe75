# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Walsh-Hadamard butterflies and popcount histograms.

Mirrors ghdlab._kernels_py; see ghdlab.kernels for the dispatch rules.
"""

import numpy as np

from libc.stdint cimport int64_t, uint64_t

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

IMPLEMENTATION = "compiled"


def wht_inplace(int64_t[::1] a):
    """In-place Walsh-Hadamard transform of a length-2**k int64 array."""
    cdef Py_ssize_t size = a.shape[0]
    cdef Py_ssize_t h = 1
    cdef Py_ssize_t start, i
    cdef int64_t u, v
    with nogil:
        while h < size:
            start = 0
            while start < size:
                for i in range(start, start + h):
                    u = a[i]
                    v = a[i + h]
                    a[i] = u + v
                    a[i + h] = u - v
                start += 2 * h
            h *= 2


def index_popcount_hist(int64_t[::1] values, int n):
    """hist[d] = sum of values[z] over indices z with popcount(z) == d."""
    out = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t[::1] hist = out
    cdef Py_ssize_t size = values.shape[0]
    cdef Py_ssize_t z
    with nogil:
        for z in range(size):
            hist[__builtin_popcountll(<unsigned long long> z)] += values[z]
    return out


def xor_popcount_hist(uint64_t[::1] codes, uint64_t x, int n):
    """Histogram of popcount(codes ^ x) over a uint64 code array."""
    out = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t[::1] hist = out
    cdef Py_ssize_t size = codes.shape[0]
    cdef Py_ssize_t i
    with nogil:
        for i in range(size):
            hist[__builtin_popcountll(codes[i] ^ x)] += 1
    return out


def pairwise_distance_hist(uint64_t[::1] a, uint64_t[::1] b, int n):
    """Exact distance histogram over all pairs from two uint64 code arrays."""
    out = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t[::1] hist = out
    cdef Py_ssize_t na = a.shape[0]
    cdef Py_ssize_t nb = b.shape[0]
    cdef Py_ssize_t i, j
    cdef uint64_t x
    with nogil:
        for i in range(na):
            x = a[i]
            for j in range(nb):
                hist[__builtin_popcountll(x ^ b[j])] += 1
    return out
