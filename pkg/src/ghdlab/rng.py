"""Seeded randomness.

Every sampler in the workbench is a pure function of (parameters, seed).
All generators are built from a counter-based bit generator (Philox) keyed
by a 64-bit seed plus an optional stream path, so independent trials can
be derived by counter (``make_rng(seed, trial_index)``) and run in any
order or in parallel without sharing state.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One step of the splitmix64 mixer (maps 64 bits to 64 bits)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_key(seed: int, *stream: int) -> int:
    """Fold a seed and a stream path into a single 64-bit key."""
    key = splitmix64(seed & _MASK64)
    for part in stream:
        key = splitmix64(key ^ (part & _MASK64))
    return key


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator for the given seed and stream path.

    Distinct ``stream`` paths give statistically independent generators;
    the same path always reproduces the same draws.
    """
    key = derive_key(seed, *stream)
    return np.random.Generator(np.random.Philox(key=key))


def random_bits(n: int, rng: np.random.Generator) -> int:
    """Uniform n-bit integer (bit i of the result is coordinate i+1)."""
    if n <= 0:
        return 0
    nbytes = (n + 7) // 8
    raw = int.from_bytes(rng.integers(0, 256, size=nbytes, dtype=np.uint8).tobytes(), "little")
    return raw & ((1 << n) - 1)
