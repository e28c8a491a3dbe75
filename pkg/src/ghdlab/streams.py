"""Distinct-elements estimation and the streaming-to-protocol reduction.

The sketch is a k-minimum-values summary: it keeps the k smallest distinct
64-bit hash values seen, reports the exact count while fewer than k are
held, and (k-1) / v_k scaled to the hash range afterwards.  Its serialized
state has a fixed size for fixed k, which makes the pass/space accounting
of the induced communication protocol exact: a p-pass algorithm with
S-bit state yields a (2p-1)-message protocol of S-bit messages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BitString, GhdParams
from .protocols import Protocol, Transcript
from .rng import splitmix64

_U64 = np.uint64
_HASH_RANGE = 2.0**64
_EMPTY_SLOT = 0xFFFFFFFFFFFFFFFF


def _mix64(values: np.ndarray, key: int) -> np.ndarray:
    """Vectorized splitmix64 finalizer keyed by a 64-bit seed."""
    z = values.astype(np.uint64) ^ _U64(key)
    z = z + _U64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


class KmvSketch:
    """k-minimum-values sketch over a stream of unsigned integers.

    Deterministic given (seed, stream); supports any number of passes by
    replaying from serialized state.  Serialized size is constant for
    fixed k regardless of stream content.
    """

    def __init__(self, k: int, seed: int):
        if k < 2:
            raise ValueError("k must be >= 2")
        self.k = k
        self.seed = seed
        self._key = splitmix64(seed)
        self._values = np.empty(0, dtype=np.uint64)
        self.passes_supported = -1  # unbounded: state replays across passes

    def update(self, item: int) -> None:
        self.update_batch(np.array([item], dtype=np.uint64))

    def update_batch(self, items: np.ndarray) -> None:
        hashes = _mix64(np.asarray(items, dtype=np.uint64), self._key)
        merged = np.union1d(self._values, hashes)
        self._values = merged[: self.k]

    def distinct_held(self) -> int:
        return int(self._values.size)

    def estimate(self) -> float:
        if self._values.size < self.k:
            return float(self._values.size)
        v_k = float(self._values[self.k - 1])
        return (self.k - 1) * _HASH_RANGE / max(v_k, 1.0)

    # -- serialization -------------------------------------------------------

    @property
    def state_bits(self) -> int:
        return 8 * len(self.serialize())

    def serialize(self) -> bytes:
        """Length-prefixed blob of fixed size for fixed k."""
        slots = np.full(self.k, _EMPTY_SLOT, dtype=np.uint64)
        slots[: self._values.size] = self._values
        payload = (
            self.k.to_bytes(8, "little")
            + int(self._values.size).to_bytes(8, "little")
            + (self.seed & _EMPTY_SLOT).to_bytes(8, "little")
            + slots.tobytes()
        )
        return len(payload).to_bytes(4, "little") + payload

    @classmethod
    def deserialize(cls, blob: bytes) -> "KmvSketch":
        length = int.from_bytes(blob[:4], "little")
        payload = blob[4 : 4 + length]
        k = int.from_bytes(payload[:8], "little")
        filled = int.from_bytes(payload[8:16], "little")
        seed = int.from_bytes(payload[16:24], "little")
        sketch = cls(k, seed)
        slots = np.frombuffer(payload[24:], dtype=np.uint64)
        sketch._values = slots[:filled].copy()
        return sketch


def kmv_f0(k: int, seed: int = 0) -> KmvSketch:
    """Fresh k-minimum-values sketch under a seeded 64-bit hash."""
    return KmvSketch(k, seed)


def exact_f0(*segments) -> int:
    """Exact distinct count of the concatenation (test oracle for sketches)."""
    seen = set()
    for segment in segments:
        seen.update(int(v) for v in np.asarray(segment).ravel())
    return len(seen)


# ---------------------------------------------------------------------------
# Reduction from the gap problem to distinct elements


def ghd_to_f0_stream(x: BitString, y: BitString) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint-universe encoding: element 2i + bit for coordinate i.

    The distinct count of the two segments together is n + dist(x, y):
    agreeing coordinates contribute one shared element, disagreeing ones
    contribute two.
    """
    if x.n != y.n:
        raise ValueError("length mismatch")
    i = np.arange(1, x.n + 1, dtype=np.uint64)
    x_bits = np.array([x.bit(j) for j in range(x.n)], dtype=np.uint64)
    y_bits = np.array([y.bit(j) for j in range(y.n)], dtype=np.uint64)
    return _U64(2) * i + x_bits, _U64(2) * i + y_bits


def f0_epsilon_for(params: GhdParams) -> float:
    """Sketch accuracy that separates the two promise classes.

    The estimate is thresholded at n + t; promise classes sit at most
    n + t - g and more than n + t + g, so a relative error below
    g / (2 (n + t + g)) keeps them on the right sides.
    """
    n, t, g = params.n, params.t, params.g
    return g / (2.0 * (n + t + g))


@dataclass(frozen=True)
class ReductionAccounting:
    """Pass/space bookkeeping of the induced protocol."""

    passes: int
    state_bits: int

    @property
    def messages(self) -> int:
        return 2 * self.passes - 1

    @property
    def total_bits(self) -> int:
        return self.messages * self.state_bits


class StreamingProtocol(Protocol):
    """Protocol that ships sketch state back and forth for p passes.

    Alice streams her segment into the sketch and sends the serialized
    state; Bob continues on his segment.  After the final pass Bob
    thresholds the distinct-elements estimate at n + t.
    """

    def __init__(self, k: int, passes: int, params: GhdParams):
        if passes < 1:
            raise ValueError("need at least one pass")
        self.name = "stream_f0"
        self.k = k
        self.passes = passes
        self.params = params
        self.n = params.n
        self.state_bits = KmvSketch(k, 0).state_bits
        self.declared_cost = (2 * passes - 1) * self.state_bits

    def requested_estimator(self) -> KmvSketch:
        return KmvSketch(self.k, 0)

    def accounting(self) -> ReductionAccounting:
        return ReductionAccounting(self.passes, self.state_bits)

    def draw_coins(self, rng: np.random.Generator) -> int:
        return int(rng.integers(0, 2**63))

    def execute(self, x: BitString, y: BitString, coins: int, transcript: Transcript) -> int:
        alice_segment, bob_segment = ghd_to_f0_stream(x, y)
        sketch = KmvSketch(self.k, coins)
        for p in range(self.passes):
            sketch.update_batch(alice_segment)
            blob = sketch.serialize()
            transcript.send("A", int.from_bytes(blob, "little"), 8 * len(blob))
            sketch = KmvSketch.deserialize(blob)
            sketch.update_batch(bob_segment)
            if p < self.passes - 1:
                blob = sketch.serialize()
                transcript.send("B", int.from_bytes(blob, "little"), 8 * len(blob))
                sketch = KmvSketch.deserialize(blob)
        return 1 if sketch.estimate() > self.params.n + self.params.t else 0

    def to_descriptor(self) -> dict:
        p = self.params
        return {
            "name": "stream_f0",
            "params": {"n": p.n, "t": p.t, "g": p.g, "k": self.k, "passes": self.passes},
        }


def streaming_to_protocol(
    estimator: KmvSketch, passes: int, params: GhdParams
) -> tuple[StreamingProtocol, ReductionAccounting]:
    """Build the multi-pass sketch-shipping protocol and its accounting.

    ``estimator`` serves as the template (its capacity is reused; each run
    re-keys a fresh copy from the public coins); it must support
    multi-pass replay from serialized state.
    """
    for required in ("serialize", "update_batch", "estimate"):
        if not hasattr(estimator, required):
            raise ValueError(f"estimator lacks {required}; state is not shippable")
    if not hasattr(type(estimator), "deserialize"):
        raise ValueError("estimator state cannot be restored; reduction impossible")
    protocol = StreamingProtocol(estimator.k, passes, params)
    return protocol, protocol.accounting()


# ---------------------------------------------------------------------------
# Stream files


def save_stream(path, values) -> None:
    """Newline-delimited unsigned integers."""
    with open(path, "w") as fh:
        for v in values:
            fh.write(f"{int(v)}\n")


def load_stream(path) -> np.ndarray:
    with open(path) as fh:
        return np.array([int(line) for line in fh if line.strip()], dtype=np.uint64)
