"""Problem definitions, bitstring kernels, and cube input distributions.

Conventions used throughout the workbench:

* A length-n bitstring is packed into a Python integer; bit ``i`` (value
  ``2**i``) is coordinate ``i + 1``.  In the text form the leftmost
  character is coordinate 1, so ``"0100"`` has exactly bit 1 set.
* Thresholds ``t`` and gaps ``g`` are reals; promise comparisons are done
  as exact integer-vs-real comparisons (``d <= t - g``), never by rounding
  ``t - g`` to an integer.
* Every sampler takes an explicit 64-bit seed and is a pure function of
  (parameters, seed); see :mod:`ghdlab.rng`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.stats

from .errors import CapacityError, TailBoundInfeasibleError
from .rng import make_rng, random_bits

#: Label for inputs inside the promise gap, where any output is accepted.
STAR = "star"

#: Largest n for which dense 2**n-element structures may be materialized.
DENSE_N_CAP = 26


@dataclass(frozen=True)
class GhdParams:
    """Instance parameters: input length n, threshold t, gap g."""

    n: int
    t: float
    g: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0 <= self.t <= self.n:
            raise ValueError(f"t must be in [0, n], got {self.t}")
        if not 0 <= self.g <= self.n:
            raise ValueError(f"g must be in [0, n], got {self.g}")

    def label_of_distance(self, d: int):
        """Promise label of any pair at Hamming distance d."""
        if d <= self.t - self.g:
            return 0
        if d > self.t + self.g:
            return 1
        return STAR

    def boundary_distances(self) -> list[int]:
        """Promise distances adjacent to the gap (the hardest inputs).

        Protocols whose error depends only on distance attain their
        worst-case promise error at one of these.
        """
        out = []
        d0 = math.floor(self.t - self.g)
        if d0 >= 0:
            out.append(d0)
        d1 = math.floor(self.t + self.g) + 1
        if d1 <= self.n:
            out.append(d1)
        return out


@dataclass(frozen=True)
class BitString:
    """Fixed-length binary word, packed into an integer."""

    n: int
    bits: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if not 0 <= self.bits < (1 << self.n):
            raise ValueError("bits out of range for length n")

    @classmethod
    def from_string(cls, s: str) -> "BitString":
        value = 0
        for i, ch in enumerate(s):
            if ch == "1":
                value |= 1 << i
            elif ch != "0":
                raise ValueError(f"invalid bit character {ch!r}")
        return cls(len(s), value)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "BitString":
        return cls(n, random_bits(n, rng))

    def to_string(self) -> str:
        return "".join("1" if (self.bits >> i) & 1 else "0" for i in range(self.n))

    def bit(self, i: int) -> int:
        """Coordinate i+1, for 0 <= i < n."""
        return (self.bits >> i) & 1

    def weight(self) -> int:
        return self.bits.bit_count()

    def __xor__(self, other: "BitString") -> "BitString":
        if self.n != other.n:
            raise ValueError("length mismatch")
        return BitString(self.n, self.bits ^ other.bits)


def complement(x: BitString) -> BitString:
    """Bitwise complement."""
    return BitString(x.n, x.bits ^ ((1 << x.n) - 1))


def hamming_distance(x: BitString, y: BitString) -> int:
    """Number of coordinates where x and y differ."""
    if x.n != y.n:
        raise ValueError(f"length mismatch: {x.n} vs {y.n}")
    return (x.bits ^ y.bits).bit_count()


def ghd_label(params: GhdParams, x: BitString, y: BitString):
    """0 if dist <= t-g, 1 if dist > t+g, STAR inside the gap."""
    if x.n != params.n or y.n != params.n:
        raise ValueError("input length does not match params.n")
    return params.label_of_distance(hamming_distance(x, y))


def random_mask_of_weight(n: int, d: int, rng: np.random.Generator) -> int:
    """Uniform n-bit mask with exactly d ones, packed into an integer."""
    if not 0 <= d <= n:
        raise ValueError("weight out of range")
    positions = rng.choice(n, size=d, replace=False)
    flags = np.zeros(n, dtype=np.uint8)
    flags[positions] = 1
    return int.from_bytes(np.packbits(flags, bitorder="little").tobytes(), "little")


def random_pair_at_distance(n: int, d: int, rng: np.random.Generator) -> tuple[BitString, BitString]:
    """Uniform pair (x, y) with dist(x, y) = d: x uniform, flip a d-subset."""
    x = random_bits(n, rng)
    y = x ^ random_mask_of_weight(n, d, rng)
    return BitString(n, x), BitString(n, y)


# ---------------------------------------------------------------------------
# Correlated pair distributions on the cube


@dataclass(frozen=True)
class CubePairLaw:
    """Joint law of (x, y): x uniform, each bit of y flipped independently
    with probability (1 - p) / 2.  p = 0 is the uniform distribution on
    pairs; p = 1 forces y = x; p = -1 forces y = complement(x)."""

    n: int
    p: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not -1.0 <= self.p <= 1.0:
            raise ValueError(f"correlation parameter must be in [-1, 1], got {self.p}")

    @property
    def flip_probability(self) -> float:
        return (1.0 - self.p) / 2.0


def sample_xi(law: CubePairLaw, seed: int) -> tuple[BitString, BitString]:
    """One draw from the correlated pair law; pure function of the seed."""
    rng = make_rng(seed)
    n = law.n
    x = random_bits(n, rng)
    q = law.flip_probability
    flips = rng.random(n) < q
    mask = int.from_bytes(np.packbits(flips, bitorder="little").tobytes(), "little")
    mask &= (1 << n) - 1
    return BitString(n, x), BitString(n, x ^ mask)


def sample_xi_batch(law: CubePairLaw, count: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized draws for n <= 64, returned as packed uint64 arrays."""
    if law.n > 64:
        raise CapacityError("batch sampler packs into single 64-bit words (n <= 64)")
    rng = make_rng(seed)
    n, q = law.n, law.flip_probability
    xs = np.zeros(count, dtype=np.uint64)
    masks = np.zeros(count, dtype=np.uint64)
    for i in range(n):
        bit = np.uint64(1) << np.uint64(i)
        xs |= np.where(rng.random(count) < 0.5, bit, np.uint64(0))
        masks |= np.where(rng.random(count) < q, bit, np.uint64(0))
    return xs, xs ^ masks


@dataclass(frozen=True)
class DistanceLaw:
    """Distribution of dist(x, y) under a CubePairLaw: binomial with
    parameters n and (1 - p) / 2."""

    n: int
    p: float
    pmf: np.ndarray = field(repr=False)

    def mean(self) -> float:
        return float(np.dot(np.arange(self.n + 1), self.pmf))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.pmf)


def distance_law(n: int, p: float) -> DistanceLaw:
    """Binomial pmf with parameters n and (1 - p) / 2.

    Evaluated termwise through scipy's saddle-point algorithm, which never
    forms a factorial and keeps every entry accurate to a few ulp, so the
    pmf sums to 1 within 1e-12 and the mean matches n (1 - p) / 2 within
    1e-9 even at n = 10**4.
    """
    if not -1.0 <= p <= 1.0:
        raise ValueError("correlation parameter must be in [-1, 1]")
    q = (1.0 - p) / 2.0
    if q == 0.0:
        pmf = np.zeros(n + 1)
        pmf[0] = 1.0
    elif q == 1.0:
        pmf = np.zeros(n + 1)
        pmf[n] = 1.0
    else:
        pmf = scipy.stats.binom.pmf(np.arange(n + 1), n, q)
    return DistanceLaw(n, p, pmf)


def binomial_tail_b(eps: float, n: int) -> float:
    """Smallest b on a 0.01 grid for which both promise tails clear 1 - eps.

    The two conditions checked by exact binomial CDF evaluation:

    * under flip parameter 4b/sqrt(n), dist <= n/2 - (b + sqrt(2)) sqrt(n)
      with probability >= 1 - eps;
    * under the uniform pair law, dist >= n/2 - (b - sqrt(2)) sqrt(n)
      with probability >= 1 - eps.

    Feasibility depends on n: the search domain requires 4b/sqrt(n) <= 1
    and (b + sqrt(2)) sqrt(n) <= n/2, and at small n no b on the grid
    satisfies everything, in which case TailBoundInfeasibleError is raised.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    if n < 1:
        raise ValueError("n must be >= 1")
    sqrt_n = math.sqrt(n)
    sqrt2 = math.sqrt(2.0)
    b_cap = min(sqrt_n / 4.0, n / (2.0 * sqrt_n) - sqrt2)
    target = 1.0 - eps
    uniform_cdf = distance_law(n, 0.0).cdf()
    steps = int(math.floor(b_cap / 0.01))
    for step in range(1, steps + 1):
        b = step * 0.01
        thr0 = n / 2.0 - (b + sqrt2) * sqrt_n
        if thr0 < 0:
            continue
        k0 = math.floor(thr0)
        shifted_cdf = distance_law(n, 4.0 * b / sqrt_n).cdf()
        if shifted_cdf[min(k0, n)] < target:
            continue
        thr1 = n / 2.0 - (b - sqrt2) * sqrt_n
        k1 = math.ceil(thr1)
        p_above = 1.0 if k1 <= 0 else (1.0 - uniform_cdf[k1 - 1] if k1 <= n else 0.0)
        if p_above >= target:
            return b
    raise TailBoundInfeasibleError(
        f"no b on the 0.01 grid satisfies both tail bounds at n={n}, eps={eps}"
    )


# ---------------------------------------------------------------------------
# Subsets of the cube


class CubeSet:
    """Subset of {0,1}**n, stored as a sorted array of packed codes.

    Interconvertible with a dense 2**n indicator (n <= DENSE_N_CAP).
    """

    def __init__(self, n: int, codes):
        if n < 0 or n > 63:
            raise ValueError("n out of supported range")
        arr = np.asarray(codes, dtype=np.uint64)
        arr = np.unique(arr)
        if arr.size and int(arr[-1]) >= (1 << n):
            raise ValueError("element code out of range for n")
        self.n = n
        self.codes = arr

    def __len__(self) -> int:
        return int(self.codes.size)

    def __contains__(self, code: int) -> bool:
        i = np.searchsorted(self.codes, np.uint64(code))
        return i < self.codes.size and self.codes[i] == np.uint64(code)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CubeSet)
            and self.n == other.n
            and np.array_equal(self.codes, other.codes)
        )

    @classmethod
    def full(cls, n: int) -> "CubeSet":
        if n > DENSE_N_CAP:
            raise CapacityError(f"full set requires n <= {DENSE_N_CAP}")
        return cls(n, np.arange(1 << n, dtype=np.uint64))

    @classmethod
    def from_strings(cls, n: int, elements) -> "CubeSet":
        codes = []
        for s in elements:
            if len(s) != n:
                raise ValueError(f"element {s!r} does not have length {n}")
            codes.append(BitString.from_string(s).bits)
        return cls(n, codes)

    @classmethod
    def from_indicator(cls, indicator: np.ndarray) -> "CubeSet":
        size = indicator.shape[0]
        n = size.bit_length() - 1
        if 1 << n != size:
            raise ValueError("indicator length must be a power of two")
        return cls(n, np.nonzero(indicator)[0].astype(np.uint64))

    @classmethod
    def random(cls, n: int, density: float, rng: np.random.Generator) -> "CubeSet":
        """Each element included independently with the given probability."""
        if n > DENSE_N_CAP:
            raise CapacityError(f"random dense set requires n <= {DENSE_N_CAP}")
        chunks = []
        chunk = 1 << min(n, 20)
        for start in range(0, 1 << n, chunk):
            keep = np.nonzero(rng.random(chunk) < density)[0]
            chunks.append((start + keep).astype(np.uint64))
        return cls(n, np.concatenate(chunks))

    def indicator(self) -> np.ndarray:
        if self.n > DENSE_N_CAP:
            raise CapacityError(f"dense indicator requires n <= {DENSE_N_CAP}")
        out = np.zeros(1 << self.n, dtype=np.int64)
        out[self.codes] = 1
        return out

    def flip_all(self) -> "CubeSet":
        """Complement every element bitwise (the set {~x : x in A})."""
        mask = np.uint64((1 << self.n) - 1)
        return CubeSet(self.n, self.codes ^ mask)

    def elements(self):
        for code in self.codes:
            yield BitString(self.n, int(code))

    # -- file formats ------------------------------------------------------

    def save_text(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"n={self.n}\n")
            for x in self.elements():
                fh.write(x.to_string() + "\n")

    @classmethod
    def load_text(cls, path) -> "CubeSet":
        with open(path) as fh:
            header = fh.readline().strip()
            if not header.startswith("n="):
                raise ValueError("text cube-set file must start with 'n=<int>'")
            n = int(header[2:])
            return cls.from_strings(n, (line.strip() for line in fh if line.strip()))

    def save_dense(self, path) -> None:
        if self.n > DENSE_N_CAP:
            raise CapacityError("dense format requires n <= DENSE_N_CAP")
        bits = np.zeros(1 << self.n, dtype=np.uint8)
        bits[self.codes] = 1
        with open(path, "wb") as fh:
            fh.write(int(self.n).to_bytes(8, "little"))
            fh.write(np.packbits(bits, bitorder="little").tobytes())

    @classmethod
    def load_dense(cls, path) -> "CubeSet":
        with open(path, "rb") as fh:
            n = int.from_bytes(fh.read(8), "little")
            if n > DENSE_N_CAP:
                raise CapacityError("dense format requires n <= DENSE_N_CAP")
            packed = np.frombuffer(fh.read(), dtype=np.uint8)
        bits = np.unpackbits(packed, bitorder="little")[: 1 << n]
        return cls.from_indicator(bits.astype(np.int64))
