"""Two-party protocol simulator with exact bit-cost accounting.

A protocol is an immutable description; each run draws its public
randomness from an explicit seed, executes both endpoints, and records a
Transcript whose total bit count must stay within the declared worst-case
cost.  The reduction toolkit wraps protocols in input transformations with
exactly known distance-transfer laws.

Output bits are not counted in the cost (each built-in declares this
convention in its cost).  Private randomness is simulated by splitting the
shared seed, so every protocol here is public-coin.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    STAR,
    BitString,
    CubePairLaw,
    GhdParams,
    distance_law,
    hamming_distance,
    random_mask_of_weight,
    random_pair_at_distance,
    sample_xi,
)
from .errors import ProtocolContractError
from .rng import make_rng, random_bits

#: Largest public-coin space that exact error evaluation will enumerate.
COIN_SPACE_CAP = 200_000


@dataclass
class Transcript:
    """Ordered record of framed messages with exact bit lengths."""

    messages: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def send(self, sender: str, payload: int, length: int) -> None:
        if length < 0 or payload < 0 or payload >= (1 << max(length, 1)):
            raise ValueError("payload does not fit the declared message length")
        self.messages.append((sender, length, payload))

    @property
    def total_bits(self) -> int:
        return sum(length for _, length, _ in self.messages)

    @property
    def rounds(self) -> int:
        count = 0
        previous = None
        for sender, _, _ in self.messages:
            if sender != previous:
                count += 1
                previous = sender
        return count


@dataclass(frozen=True)
class ErrorEstimate:
    """Error figure with its estimation mode and uncertainty.

    ``value`` (and ``ci95``) are scalars except in by_distance mode, where
    they are vectors indexed by Hamming distance.
    """

    mode: str
    value: object
    trials: int
    ci95: object
    exact: bool = False
    details: dict = field(default_factory=dict)


def _ci95(p_hat: float, trials: int) -> float:
    return 1.96 * math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / max(trials, 1))


class Protocol:
    """Immutable two-party protocol description.

    Subclasses implement ``draw_coins`` (public randomness from a
    generator), ``execute`` (both endpoints, writing to a transcript), and
    optionally ``coin_space`` (full enumeration for exact error modes).
    """

    name: str
    n: int
    declared_cost: int
    params: GhdParams | None = None

    def draw_coins(self, rng: np.random.Generator):
        return None

    def coin_space(self):
        """Iterable of (probability, coins), or None if unenumerable."""
        return None

    def execute(self, x, y, coins, transcript: Transcript) -> int:
        raise NotImplementedError

    def run(self, x, y, seed: int) -> tuple[int, Transcript]:
        rng = make_rng(seed)
        transcript = Transcript()
        output = self.execute(x, y, self.draw_coins(rng), transcript)
        if transcript.total_bits > self.declared_cost:
            raise ProtocolContractError(
                f"{self.name}: transcript used {transcript.total_bits} bits, "
                f"declared {self.declared_cost}"
            )
        return output, transcript

    def promise_label(self, x, y):
        """0/1 promise label of an input pair, STAR inside the gap."""
        if self.params is None:
            raise ValueError(f"{self.name} does not define a promise")
        return self.params.label_of_distance(hamming_distance(x, y))

    def worst_case_distances(self) -> list[int]:
        if self.params is None:
            raise ValueError(f"{self.name} does not define a promise")
        return self.params.boundary_distances()

    def sample_pair_at_distance(self, d: int, rng: np.random.Generator):
        return random_pair_at_distance(self.n, d, rng)

    def to_descriptor(self) -> dict:
        raise NotImplementedError


def run_protocol(protocol: Protocol, x, y, seed: int) -> tuple[int, Transcript]:
    """Execute one run; deterministic given (x, y, seed)."""
    return protocol.run(x, y, seed)


# ---------------------------------------------------------------------------
# Built-in protocols


class TrivialProtocol(Protocol):
    """Alice ships her whole input; Bob answers from the exact distance."""

    def __init__(self, params: GhdParams):
        self.name = "trivial"
        self.params = params
        self.n = params.n
        self.declared_cost = params.n

    def coin_space(self):
        return [(1.0, None)]

    def execute(self, x: BitString, y: BitString, coins, transcript: Transcript) -> int:
        if x.n != self.n or y.n != self.n:
            raise ValueError("input length does not match the protocol")
        transcript.send("A", x.bits, self.n)
        d = hamming_distance(x, y)
        return 0 if d <= self.params.t else 1

    def to_descriptor(self) -> dict:
        p = self.params
        return {"name": "trivial", "params": {"n": p.n, "t": p.t, "g": p.g}}


def trivial_protocol(params: GhdParams) -> Protocol:
    """The n-bit baseline: always correct on promise inputs."""
    return TrivialProtocol(params)


class SamplingProtocol(Protocol):
    """Publicly sample a k-subset of coordinates; Alice sends her bits on
    it; Bob thresholds the sampled disagreement count at k t / n.

    If k exceeds n the sample is capped at the full coordinate set (the
    protocol is then exact) and the declared cost is min(k, n).
    """

    def __init__(self, params: GhdParams, k: int):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.name = "sampling"
        self.params = params
        self.n = params.n
        self.k = min(k, params.n)
        self.requested_k = k
        self.declared_cost = self.k

    def draw_coins(self, rng: np.random.Generator) -> int:
        if self.k == self.n:
            return (1 << self.n) - 1
        return random_mask_of_weight(self.n, self.k, rng)

    def coin_space(self):
        if math.comb(self.n, self.k) > COIN_SPACE_CAP:
            return None
        prob = 1.0 / math.comb(self.n, self.k)
        return [
            (prob, sum(1 << i for i in combo))
            for combo in itertools.combinations(range(self.n), self.k)
        ]

    def execute(self, x: BitString, y: BitString, coins: int, transcript: Transcript) -> int:
        mask = coins
        payload = _extract_bits(x.bits, mask)
        transcript.send("A", payload, self.k)
        d = ((x.bits ^ y.bits) & mask).bit_count()
        return 0 if d <= self.k * self.params.t / self.params.n else 1

    def to_descriptor(self) -> dict:
        p = self.params
        return {
            "name": "sampling",
            "params": {"n": p.n, "t": p.t, "g": p.g, "k": self.requested_k},
        }


def _extract_bits(bits: int, mask: int) -> int:
    """Pack the bits of ``bits`` selected by ``mask`` into a dense word."""
    if mask == (1 << mask.bit_length()) - 1:
        return bits & mask
    out = 0
    j = 0
    while mask:
        low = mask & -mask
        if bits & low:
            out |= 1 << j
        j += 1
        mask ^= low
    return out


def sampling_protocol(params: GhdParams, k: int) -> Protocol:
    """Coordinate-sampling upper-bound protocol with cost min(k, n)."""
    return SamplingProtocol(params, k)


def embed_cube_input(x: BitString) -> np.ndarray:
    """Map a bitstring to the unit vector ((-1)**x_i / sqrt(n))_i."""
    signs = np.array([1.0 if x.bit(i) == 0 else -1.0 for i in range(x.n)])
    return signs / math.sqrt(x.n)


class HyperplaneGipProtocol(Protocol):
    """Compare which side of k shared random hyperplanes the inputs lie on.

    Inputs are unit vectors in R**d (bitstrings are embedded on the scaled
    hypercube first).  Alice sends her k side bits; Bob outputs 1 for
    "inner product is positive" when the disagreement fraction is below
    one half.  Non-unit inputs are normalized with a transcript warning.
    """

    def __init__(self, d: int, k: int, eps: float = 0.25):
        if d < 1 or k < 1:
            raise ValueError("d and k must be >= 1")
        self.name = "hyperplane_gip"
        self.n = d
        self.k = k
        self.eps = eps
        self.declared_cost = k
        self.params = None

    def draw_coins(self, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal((self.k, self.n))

    def _as_unit_vector(self, v, transcript: Transcript) -> np.ndarray:
        if isinstance(v, BitString):
            return embed_cube_input(v)
        vec = np.asarray(v, dtype=np.float64)
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > 1e-9:
            transcript.warnings.append("input normalized to unit length")
            vec = vec / norm
        return vec

    def execute(self, x, y, coins: np.ndarray, transcript: Transcript) -> int:
        vx = self._as_unit_vector(x, transcript)
        vy = self._as_unit_vector(y, transcript)
        sides_a = coins @ vx >= 0
        sides_b = coins @ vy >= 0
        payload = int.from_bytes(np.packbits(sides_a, bitorder="little").tobytes(), "little")
        transcript.send("A", payload, self.k)
        disagreements = int(np.count_nonzero(sides_a != sides_b))
        return 1 if disagreements / self.k < 0.5 else 0

    def promise_label(self, x, y):
        vx = x if not isinstance(x, BitString) else embed_cube_input(x)
        vy = y if not isinstance(y, BitString) else embed_cube_input(y)
        ip = float(np.dot(vx, vy))
        if ip >= self.eps:
            return 1
        if ip <= -self.eps:
            return 0
        return STAR

    def to_descriptor(self) -> dict:
        return {
            "name": "hyperplane_gip",
            "params": {"d": self.n, "k": self.k, "eps": self.eps},
        }


def hyperplane_gip_protocol(d: int, k: int, eps: float = 0.25) -> Protocol:
    """Random-hyperplane sign-comparison protocol for gapped inner product."""
    return HyperplaneGipProtocol(d, k, eps)


# ---------------------------------------------------------------------------
# Reduction toolkit

REDUCTION_KINDS = (
    "widen_gap",
    "repeat",
    "pad",
    "complement",
    "center_shift",
    "randomize_uniform",
    "gis_encode",
)


def gis_inner_params(n: int, t: float, g: float) -> GhdParams:
    """Distance-threshold parameters induced by the balanced set encoding.

    The encoding triples the universe and fixes both set sizes at n, so
    dist = 2n - 2|intersection|; intersection > t + g forces
    dist <= D1 := ceil(2(n-t-g)) - 1 and intersection <= t - g forces
    dist >= D0 := ceil(2(n-t+g)); the inner promise is placed strictly
    between the two.
    """
    if g < 0:
        raise ValueError("gap must be nonnegative")
    d1 = math.ceil(2 * (n - t - g)) - 1
    d0 = math.ceil(2 * (n - t + g))
    inner_t = (d0 + d1 - 0.5) / 2.0
    inner_g = (d0 - 0.5 - d1) / 2.0
    return GhdParams(3 * n, inner_t, inner_g)


class ReducedProtocol(Protocol):
    """A protocol obtained by wrapping ``inner`` in an input reduction."""

    def __init__(self, kind: str, args: dict, inner: Protocol):
        if kind not in REDUCTION_KINDS:
            raise ValueError(f"unknown reduction kind {kind!r}")
        self.kind = kind
        self.args = dict(args)
        self.inner = inner
        self.name = f"{kind}({inner.name})"
        self.declared_cost = inner.declared_cost
        self._setup()

    def _setup(self):
        kind, args, inner = self.kind, self.args, self.inner
        p = inner.params
        if kind == "widen_gap":
            g_new = args["g"]
            if p is None or g_new < p.g:
                raise ValueError("widen_gap requires a promise and g' >= g")
            self.n = p.n
            self.params = GhdParams(p.n, p.t, g_new)
        elif kind == "repeat":
            k = args["k"]
            if p is None or k < 1 or p.n % k != 0:
                raise ValueError("repeat requires k >= 1 dividing the inner length")
            self.n = p.n // k
            self.params = GhdParams(self.n, p.t / k, p.g / k)
        elif kind == "pad":
            ell, m_pad = args["ell"], args["m_pad"]
            if p is None or ell < 0 or m_pad < 0:
                raise ValueError("pad lengths must be nonnegative")
            n_out = p.n - ell - m_pad
            if n_out < 1:
                raise ValueError("padding does not fit the inner input length")
            self.n = n_out
            self.params = GhdParams(n_out, p.t - ell, p.g)
        elif kind == "complement":
            if p is None:
                raise ValueError("complement requires a promise")
            self.n = p.n
            self.params = GhdParams(p.n, p.n - p.t, p.g)
        elif kind == "center_shift":
            # pad with ell = n/2 + b sqrt(n) ones-vs-zeros and the
            # complementary zeros so the inner instance is centered
            b = args["b"]
            if p is None or p.n % 2 != 0:
                raise ValueError("center_shift requires an even inner length")
            n_out = p.n // 2
            ell = round(n_out / 2 + b * math.sqrt(n_out))
            m_pad = n_out - ell
            if not 0 <= ell <= n_out:
                raise ValueError("shift parameter b out of range for this n")
            self.args = {"b": b, "ell": ell, "m_pad": m_pad}
            self.n = n_out
            self.params = GhdParams(n_out, p.t - ell, p.g)
        elif kind == "randomize_uniform":
            if p is None:
                raise ValueError("randomize_uniform requires a promise")
            self.n = p.n
            self.params = p
        elif kind == "gis_encode":
            n, t, g = args["n"], args["t"], args["g"]
            expected = gis_inner_params(n, t, g)
            if inner.n != expected.n:
                raise ValueError(
                    f"gis_encode needs an inner protocol on {expected.n} coordinates"
                )
            if p is None or abs(p.t - expected.t) > 1e-9 or abs(p.g - expected.g) > 1e-9:
                raise ValueError(
                    f"inner promise must be t={expected.t}, g={expected.g}"
                )
            self.n = n
            self.params = None
            self.gis_t, self.gis_g = t, g

    # -- input maps ---------------------------------------------------------

    def draw_coins(self, rng: np.random.Generator):
        if self.kind == "randomize_uniform":
            z = random_bits(self.n, rng)
            sigma = rng.permutation(self.n)
            return (z, sigma), self.inner.draw_coins(rng)
        return None, self.inner.draw_coins(rng)

    def coin_space(self):
        if self.kind == "randomize_uniform":
            return None
        inner_space = self.inner.coin_space()
        if inner_space is None:
            return None
        return [(prob, (None, coins)) for prob, coins in inner_space]

    def transform(self, x: BitString, y: BitString, reduction_coins=None):
        """Apply the input map; pure in (x, y, reduction_coins)."""
        kind, args = self.kind, self.args
        if kind == "widen_gap":
            return x, y
        if kind == "repeat":
            k = args["k"]
            xb = yb = 0
            for i in range(k):
                xb |= x.bits << (i * self.n)
                yb |= y.bits << (i * self.n)
            return BitString(self.n * k, xb), BitString(self.n * k, yb)
        if kind in ("pad", "center_shift"):
            ell, m_pad = args["ell"], args["m_pad"]
            total = self.n + ell + m_pad
            ones = ((1 << ell) - 1) << self.n
            return BitString(total, x.bits), BitString(total, y.bits | ones)
        if kind == "complement":
            return BitString(self.n, x.bits ^ ((1 << self.n) - 1)), y
        if kind == "randomize_uniform":
            z, sigma = reduction_coins
            return _permute(x.bits ^ z, sigma, self.n), _permute(y.bits ^ z, sigma, self.n)
        if kind == "gis_encode":
            return _gis_balanced_encode(x, y, self.n)
        raise AssertionError(kind)

    def execute(self, x, y, coins, transcript: Transcript) -> int:
        reduction_coins, inner_coins = coins
        xt, yt = self.transform(x, y, reduction_coins)
        out = self.inner.execute(xt, yt, inner_coins, transcript)
        if self.kind in ("complement", "gis_encode"):
            return 1 - out
        return out

    def promise_label(self, x, y):
        if self.kind == "gis_encode":
            size = (x.bits & y.bits).bit_count()
            if size > self.gis_t + self.gis_g:
                return 1
            if size <= self.gis_t - self.gis_g:
                return 0
            return STAR
        return super().promise_label(x, y)

    def worst_case_distances(self) -> list[int]:
        if self.kind == "gis_encode":
            raise ValueError("intersection-size promise has no distance classes")
        return super().worst_case_distances()

    def to_descriptor(self) -> dict:
        base = self.inner.to_descriptor()
        base.setdefault("reductions", [])
        return {
            **base,
            "reductions": base["reductions"] + [{"kind": self.kind, "args": self.args}],
        }


def _permute(bits: int, sigma: np.ndarray, n: int) -> BitString:
    """Move bit i to position sigma[i]."""
    out = 0
    for i in range(n):
        if (bits >> i) & 1:
            out |= 1 << int(sigma[i])
    return BitString(n, out)


def _gis_balanced_encode(x: BitString, y: BitString, n: int):
    """Balanced disjoint-padding encoding of a set pair into 3n coordinates.

    Alice tops her set up to size n inside [n, 2n); Bob inside [2n, 3n);
    the intersection is preserved and dist = 2n - 2|intersection|.
    """
    if x.n != n or y.n != n:
        raise ValueError("input length mismatch")
    pad_a = (1 << (n - x.weight())) - 1
    pad_b = (1 << (n - y.weight())) - 1
    xb = x.bits | (pad_a << n)
    yb = y.bits | (pad_b << (2 * n))
    return BitString(3 * n, xb), BitString(3 * n, yb)


def apply_reduction(kind: str, args: dict, inner: Protocol) -> Protocol:
    """Wrap ``inner`` in one of the toolkit reductions.

    Distance-transfer laws (exact): repeat(k) maps d to k d; pad(ell, m)
    maps d to d + ell; complement maps d to n - d; randomize_uniform
    preserves d; gis_encode satisfies |intersection| = (|x|+|y|-d)/2.
    Cost is always the inner cost.
    """
    return ReducedProtocol(kind, args, inner)


def worked_composition(params: GhdParams) -> dict:
    """Reduction chain from an off-center instance to a centered one.

    For t <= n/2 (apply complement first otherwise) the chain is:
    pad with ell = n - 2t zeros-vs-ones to center the threshold, then
    repeat k = ceil(4 (n - t) / g**2) times so the gap reaches
    sqrt(2 * length), then widen to the actual repeated gap.  Returns the
    chain (outermost first) and the centered inner parameters.
    """
    n, t, g = params.n, params.t, params.g
    if g <= 0:
        raise ValueError("composition needs a positive gap")
    chain = []
    if t > n / 2:
        chain.append(("complement", {}))
        t = n - t
    ell = round(n - 2 * t)
    chain.append(("pad", {"ell": ell, "m_pad": 0}))
    length = n + ell
    k = max(1, math.ceil(2 * length / (g * g)))
    chain.append(("repeat", {"k": k}))
    inner = GhdParams(k * length, k * length / 2, math.sqrt(2 * k * length))
    chain.append(("widen_gap", {"g": k * g}))
    return {"chain": chain, "inner": inner}


def compose_chain(chain: list, inner: Protocol) -> Protocol:
    """Apply a reduction chain (outermost first) around an inner protocol."""
    protocol = inner
    for kind, args in reversed(chain):
        protocol = apply_reduction(kind, args, protocol)
    return protocol


# ---------------------------------------------------------------------------
# Error estimation


@dataclass(frozen=True)
class PromiseWorstCase:
    """Maximize error over the promise boundary distance classes."""


@dataclass(frozen=True)
class UnderXi:
    """Average error under a correlated cube pair law."""

    law: CubePairLaw


@dataclass(frozen=True)
class ExplicitPairs:
    """Average error over an explicit input pair family."""

    pairs: tuple

    def __init__(self, pairs):
        object.__setattr__(self, "pairs", tuple(pairs))


def _mc_error_at_distance(protocol, d, trials, seed, stream, offset=0):
    # per-trial seeds are derived from the global trial index, so any
    # partition of the index range reproduces the serial result
    errors = 0
    for i in range(offset, offset + trials):
        rng = make_rng(seed, stream, d, i)
        x, y = protocol.sample_pair_at_distance(d, rng)
        label = protocol.promise_label(x, y)
        if label is STAR:
            continue
        output, _ = protocol.run(x, y, int(rng.integers(0, 2**63)))
        if output != label:
            errors += 1
    return errors / trials


def _exact_error_at_distance(protocol, d, coin_space) -> float:
    x = BitString(protocol.n, 0)
    y = BitString(protocol.n, (1 << d) - 1)
    label = protocol.promise_label(x, y)
    if label is STAR:
        return 0.0
    error = 0.0
    for prob, coins in coin_space:
        output = protocol.execute(x, y, coins, Transcript())
        if output != label:
            error += prob
    return error


def estimate_error(
    protocol: Protocol,
    spec,
    trials: int,
    seed: int,
    exact: bool = False,
    trial_offset: int = 0,
) -> ErrorEstimate:
    """Estimate protocol error under a given input specification.

    Monte Carlo by default.  With exact=True the public-coin space is
    enumerated instead (available for the built-in distance-symmetric
    protocols with enumerable coins); no sampling error remains and the
    per-distance errors are computed on canonical pairs.  ``trial_offset``
    shifts the trial index range so workers can split an estimate without
    changing its value.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")

    if exact:
        coin_space = protocol.coin_space()
        if coin_space is None:
            raise ValueError(f"{protocol.name} does not support exact enumeration")
        if isinstance(spec, PromiseWorstCase):
            per_d = {
                d: _exact_error_at_distance(protocol, d, coin_space)
                for d in protocol.worst_case_distances()
            }
            value = max(per_d.values()) if per_d else 0.0
            return ErrorEstimate("worst_case_promise", value, 0, 0.0, True, {"per_distance": per_d})
        if isinstance(spec, UnderXi):
            pmf = distance_law(spec.law.n, spec.law.p).pmf
            value = sum(
                pmf[d] * _exact_error_at_distance(protocol, d, coin_space)
                for d in range(protocol.n + 1)
                if pmf[d] > 0
            )
            return ErrorEstimate("distributional", float(value), 0, 0.0, True)
        if isinstance(spec, ExplicitPairs):
            total = 0.0
            for x, y in spec.pairs:
                label = protocol.promise_label(x, y)
                if label is STAR:
                    continue
                for prob, coins in coin_space:
                    if protocol.execute(x, y, coins, Transcript()) != label:
                        total += prob
            value = total / len(spec.pairs)
            return ErrorEstimate("explicit_pairs", value, 0, 0.0, True)
        raise ValueError(f"unsupported spec {spec!r}")

    if isinstance(spec, PromiseWorstCase):
        per_d = {
            d: _mc_error_at_distance(protocol, d, trials, seed, 0, trial_offset)
            for d in protocol.worst_case_distances()
        }
        value = max(per_d.values()) if per_d else 0.0
        return ErrorEstimate(
            "worst_case_promise", value, trials, _ci95(value, trials), False,
            {"per_distance": per_d},
        )
    if isinstance(spec, UnderXi):
        errors = 0
        for i in range(trial_offset, trial_offset + trials):
            rng = make_rng(seed, 1, i)
            x, y = sample_xi(spec.law, int(rng.integers(0, 2**63)))
            label = protocol.promise_label(x, y)
            if label is STAR:
                continue
            output, _ = protocol.run(x, y, int(rng.integers(0, 2**63)))
            if output != label:
                errors += 1
        value = errors / trials
        return ErrorEstimate("distributional", value, trials, _ci95(value, trials))
    if isinstance(spec, ExplicitPairs):
        errors = 0
        for i in range(trial_offset, trial_offset + trials):
            rng = make_rng(seed, 2, i)
            x, y = spec.pairs[int(rng.integers(0, len(spec.pairs)))]
            label = protocol.promise_label(x, y)
            if label is STAR:
                continue
            output, _ = protocol.run(x, y, int(rng.integers(0, 2**63)))
            if output != label:
                errors += 1
        value = errors / trials
        return ErrorEstimate("explicit_pairs", value, trials, _ci95(value, trials))
    raise ValueError(f"unsupported spec {spec!r}")


def error_by_distance_profile(
    protocol: Protocol, n: int, trials_per_d: int, seed: int
) -> ErrorEstimate:
    """Estimate the error at every Hamming distance d = 0..n.

    Pairs at distance d are uniform: x uniform, y flips a uniform
    d-subset.  Distances whose label is STAR contribute zero by
    definition of the error.
    """
    deltas = np.zeros(n + 1)
    for d in range(n + 1):
        deltas[d] = _mc_error_at_distance(protocol, d, trials_per_d, seed, 3)
    ci = 1.96 * np.sqrt(deltas * (1 - deltas) / trials_per_d)
    return ErrorEstimate("by_distance", deltas, trials_per_d, ci)


# ---------------------------------------------------------------------------
# Descriptors


def protocol_from_descriptor(desc: dict) -> Protocol:
    """Rebuild a protocol from its JSON descriptor.

    Descriptors have the shape {name, params, reductions: [...]}, with
    the reduction list applied innermost first.
    """
    name = desc["name"]
    params = desc.get("params", {})
    if name == "trivial":
        protocol = trivial_protocol(GhdParams(params["n"], params["t"], params["g"]))
    elif name == "sampling":
        protocol = sampling_protocol(
            GhdParams(params["n"], params["t"], params["g"]), params["k"]
        )
    elif name == "hyperplane_gip":
        protocol = hyperplane_gip_protocol(
            params["d"], params["k"], params.get("eps", 0.25)
        )
    elif name == "stream_f0":
        from .streams import kmv_f0, streaming_to_protocol

        protocol, _ = streaming_to_protocol(
            kmv_f0(params["k"]),
            params["passes"],
            GhdParams(params["n"], params["t"], params["g"]),
        )
    else:
        raise ValueError(f"unknown protocol descriptor {name!r}")
    for step in desc.get("reductions", []):
        protocol = apply_reduction(step["kind"], step["args"], protocol)
    return protocol
