"""Communication matrices, rectangle scans, and corruption certificates.

All distributions handled here are distance-symmetric: their mass on a
pair depends only on the Hamming distance.  A rectangle's mass under any
such law is a weighted sum over its pair-distance histogram, which keeps
every scan exact.  Certificate arithmetic follows the joker-corruption
accounting: for a rectangle R,

    slack(R) = alpha0 mu0(R) + 2**-m - alpha1 mu1(R) + alphaplus muplus(R)

and a nonnegative slack on every rectangle yields the bound m + beta on
distributional communication cost (see corruption_lower_bound).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import CubeSet, GhdParams
from .cubexform import distance_histogram, xi_log_weights
from .errors import CapacityError, CertificateInfeasibleError, DisjointnessError
from .rng import make_rng

#: Largest n for which dense communication-matrix structures are allowed.
MATRIX_N_CAP = 14

#: Largest n for the exhaustive rectangle scan.
EXHAUSTIVE_N_CAP = 4

#: Largest n for explicit-set scan families (greedy toggles, random sets).
EXPLICIT_SCAN_N_CAP = 16


# ---------------------------------------------------------------------------
# Distance-symmetric distribution descriptors


@dataclass(frozen=True)
class DistanceMixtureLaw:
    """Pick a distance from ``pmf``, then a uniform pair at that distance."""

    n: int
    pmf: tuple

    def __post_init__(self):
        if len(self.pmf) != self.n + 1:
            raise ValueError("pmf must have n + 1 entries")


@dataclass(frozen=True)
class MixtureLaw:
    """Convex combination of distance-symmetric descriptors."""

    components: tuple  # of (weight, descriptor)


def distance_pair_weights(descriptor, n: int) -> np.ndarray:
    """Per-pair mass at each distance d = 0..n under the descriptor."""
    from .core import CubePairLaw

    if isinstance(descriptor, CubePairLaw):
        if descriptor.n != n:
            raise ValueError("descriptor dimension mismatch")
        return np.exp(xi_log_weights(n, descriptor.p))
    if isinstance(descriptor, DistanceMixtureLaw):
        if descriptor.n != n:
            raise ValueError("descriptor dimension mismatch")
        pmf = np.asarray(descriptor.pmf, dtype=np.float64)
        classes = np.array([math.comb(n, d) for d in range(n + 1)], dtype=np.float64)
        return pmf / (classes * float(2**n))
    if isinstance(descriptor, MixtureLaw):
        out = np.zeros(n + 1)
        for weight, part in descriptor.components:
            out += float(weight) * distance_pair_weights(part, n)
        return out
    raise ValueError(f"unsupported distribution descriptor {descriptor!r}")


# ---------------------------------------------------------------------------
# Communication matrices and rectangles


@dataclass(frozen=True)
class CommMatrix:
    """Distance-symmetric {0,1,star} labeling of all input pairs."""

    n: int
    label_by_distance: tuple

    def __post_init__(self):
        if self.n > MATRIX_N_CAP:
            raise CapacityError(f"dense matrices require n <= {MATRIX_N_CAP}")
        if len(self.label_by_distance) != self.n + 1:
            raise ValueError("need one label per distance 0..n")

    def label(self, x: int, y: int):
        return self.label_by_distance[bin(x ^ y).count("1")]

    def label_signs(self) -> np.ndarray:
        """+1 on 0-labeled distances, -1 on 1-labeled, 0 on star."""
        out = np.zeros(self.n + 1)
        for d, lab in enumerate(self.label_by_distance):
            if lab == 0:
                out[d] = 1.0
            elif lab == 1:
                out[d] = -1.0
        return out


def build_ghd_matrix(params: GhdParams) -> CommMatrix:
    """Communication matrix of the gap problem at these parameters."""
    labels = tuple(params.label_of_distance(d) for d in range(params.n + 1))
    return CommMatrix(params.n, labels)


def constant_matrix(n: int, label) -> CommMatrix:
    return CommMatrix(n, tuple(label for _ in range(n + 1)))


@dataclass(frozen=True)
class Rectangle:
    """Product set rows x cols."""

    rows: CubeSet
    cols: CubeSet

    def __post_init__(self):
        if self.rows.n != self.cols.n:
            raise ValueError("rows and cols must share a dimension")

    @property
    def n(self) -> int:
        return self.rows.n

    def histogram(self):
        return distance_histogram(self.rows, self.cols)

    def is_empty(self) -> bool:
        return len(self.rows) == 0 or len(self.cols) == 0


@dataclass(frozen=True)
class SubcubeRectangle:
    """Rectangle whose sides are subcubes (per-coordinate bit constraints).

    ``row_bits``/``col_bits`` map a coordinate index to the forced bit.
    Measures of product laws factor across coordinates, so slack
    evaluation is O(n) regardless of the sets' sizes.
    """

    n: int
    row_bits: dict
    col_bits: dict

    def side_codes(self, bits: dict) -> np.ndarray:
        free = [i for i in range(self.n) if i not in bits]
        if len(free) > 24:
            raise CapacityError("subcube too large to materialize")
        base = sum(1 << i for i, b in bits.items() if b)
        codes = []
        for pattern in range(1 << len(free)):
            code = base
            for j, i in enumerate(free):
                if (pattern >> j) & 1:
                    code |= 1 << i
            codes.append(code)
        return np.array(codes, dtype=np.uint64)

    def materialize(self) -> Rectangle:
        return Rectangle(
            CubeSet(self.n, self.side_codes(self.row_bits)),
            CubeSet(self.n, self.side_codes(self.col_bits)),
        )

    def xi_mass(self, p: float) -> float:
        """Closed-form correlated measure of the subcube rectangle."""
        mass = 1.0
        for i in range(self.n):
            in_row = i in self.row_bits
            in_col = i in self.col_bits
            if in_row and in_col:
                agree = self.row_bits[i] == self.col_bits[i]
                mass *= (1.0 + p) / 4.0 if agree else (1.0 - p) / 4.0
            elif in_row or in_col:
                mass *= 0.5
        return mass

    def xi0_mass(self) -> float:
        return self.xi_mass(0.0)


def opposed_prefix_rectangle(n: int, s: int) -> SubcubeRectangle:
    """Rows force x_i = 0 and columns force y_i = 1 on the first s coords.

    The canonical large nearly-monochromatic rectangle: heavy under the
    uniform pair law, vanishing under positive correlation, heavy again
    under negative correlation (which is what the joker term exploits).
    """
    return SubcubeRectangle(n, {i: 0 for i in range(s)}, {i: 1 for i in range(s)})


def mass_on_rectangle(descriptor, rectangle: Rectangle) -> float:
    """Exact mass of a rectangle under a distance-symmetric descriptor."""
    if rectangle.is_empty():
        return 0.0
    weights = distance_pair_weights(descriptor, rectangle.n)
    counts = rectangle.histogram().counts.astype(np.float64)
    return float(np.dot(counts, weights))


# ---------------------------------------------------------------------------
# Corruption certificates


@dataclass
class CorruptionCertificate:
    """Data of a joker-corruption certificate.

    mu0/mu1/muplus are distance-symmetric descriptors; the alphas weight
    them in the rectangle inequality; eps bounds how much of mu0/mu1 may
    sit off their label classes; m is the exponent of the additive term.
    Exact rational alphas/eps (Fraction) are propagated exactly.
    """

    mu0: object
    mu1: object
    muplus: object
    alpha0: object
    alpha1: object
    alphaplus: object
    eps: object
    m: float
    derived: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CorruptionBound:
    nu: MixtureLaw
    eps_prime: float
    beta: float
    bound: float


def corruption_lower_bound(cert: CorruptionCertificate) -> CorruptionBound:
    """Derive the communication bound m + beta from certificate constants.

    eps_prime takes half the available slack
    slack0 = alpha1 - alphaplus - (alpha0 + alpha1) eps, which must be
    positive (equivalently eps < (alpha1 - alphaplus)/(alpha0 + alpha1));
    then 2**beta = slack0 / 2 and the hard distribution is
    nu = (alpha0 mu0 + alpha1 mu1) / (alpha0 + alpha1).
    """
    a0, a1, aplus, eps = cert.alpha0, cert.alpha1, cert.alphaplus, cert.eps
    if min(float(a0), float(a1), float(aplus)) < 0 or float(eps) < 0:
        raise CertificateInfeasibleError("alphas and eps must be nonnegative")
    slack0 = a1 - aplus - (a0 + a1) * eps
    if float(slack0) <= 0:
        raise CertificateInfeasibleError(
            f"eps={eps} is not below (alpha1 - alphaplus)/(alpha0 + alpha1)"
        )
    eps_prime = slack0 / (2 * (a0 + a1))
    beta = math.log2(float(slack0) / 2.0)
    total = a0 + a1
    nu = MixtureLaw(((a0 / total, cert.mu0), (a1 / total, cert.mu1)))
    derived = CorruptionBound(nu, eps_prime, beta, cert.m + beta)
    cert.derived = {
        "eps_prime": float(eps_prime),
        "beta": beta,
        "bound": cert.m + beta,
    }
    return derived


def canonical_certificate(n: int, rho: float, delta: float = 0.05) -> CorruptionCertificate:
    """Joker certificate with the canonical constants: alpha1 = 2/3,
    alpha0 = alphaplus = 1/2, eps = 1/8, m = delta n; mu0/mu1/muplus are
    the +rho / zero / -rho correlated pair laws."""
    from .core import CubePairLaw

    return CorruptionCertificate(
        mu0=CubePairLaw(n, rho),
        mu1=CubePairLaw(n, 0.0),
        muplus=CubePairLaw(n, -rho),
        alpha0=Fraction(1, 2),
        alpha1=Fraction(2, 3),
        alphaplus=Fraction(1, 2),
        eps=Fraction(1, 8),
        m=delta * n,
    )


# ---------------------------------------------------------------------------
# Slack evaluation


def _slack_weights(cert: CorruptionCertificate, n: int) -> np.ndarray:
    """Per-pair slack contribution at each distance (excluding 2**-m)."""
    return (
        float(cert.alpha0) * distance_pair_weights(cert.mu0, n)
        - float(cert.alpha1) * distance_pair_weights(cert.mu1, n)
        + float(cert.alphaplus) * distance_pair_weights(cert.muplus, n)
    )


def joker_slack(cert: CorruptionCertificate, rectangle, n: int | None = None) -> float:
    """slack(R) for an explicit Rectangle or a SubcubeRectangle."""
    additive = 2.0 ** -cert.m
    if isinstance(rectangle, SubcubeRectangle):
        from .core import CubePairLaw

        for mu in (cert.mu0, cert.mu1, cert.muplus):
            if not isinstance(mu, CubePairLaw):
                raise ValueError("subcube evaluation needs product-form descriptors")
        return (
            float(cert.alpha0) * rectangle.xi_mass(cert.mu0.p)
            - float(cert.alpha1) * rectangle.xi_mass(cert.mu1.p)
            + float(cert.alphaplus) * rectangle.xi_mass(cert.muplus.p)
            + additive
        )
    if rectangle.is_empty():
        return additive
    weights = _slack_weights(cert, rectangle.n)
    counts = rectangle.histogram().counts.astype(np.float64)
    return float(np.dot(counts, weights)) + additive


# ---------------------------------------------------------------------------
# Rectangle scans


@dataclass
class RectangleScanReport:
    mode: str
    worst_rectangle: object
    min_slack: float
    rectangles_examined: int
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        witness = self.worst_rectangle
        if isinstance(witness, SubcubeRectangle):
            desc = {"kind": "subcube", "row_bits": witness.row_bits, "col_bits": witness.col_bits}
        elif isinstance(witness, Rectangle):
            desc = {
                "kind": "explicit",
                "rows": [int(c) for c in witness.rows.codes],
                "cols": [int(c) for c in witness.cols.codes],
            }
        else:
            desc = None
        return {
            "mode": self.mode,
            "min_slack": self.min_slack,
            "rectangles_examined": self.rectangles_examined,
            "worst_rectangle": desc,
            "exact": True,
            **self.notes,
        }


def _pair_weight_matrix(weights: np.ndarray, n: int) -> np.ndarray:
    """W[x, y] = weights[dist(x, y)] over the full 2**n x 2**n grid."""
    codes = np.arange(1 << n, dtype=np.uint64)
    dist = np.bitwise_count(codes[:, None] ^ codes[None, :])
    return weights[dist]


def _column_sums_all_row_subsets(contrib: np.ndarray) -> np.ndarray:
    """For every row-subset bitmask, the per-column sum of contributions.

    Dynamic program over bitmasks: sums[mask] = sums[mask - low] + row[low].
    """
    size, cols = contrib.shape
    sums = np.zeros((1 << size, cols))
    for mask in range(1, 1 << size):
        low = mask & -mask
        sums[mask] = sums[mask ^ low] + contrib[low.bit_length() - 1]
    return sums


def _best_column_choice(colsums: np.ndarray) -> tuple[float, np.ndarray]:
    """Minimal sum over nonempty column subsets: take all negative columns,
    or the single smallest when none is negative."""
    negatives = colsums < 0
    if negatives.any():
        return float(colsums[negatives].sum()), negatives
    j = int(np.argmin(colsums))
    choice = np.zeros(len(colsums), dtype=bool)
    choice[j] = True
    return float(colsums[j]), choice


def check_joker_inequality(
    cert: CorruptionCertificate,
    mode: str,
    n: int,
    seed: int = 0,
    samples: int = 10_000,
    starts: int = 64,
    moves_per_start: int = 300,
    min_xi0: float = 0.0,
    subcube_max_arity: int = 8,
    explicit_samples: int | None = None,
) -> RectangleScanReport:
    """Search rectangles for minimal joker slack.

    exhaustive (n <= 4): global minimum over all nonempty rectangles, via
    a row-subset dynamic program with per-column optimization.
    random: explicit random sets (n <= 16) mixed with random subcube
    rectangles of bounded arity (any n <= 26); ``min_xi0`` filters the
    explicit family by uniform measure.
    greedy: slack descent over two families merged by minimum: subcube
    constraint edits (any n), and single element toggles on explicit sets
    (n <= 16) with an annealing plateau break.
    """
    additive = 2.0 ** -cert.m
    rng = make_rng(seed)

    if mode == "exhaustive":
        if n > EXHAUSTIVE_N_CAP:
            raise CapacityError(f"exhaustive scan requires n <= {EXHAUSTIVE_N_CAP}")
        weights = _slack_weights(cert, n)
        contrib = _pair_weight_matrix(weights, n)
        colsums = _column_sums_all_row_subsets(contrib)
        size = 1 << n
        best = (math.inf, None, None)
        for mask in range(1, 1 << size):
            body, choice = _best_column_choice(colsums[mask])
            if body < best[0]:
                best = (body, mask, choice)
        body, mask, choice = best
        rows = CubeSet(n, [i for i in range(size) if (mask >> i) & 1])
        cols = CubeSet(n, np.nonzero(choice)[0].astype(np.uint64))
        witness = Rectangle(rows, cols)
        total_rects = ((1 << size) - 1) ** 2
        return RectangleScanReport(
            "exhaustive", witness, body + additive, total_rects,
            {"n": n, "m": cert.m},
        )

    weights = _slack_weights(cert, n)
    best_slack = math.inf
    best_witness = None
    examined = 0

    def consider(slack, witness):
        nonlocal best_slack, best_witness
        if slack < best_slack:
            best_slack = slack
            best_witness = witness

    if mode == "random":
        # explicit sets cost a histogram each; subcube rectangles are O(n),
        # so the bulk of the sample budget goes to them
        if explicit_samples is None:
            explicit_samples = min(samples, 200)
        explicit_budget = explicit_samples if n <= EXPLICIT_SCAN_N_CAP else 0
        for _ in range(explicit_budget):
            density = float(rng.uniform(0.05, 1.0))
            if min_xi0 > 0:
                density = max(density, math.sqrt(min_xi0))
            a = CubeSet.random(n, density, rng)
            b = CubeSet.random(n, density, rng)
            if len(a) == 0 or len(b) == 0:
                continue
            if min_xi0 > 0 and len(a) * len(b) / 4.0**n < min_xi0:
                continue
            rect = Rectangle(a, b)
            consider(joker_slack(cert, rect), rect)
            examined += 1
        sub_examined, sub_best, sub_witness = _random_subcube_scan(
            cert, n, samples, rng, subcube_max_arity, min_xi0
        )
        examined += sub_examined
        if sub_witness is not None:
            consider(sub_best, sub_witness)
        return RectangleScanReport(
            "random", best_witness, best_slack, examined, {"n": n, "m": cert.m}
        )

    if mode == "greedy":
        examined = _greedy_subcube_scan(cert, n, rng, starts, consider)
        if n <= EXPLICIT_SCAN_N_CAP:
            examined += _greedy_explicit_scan(
                cert, n, weights, additive, rng, starts, moves_per_start, min_xi0, consider
            )
        return RectangleScanReport(
            "greedy", best_witness, best_slack, examined, {"n": n, "m": cert.m}
        )

    raise ValueError(f"unknown scan mode {mode!r}")


def _random_subcube_rectangle(n: int, rng, max_arity: int) -> SubcubeRectangle:
    arity = int(rng.integers(0, max_arity + 1))
    coords = rng.choice(n, size=min(arity, n), replace=False)
    row_bits, col_bits = {}, {}
    for i in coords:
        kind = int(rng.integers(0, 3))
        if kind in (0, 2):
            row_bits[int(i)] = int(rng.integers(0, 2))
        if kind in (1, 2):
            col_bits[int(i)] = int(rng.integers(0, 2))
    return SubcubeRectangle(n, row_bits, col_bits)


def _random_subcube_scan(cert, n, samples, rng, max_arity, min_xi0):
    best = math.inf
    witness = None
    examined = 0
    for _ in range(samples):
        rect = _random_subcube_rectangle(n, rng, max_arity)
        if min_xi0 > 0 and rect.xi0_mass() < min_xi0:
            continue
        slack = joker_slack(cert, rect)
        examined += 1
        if slack < best:
            best, witness = slack, rect
    return examined, best, witness


def _greedy_explicit_scan(
    cert, n, weights, additive, rng, starts, moves_per_start, min_xi0, consider
):
    from . import kernels

    examined = 0
    size = 1 << n
    for start in range(starts):
        density = float(rng.uniform(0.5, 1.0))
        rows = rng.random(size) < density
        cols = rng.random(size) < density
        if not rows.any() or not cols.any():
            continue
        col_codes = np.nonzero(cols)[0].astype(np.uint64)
        row_codes = np.nonzero(rows)[0].astype(np.uint64)
        hist = kernels.pairwise_distance_hist(row_codes, col_codes, n)
        body = float(np.dot(hist, weights))
        slack = body + additive
        consider(slack, Rectangle(CubeSet(n, row_codes), CubeSet(n, col_codes)))
        temperature = 0.01 * max(abs(slack), additive)
        for _ in range(moves_per_start):
            toggle_rows = bool(rng.integers(0, 2))
            elem = int(rng.integers(0, size))
            side, codes = (rows, col_codes) if toggle_rows else (cols, row_codes)
            delta_hist = kernels.xor_popcount_hist(codes, elem, n)
            sign = -1.0 if side[elem] else 1.0
            delta = sign * float(np.dot(delta_hist, weights))
            accept = delta < 0 or (
                temperature > 0 and rng.random() < math.exp(-delta / temperature)
            )
            if not accept:
                continue
            new_count = int(side.sum()) + (1 if sign > 0 else -1)
            if new_count == 0:
                continue
            other_count = len(codes)
            if min_xi0 > 0 and new_count * other_count / 4.0**n < min_xi0:
                continue
            side[elem] = not side[elem]
            body += delta
            if toggle_rows:
                row_codes = np.nonzero(rows)[0].astype(np.uint64)
            else:
                col_codes = np.nonzero(cols)[0].astype(np.uint64)
            examined += 1
            consider(
                body + additive,
                Rectangle(CubeSet(n, np.nonzero(rows)[0].astype(np.uint64)),
                          CubeSet(n, np.nonzero(cols)[0].astype(np.uint64))),
            )
    return max(examined, 1)


def _greedy_subcube_scan(cert, n, rng, starts, consider):
    examined = 0
    for _ in range(starts):
        rect = _random_subcube_rectangle(n, rng, max_arity=4)
        slack = joker_slack(cert, rect)
        consider(slack, rect)
        improved = True
        while improved:
            improved = False
            for i in range(n):
                for variant in _constraint_variants(rect, i):
                    cand_slack = joker_slack(cert, variant)
                    examined += 1
                    if cand_slack < slack - 1e-15:
                        rect, slack = variant, cand_slack
                        consider(slack, rect)
                        improved = True
    return examined


def _constraint_variants(rect: SubcubeRectangle, i: int):
    """All single-constraint edits of coordinate i."""
    for side in ("row", "col"):
        bits = dict(rect.row_bits) if side == "row" else dict(rect.col_bits)
        options = []
        if i in bits:
            removed = dict(bits)
            del removed[i]
            options.append(removed)
            flipped = dict(bits)
            flipped[i] ^= 1
            options.append(flipped)
        else:
            for b in (0, 1):
                added = dict(bits)
                added[i] = b
                options.append(added)
        for new_bits in options:
            if side == "row":
                yield SubcubeRectangle(rect.n, new_bits, rect.col_bits)
            else:
                yield SubcubeRectangle(rect.n, rect.row_bits, new_bits)


# ---------------------------------------------------------------------------
# Discrepancy


def discrepancy_scan(
    mu, matrix: CommMatrix, mode: str, seed: int = 0, samples: int = 5000
) -> float:
    """Maximal |mu(R ∩ 0-inputs) - mu(R ∩ 1-inputs)| over scanned rectangles."""
    n = matrix.n
    signed_weights = distance_pair_weights(mu, n) * matrix.label_signs()
    if mode == "exhaustive":
        if n > EXHAUSTIVE_N_CAP:
            raise CapacityError(f"exhaustive scan requires n <= {EXHAUSTIVE_N_CAP}")
        contrib = _pair_weight_matrix(signed_weights, n)
        colsums = _column_sums_all_row_subsets(contrib)
        best = 0.0
        for mask in range(1, 1 << (1 << n)):
            row = colsums[mask]
            high = float(np.maximum(row, 0).sum())
            low = float(np.minimum(row, 0).sum())
            best = max(best, high, -low)
        return best
    if mode == "random":
        rng = make_rng(seed)
        best = 0.0
        for _ in range(samples):
            a = CubeSet.random(n, float(rng.uniform(0.05, 1.0)), rng)
            b = CubeSet.random(n, float(rng.uniform(0.05, 1.0)), rng)
            if len(a) == 0 or len(b) == 0:
                continue
            counts = distance_histogram(a, b).counts.astype(np.float64)
            best = max(best, abs(float(np.dot(counts, signed_weights))))
        # the full rectangle is always worth a look
        full_counts = np.array(
            [math.comb(n, d) * (1 << n) for d in range(n + 1)], dtype=np.float64
        )
        best = max(best, abs(float(np.dot(full_counts, signed_weights))))
        return best
    raise ValueError(f"unknown scan mode {mode!r}")


# ---------------------------------------------------------------------------
# Partition audit


def partition_slack_audit(
    cert: CorruptionCertificate, rectangles: list[Rectangle]
) -> dict:
    """Check linearity of slack over a disjoint rectangle family.

    The per-rectangle slacks are summed and compared against the slack of
    the union evaluated directly on the pair set (with the additive term
    counted once per rectangle, matching the 2**c 2**-m accounting).
    Raises DisjointnessError on overlap.
    """
    if not rectangles:
        raise ValueError("need at least one rectangle")
    n = rectangles[0].n
    if n > 12:
        raise CapacityError("audit materializes the full pair grid; needs n <= 12")
    size = 1 << n
    union = np.zeros((size, size), dtype=bool)
    for rect in rectangles:
        grid = np.zeros((size, size), dtype=bool)
        rows = rect.rows.codes.astype(np.int64)
        cols = rect.cols.codes.astype(np.int64)
        grid[np.ix_(rows, cols)] = True
        if (union & grid).any():
            raise DisjointnessError("rectangle family overlaps")
        union |= grid

    summed = sum(joker_slack(cert, rect) for rect in rectangles)

    codes = np.arange(size, dtype=np.uint64)
    dist = np.bitwise_count(codes[:, None] ^ codes[None, :])
    weights = _slack_weights(cert, n)
    union_counts = np.bincount(dist[union], minlength=n + 1).astype(np.float64)
    direct = float(np.dot(union_counts, weights)) + len(rectangles) * 2.0 ** -cert.m

    return {"summed": float(summed), "direct": direct, "difference": float(summed) - direct}
