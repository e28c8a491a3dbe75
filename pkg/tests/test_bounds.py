import math
from fractions import Fraction

import numpy as np
import pytest

from ghdlab.bounds import (
    DistanceMixtureLaw,
    MixtureLaw,
    Rectangle,
    SubcubeRectangle,
    build_ghd_matrix,
    check_joker_inequality,
    constant_matrix,
    corruption_lower_bound,
    discrepancy_scan,
    distance_pair_weights,
    joker_slack,
    mass_on_rectangle,
    opposed_prefix_rectangle,
    canonical_certificate,
    partition_slack_audit,
)
from ghdlab.core import STAR, CubePairLaw, CubeSet, GhdParams, distance_law
from ghdlab.cubexform import disjoint_support_pair
from ghdlab.errors import CertificateInfeasibleError, DisjointnessError
from ghdlab.rng import make_rng


def slack_weight_matrix(cert, n):
    """Per-pair slack contribution table, for brute-force oracles."""
    w = (
        float(cert.alpha0) * distance_pair_weights(cert.mu0, n)
        - float(cert.alpha1) * distance_pair_weights(cert.mu1, n)
        + float(cert.alphaplus) * distance_pair_weights(cert.muplus, n)
    )
    codes = np.arange(1 << n, dtype=np.uint64)
    dist = np.bitwise_count(codes[:, None] ^ codes[None, :])
    return w[dist]


class TestBuildGhdMatrix:
    def test_small_labels(self):
        m = build_ghd_matrix(GhdParams(2, 1, 0.5))
        assert m.label_by_distance == (0, STAR, 1)

    def test_symmetric_and_distance_dependent(self):
        for n in range(1, 9):
            m = build_ghd_matrix(GhdParams(n, n / 2, math.sqrt(n) / 2))
            for x in range(min(1 << n, 32)):
                for y in range(min(1 << n, 32)):
                    assert m.label(x, y) == m.label(y, x)
                    d = bin(x ^ y).count("1")
                    assert m.label(x, y) == m.label_by_distance[d]


class TestMassOnRectangle:
    def test_uniform_mass_is_counting(self):
        rng = make_rng(1)
        n = 8
        a, b = CubeSet.random(n, 0.4, rng), CubeSet.random(n, 0.6, rng)
        mass = mass_on_rectangle(CubePairLaw(n, 0.0), Rectangle(a, b))
        assert math.isclose(mass, len(a) * len(b) / 4.0**n, rel_tol=1e-12)

    def test_full_rectangle_probability_one(self):
        n = 6
        full = CubeSet.full(n)
        for p in (-0.9, 0.0, 0.55):
            mass = mass_on_rectangle(CubePairLaw(n, p), Rectangle(full, full))
            assert math.isclose(mass, 1.0, rel_tol=1e-11)

    def test_matches_pairwise_brute_force(self):
        rng = make_rng(2)
        n = 8
        a, b = CubeSet.random(n, 0.3, rng), CubeSet.random(n, 0.5, rng)
        p = 0.45
        oracle = 0.0
        for x in a.codes:
            for y in b.codes:
                d = bin(int(x) ^ int(y)).count("1")
                oracle += 2.0**-n * ((1 + p) / 2) ** (n - d) * ((1 - p) / 2) ** d
        got = mass_on_rectangle(CubePairLaw(n, p), Rectangle(a, b))
        assert math.isclose(got, oracle, rel_tol=1e-11)

    def test_distance_mixture_law_total_mass(self):
        n = 6
        pmf = tuple(distance_law(n, 0.3).pmf)
        law = DistanceMixtureLaw(n, pmf)
        full = CubeSet.full(n)
        assert math.isclose(
            mass_on_rectangle(law, Rectangle(full, full)), 1.0, rel_tol=1e-11
        )

    def test_monotone_in_nesting(self):
        rng = make_rng(3)
        n = 7
        big_a = CubeSet.random(n, 0.8, rng)
        big_b = CubeSet.random(n, 0.8, rng)
        small_a = CubeSet(n, big_a.codes[: len(big_a) // 2])
        small_b = CubeSet(n, big_b.codes[: len(big_b) // 2])
        for p in (-0.5, 0.0, 0.7):
            law = CubePairLaw(n, p)
            assert mass_on_rectangle(law, Rectangle(small_a, small_b)) <= (
                mass_on_rectangle(law, Rectangle(big_a, big_b)) + 1e-15
            )


class TestCorruptionLowerBound:
    def canonical(self, m=32.0):
        cert = canonical_certificate(64, 0.5)
        cert.m = m
        return cert

    def test_canonical_arithmetic(self):
        derived = corruption_lower_bound(self.canonical(m=32.0))
        assert math.isclose(derived.eps_prime, 1 / 112, rel_tol=1e-15)
        assert abs(derived.beta + math.log2(96)) < 1e-12
        assert abs(derived.bound - (32 - math.log2(96))) < 1e-12

    def test_certificate_invariants_recomputed(self):
        cert = self.canonical()
        derived = corruption_lower_bound(cert)
        a0, a1, aplus, eps = cert.alpha0, cert.alpha1, cert.alphaplus, cert.eps
        assert eps < (a1 - aplus) / (a0 + a1)
        lhs = a1 - aplus - (a0 + a1) * (eps + derived.eps_prime)
        assert lhs > 0
        assert abs(2.0**derived.beta - float(lhs)) < 1e-15
        assert derived.bound == cert.m + derived.beta
        total = a0 + a1
        components = {part: weight for weight, part in derived.nu.components}
        assert components[cert.mu0] == a0 / total
        assert components[cert.mu1] == a1 / total

    def test_jokerless_specialization(self):
        cert = self.canonical()
        cert.alphaplus = Fraction(0)
        cert.eps = Fraction(0)
        derived = corruption_lower_bound(cert)
        a0, a1 = cert.alpha0, cert.alpha1
        assert derived.eps_prime == a1 / (2 * (a0 + a1))
        assert abs(derived.beta - math.log2(float(a1) / 2)) < 1e-12

    def test_boundary_eps_rejected(self):
        cert = self.canonical()
        cert.eps = Fraction(1, 7)
        with pytest.raises(CertificateInfeasibleError):
            corruption_lower_bound(cert)
        cert.eps = Fraction(1, 6)
        with pytest.raises(CertificateInfeasibleError):
            corruption_lower_bound(cert)


class TestJokerSlack:
    def test_empty_rectangle(self):
        cert = canonical_certificate(6, 0.5)
        cert.m = 10
        empty = Rectangle(CubeSet(6, []), CubeSet.full(6))
        assert joker_slack(cert, empty) == 2.0**-10

    def test_full_rectangle_positive(self):
        for n in (4, 8):
            cert = canonical_certificate(n, 0.6)
            cert.m = 20
            full = Rectangle(CubeSet.full(n), CubeSet.full(n))
            # alpha0 + alphaplus + 2^-m - alpha1 = 1/3 + 2^-m
            got = joker_slack(cert, full)
            assert math.isclose(got, 1 / 3 + 2.0**-20, rel_tol=1e-9)

    def test_opposed_prefix_rectangle_story(self):
        # large nearly monochromatic rectangle: the uniform (mu1) mass
        # dominates the shifted (mu0) mass, so plain corruption fails,
        # but the negatively-correlated joker mass rescues the slack
        n, s, rho = 12, 4, 0.6
        cert = canonical_certificate(n, rho)
        cert.m = 40
        rect = opposed_prefix_rectangle(n, s)
        mu0 = rect.xi_mass(rho)
        mu1 = rect.xi_mass(0.0)
        muplus = rect.xi_mass(-rho)
        assert mu0 < mu1 < muplus
        assert joker_slack(cert, rect) > 0
        jokerless = canonical_certificate(n, rho)
        jokerless.m = 40
        jokerless.alphaplus = Fraction(0)
        assert joker_slack(jokerless, rect) < 0

    def test_subcube_closed_form_matches_explicit(self):
        n, rho = 8, 0.35
        cert = canonical_certificate(n, rho)
        cert.m = 12
        rng = make_rng(4)
        for _ in range(20):
            rect = SubcubeRectangle(
                n,
                {int(i): int(rng.integers(0, 2)) for i in rng.choice(n, 2, replace=False)},
                {int(i): int(rng.integers(0, 2)) for i in rng.choice(n, 3, replace=False)},
            )
            explicit = rect.materialize()
            assert math.isclose(
                joker_slack(cert, rect), joker_slack(cert, explicit), rel_tol=1e-11
            )

    def test_counterexample_sets_negative_at_large_m(self):
        a, b = disjoint_support_pair(8)
        cert = canonical_certificate(8, 0.7)
        cert.m = 30
        assert joker_slack(cert, Rectangle(a, b)) < 0


class TestExhaustiveScan:
    def oracle_min_slack(self, cert, n):
        table = slack_weight_matrix(cert, n)
        additive = 2.0**-cert.m
        size = 1 << n
        best = math.inf
        for row_mask in range(1, 1 << size):
            rows = [i for i in range(size) if (row_mask >> i) & 1]
            for col_mask in range(1, 1 << size):
                cols = [j for j in range(size) if (col_mask >> j) & 1]
                slack = table[np.ix_(rows, cols)].sum() + additive
                best = min(best, slack)
        return best

    def test_matches_double_loop_oracle_n3(self):
        cert = canonical_certificate(3, 0.5)
        cert.m = 25
        report = check_joker_inequality(cert, "exhaustive", 3)
        oracle = self.oracle_min_slack(cert, 3)
        assert math.isclose(report.min_slack, oracle, rel_tol=1e-11)
        assert report.rectangles_examined == (2**8 - 1) ** 2
        # the witness rectangle reproduces the reported slack
        assert math.isclose(
            joker_slack(cert, report.worst_rectangle), report.min_slack, rel_tol=1e-11
        )

    def test_small_m_all_slacks_positive(self):
        cert = canonical_certificate(3, 0.5)
        cert.m = 0.15  # delta n with delta = 0.05
        report = check_joker_inequality(cert, "exhaustive", 3)
        assert report.min_slack > 0


class TestScanModes:
    def test_random_scan_reports_counts(self):
        cert = canonical_certificate(8, 0.5)
        cert.m = 0.4
        report = check_joker_inequality(cert, "random", 8, seed=5, samples=300)
        assert report.rectangles_examined > 300
        assert report.min_slack > 0

    def test_greedy_explicit_scan_runs(self):
        cert = canonical_certificate(6, 0.5)
        cert.m = 0.3
        report = check_joker_inequality(
            cert, "greedy", 6, seed=6, starts=4, moves_per_start=60
        )
        assert report.min_slack > 0
        assert report.rectangles_examined > 0

    def test_greedy_subcube_scan_at_large_n(self):
        cert = canonical_certificate(20, 0.9)
        cert.m = 1.0
        report = check_joker_inequality(cert, "greedy", 20, seed=7, starts=3)
        assert report.min_slack > 0

    def test_greedy_finds_negative_slack_when_m_large(self):
        # at m far beyond delta n the inequality genuinely breaks;
        # the subcube descent should locate a violating rectangle
        cert = canonical_certificate(12, 0.8)
        cert.m = 40
        report = check_joker_inequality(cert, "greedy", 12, seed=8, starts=6)
        assert report.min_slack < 0


class TestDiscrepancy:
    def test_all_star_matrix_zero(self):
        m = constant_matrix(3, STAR)
        assert discrepancy_scan(CubePairLaw(3, 0.0), m, "exhaustive") == 0.0

    def test_constant_zero_matrix_full_support(self):
        m = constant_matrix(3, 0)
        got = discrepancy_scan(CubePairLaw(3, 0.0), m, "exhaustive")
        assert math.isclose(got, 1.0, rel_tol=1e-12)

    def test_matches_double_loop_oracle(self):
        n = 3
        matrix = build_ghd_matrix(GhdParams(n, 1.5, 0.5))
        mu = CubePairLaw(n, 0.0)
        got = discrepancy_scan(mu, matrix, "exhaustive")
        table = distance_pair_weights(mu, n)
        signs = matrix.label_signs()
        codes = np.arange(1 << n)
        size = 1 << n
        best = 0.0
        for row_mask in range(1, 1 << size):
            rows = [i for i in range(size) if (row_mask >> i) & 1]
            for col_mask in range(1, 1 << size):
                cols = [j for j in range(size) if (col_mask >> j) & 1]
                total = 0.0
                for x in rows:
                    for y in cols:
                        d = bin(x ^ y).count("1")
                        total += table[d] * signs[d]
                best = max(best, abs(total))
        assert math.isclose(got, best, rel_tol=1e-10)

    def test_random_mode_bounded_by_exhaustive(self):
        n = 3
        matrix = build_ghd_matrix(GhdParams(n, 1.5, 0.5))
        mu = CubePairLaw(n, 0.0)
        exhaustive = discrepancy_scan(mu, matrix, "exhaustive")
        random_scan = discrepancy_scan(mu, matrix, "random", seed=9, samples=500)
        assert random_scan <= exhaustive + 1e-12


class TestPartitionAudit:
    def cert(self, n, m=12.0):
        c = canonical_certificate(n, 0.5)
        c.m = m
        return c

    def test_single_rectangle_identical(self):
        rng = make_rng(10)
        n = 5
        rect = Rectangle(CubeSet.random(n, 0.5, rng), CubeSet.random(n, 0.5, rng))
        result = partition_slack_audit(self.cert(n), [rect])
        assert abs(result["difference"]) < 1e-15

    def test_row_partition_additive_terms(self):
        n = 4
        cert = self.cert(n, m=8.0)
        full = CubeSet.full(n)
        family = [Rectangle(CubeSet(n, [x]), full) for x in range(1 << n)]
        result = partition_slack_audit(cert, family)
        assert abs(result["difference"]) < 1e-12
        # the additive share of the summed slack is 2^n * 2^-m
        mass_part = sum(
            joker_slack(cert, rect) - 2.0**-cert.m for rect in family
        )
        assert math.isclose(
            result["summed"] - mass_part, (1 << n) * 2.0**-cert.m, rel_tol=1e-12
        )

    def test_random_disjoint_families_agree(self):
        rng = make_rng(11)
        n = 6
        cert = self.cert(n)
        for _ in range(20):
            rows = np.split(rng.permutation(1 << n), np.sort(rng.choice(range(1, 1 << n), 3, replace=False)))
            cols = np.split(rng.permutation(1 << n), np.sort(rng.choice(range(1, 1 << n), 2, replace=False)))
            family = [
                Rectangle(CubeSet(n, r.astype(np.uint64)), CubeSet(n, c.astype(np.uint64)))
                for r in rows
                for c in cols
                if len(r) and len(c)
            ]
            result = partition_slack_audit(cert, family)
            assert abs(result["difference"]) < 1e-12

    def test_overlap_detected(self):
        n = 4
        rect1 = Rectangle(CubeSet(n, [0, 1]), CubeSet(n, [0, 1]))
        rect2 = Rectangle(CubeSet(n, [1, 2]), CubeSet(n, [1, 2]))
        with pytest.raises(DisjointnessError):
            partition_slack_audit(self.cert(n), [rect1, rect2])


class TestNoNegativeSlackAtCanonicalScale:
    """Empirical support for the rectangle inequality at m = delta n.

    The asymptotic statement is existential in delta; this records, per
    instance, that scans find no negative slack for the canonical
    constants with delta = 0.05.  Within the uniform-measure floor
    2**(-delta n) the rectangle family is extremely dense, so the
    floor-respecting scan uses explicit dense random sets (exact
    histograms, necessarily few at n = 24); the million-rectangle bulk
    comes from the subcube family, which ranges over the adversarial
    nearly-monochromatic shapes without the floor.
    """

    def test_scans_find_no_negative_slack(self):
        delta = 0.05
        total_examined = 0
        for n in (16, 20, 24):
            rho = min(4 * 2.0 / math.sqrt(n), 0.99)
            cert = canonical_certificate(n, rho, delta=delta)
            min_xi0 = 2.0 ** (-delta * n)

            bulk = check_joker_inequality(
                cert, "random", n, seed=20 + n, samples=340_000, subcube_max_arity=8
            )
            assert bulk.min_slack >= 0
            total_examined += bulk.rectangles_examined

            rng = make_rng(21, n)
            explicit_budget = {16: 20, 20: 8, 24: 3}[n]
            for _ in range(explicit_budget):
                density = float(rng.uniform(math.sqrt(min_xi0), 1.0))
                rect = Rectangle(
                    CubeSet.random(n, density, rng), CubeSet.random(n, density, rng)
                )
                assert len(rect.rows) * len(rect.cols) / 4.0**n >= min_xi0
                assert joker_slack(cert, rect) >= 0
                total_examined += 1

            descent = check_joker_inequality(cert, "greedy", n, seed=22 + n, starts=4)
            assert descent.min_slack >= 0
            total_examined += descent.rectangles_examined
        assert total_examined >= 10**6


class TestMixtureLawWeights:
    def test_nu_mixture_weights_sum(self):
        n = 6
        nu = MixtureLaw(
            ((Fraction(3, 7), CubePairLaw(n, 0.5)), (Fraction(4, 7), CubePairLaw(n, 0.0)))
        )
        w = distance_pair_weights(nu, n)
        classes = np.array([math.comb(n, d) * 2**n for d in range(n + 1)])
        assert math.isclose(float(np.dot(w, classes)), 1.0, rel_tol=1e-12)
