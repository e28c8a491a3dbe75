import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from ghdlab.core import (
    STAR,
    BitString,
    CubePairLaw,
    CubeSet,
    GhdParams,
    binomial_tail_b,
    complement,
    distance_law,
    ghd_label,
    hamming_distance,
    random_pair_at_distance,
    sample_xi,
    sample_xi_batch,
)
from ghdlab.errors import TailBoundInfeasibleError
from ghdlab.rng import make_rng


def bs(s):
    return BitString.from_string(s)


class TestHammingDistance:
    def test_identity_pair(self):
        assert hamming_distance(bs("0000"), bs("0000")) == 0

    def test_complement_pair(self):
        assert hamming_distance(bs("0101"), bs("1010")) == 4

    def test_direct_count(self):
        assert hamming_distance(bs("0101"), bs("0011")) == 2

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            hamming_distance(bs("01"), bs("011"))

    @given(st.integers(1, 96), st.data())
    def test_symmetry_and_complement_identity(self, n, data):
        x = BitString(n, data.draw(st.integers(0, 2**n - 1)))
        y = BitString(n, data.draw(st.integers(0, 2**n - 1)))
        assert hamming_distance(x, y) == hamming_distance(y, x)
        assert hamming_distance(x, y) == n - hamming_distance(complement(x), y)


class TestGhdLabel:
    def test_close_pair(self):
        params = GhdParams(4, 2, 1)
        assert ghd_label(params, bs("0000"), bs("0000")) == 0

    def test_far_pair(self):
        params = GhdParams(4, 2, 0.5)
        assert ghd_label(params, bs("0000"), bs("1110")) == 1

    def test_gap_pair(self):
        params = GhdParams(4, 2, 1)
        assert ghd_label(params, bs("0000"), bs("0011")) is STAR

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            ghd_label(GhdParams(4, 2, 1), bs("000"), bs("0011"))

    def test_boundary_distances(self):
        params = GhdParams(1000, 500, 100)
        assert params.boundary_distances() == [400, 601]
        assert params.label_of_distance(400) == 0
        assert params.label_of_distance(401) is STAR
        assert params.label_of_distance(600) is STAR
        assert params.label_of_distance(601) == 1


class TestSampleXi:
    def test_p_one_copies(self):
        for seed in range(20):
            x, y = sample_xi(CubePairLaw(17, 1.0), seed)
            assert x == y

    def test_p_minus_one_complements(self):
        for seed in range(20):
            x, y = sample_xi(CubePairLaw(17, -1.0), seed)
            assert y == complement(x)

    def test_deterministic_in_seed(self):
        law = CubePairLaw(33, 0.25)
        assert sample_xi(law, 7) == sample_xi(law, 7)
        assert sample_xi(law, 7) != sample_xi(law, 8)

    def test_p_zero_disagreement_rate(self):
        # flip probability 1/2: empirical per-coordinate disagreement
        # should match 0.5 within 3 sigma at 1e5 draws
        trials = 10**5
        xs, ys = sample_xi_batch(CubePairLaw(16, 0.0), trials, seed=5)
        disagreements = int(np.bitwise_count(xs ^ ys).sum())
        total = 16 * trials
        sigma = math.sqrt(total * 0.25)
        assert abs(disagreements - 0.5 * total) <= 3 * sigma

    def test_marginals_uniform_chi_square(self):
        trials = 10**5
        xs, ys = sample_xi_batch(CubePairLaw(8, 0.6), trials, seed=11)
        for packed in (xs, ys):
            observed = np.bincount(packed.astype(np.int64), minlength=256)
            p = scipy.stats.chisquare(observed).pvalue
            assert p > 0.001

    def test_distance_matches_law_in_total_variation(self):
        n, p, trials = 64, 0.3, 10**5
        xs, ys = sample_xi_batch(CubePairLaw(n, p), trials, seed=3)
        observed = np.bincount(np.bitwise_count(xs ^ ys), minlength=n + 1) / trials
        tv = 0.5 * np.abs(observed - distance_law(n, p).pmf).sum()
        assert tv <= 0.02

    def test_rejects_bad_p(self):
        with pytest.raises(ValueError):
            CubePairLaw(8, 1.5)


class TestDistanceLaw:
    def test_small_uniform(self):
        law = distance_law(2, 0.0)
        assert np.allclose(law.pmf, [0.25, 0.5, 0.25], atol=1e-15)

    def test_degenerate(self):
        assert np.array_equal(distance_law(1, 1.0).pmf, [1.0, 0.0])
        assert np.array_equal(distance_law(1, -1.0).pmf, [0.0, 1.0])

    def test_large_n_mean(self):
        n = 1000
        p = 12 / math.sqrt(n)
        law = distance_law(n, p)
        assert abs(law.mean() - (500 - 6 * math.sqrt(1000))) < 1e-6

    @pytest.mark.parametrize("n", [10, 100, 1000, 10_000])
    @pytest.mark.parametrize("p", [-1.0, -0.4, 0.0, 0.7, 1.0])
    def test_pmf_sums_to_one(self, n, p):
        assert abs(distance_law(n, p).pmf.sum() - 1.0) < 1e-12

    def test_matches_mode_recurrence_oracle(self):
        # independent route: start at the mode, recur outward
        def recurrence_pmf(n, q):
            pmf = np.zeros(n + 1)
            mode = min(n, int((n + 1) * q))
            pmf[mode] = math.exp(
                math.lgamma(n + 1)
                - math.lgamma(mode + 1)
                - math.lgamma(n - mode + 1)
                + mode * math.log(q)
                + (n - mode) * math.log1p(-q)
            )
            ratio = q / (1 - q)
            for k in range(mode, n):
                pmf[k + 1] = pmf[k] * ((n - k) / (k + 1)) * ratio
            for k in range(mode, 0, -1):
                pmf[k - 1] = pmf[k] * (k / (n - k + 1)) / ratio
            return pmf

        for n, p in [(17, 0.0), (50, 0.5), (123, -0.8), (1000, 0.2)]:
            expected = recurrence_pmf(n, (1 - p) / 2)
            assert np.allclose(distance_law(n, p).pmf, expected, rtol=1e-9, atol=1e-300)


class TestBinomialTailB:
    def test_weak_requirement_small_b(self):
        # near-vacuous tail requirement accepts a b below the eps=1/8 value
        assert binomial_tail_b(0.45, 4096) < binomial_tail_b(1 / 8, 4096)

    def test_exact_cdf_search_at_1024(self):
        b = binomial_tail_b(1 / 8, 1024)
        # independent check of both displayed bounds with scipy CDFs
        n, sqrt_n, sqrt2 = 1024, 32.0, math.sqrt(2)
        q = (1 - 4 * b / sqrt_n) / 2
        thr0 = math.floor(n / 2 - (b + sqrt2) * sqrt_n)
        assert scipy.stats.binom.cdf(thr0, n, q) >= 1 - 1 / 8
        thr1 = math.ceil(n / 2 - (b - sqrt2) * sqrt_n)
        assert scipy.stats.binom.sf(thr1 - 1, n, 0.5) >= 1 - 1 / 8
        # smallest on the grid: one step down breaks some bound
        b_less = b - 0.01
        q_less = (1 - 4 * b_less / sqrt_n) / 2
        ok0 = scipy.stats.binom.cdf(
            math.floor(n / 2 - (b_less + sqrt2) * sqrt_n), n, q_less
        ) >= 1 - 1 / 8
        ok1 = scipy.stats.binom.sf(
            math.ceil(n / 2 - (b_less - sqrt2) * sqrt_n) - 1, n, 0.5
        ) >= 1 - 1 / 8
        assert not (ok0 and ok1)

    def test_chebyshev_sanity(self):
        for eps, n in [(1 / 8, 1024), (1 / 4, 4096), (0.45, 4096)]:
            assert binomial_tail_b(eps, n) <= math.sqrt(2) + 1 / (2 * math.sqrt(eps)) + 0.01

    def test_infeasible_at_small_n(self):
        for n in (16, 20, 24):
            with pytest.raises(TailBoundInfeasibleError):
                binomial_tail_b(1 / 8, n)


class TestRandomPairAtDistance:
    @given(st.integers(1, 80), st.data())
    @settings(max_examples=40, deadline=None)
    def test_distance_is_exact(self, n, data):
        d = data.draw(st.integers(0, n))
        rng = make_rng(data.draw(st.integers(0, 2**32)))
        x, y = random_pair_at_distance(n, d, rng)
        assert hamming_distance(x, y) == d


class TestCubeSet:
    def test_round_trip_text(self, tmp_path):
        s = CubeSet.from_strings(3, ["000", "110", "011"])
        path = tmp_path / "set.txt"
        s.save_text(path)
        assert CubeSet.load_text(path) == s
        assert path.read_text().splitlines()[0] == "n=3"

    def test_round_trip_dense(self, tmp_path):
        rng = make_rng(4)
        s = CubeSet.random(11, 0.37, rng)
        path = tmp_path / "set.bin"
        s.save_dense(path)
        assert CubeSet.load_dense(path) == s

    def test_indicator_agrees_with_codes(self):
        s = CubeSet(4, [3, 9, 14])
        ind = s.indicator()
        assert ind.sum() == 3
        assert CubeSet.from_indicator(ind) == s

    def test_duplicates_collapse(self):
        assert len(CubeSet(4, [3, 3, 9])) == 2

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            CubeSet(3, [8])

    def test_flip_all(self):
        s = CubeSet(3, [0b000, 0b101])
        assert set(map(int, s.flip_all().codes)) == {0b111, 0b010}

    def test_string_convention_first_char_is_bit0(self):
        assert bs("0100").bits == 2
        assert bs("0100").to_string() == "0100"
