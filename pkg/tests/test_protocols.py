import itertools
import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from ghdlab.core import STAR, BitString, CubePairLaw, GhdParams, hamming_distance
from ghdlab.errors import ProtocolContractError
from ghdlab.protocols import (
    ExplicitPairs,
    PromiseWorstCase,
    Protocol,
    Transcript,
    UnderXi,
    apply_reduction,
    compose_chain,
    embed_cube_input,
    error_by_distance_profile,
    estimate_error,
    gis_inner_params,
    hyperplane_gip_protocol,
    protocol_from_descriptor,
    run_protocol,
    sampling_protocol,
    trivial_protocol,
    worked_composition,
)
from ghdlab.rng import make_rng


def random_bitstring(n, rng):
    return BitString.random(n, rng)


class TestRunProtocol:
    def test_trivial_correct_and_costs_n(self):
        rng = make_rng(0)
        for n in range(1, 65):
            params = GhdParams(n, n / 2, math.sqrt(n) / 2)
            p = trivial_protocol(params)
            x, y = random_bitstring(n, rng), random_bitstring(n, rng)
            out, transcript = run_protocol(p, x, y, seed=1)
            assert transcript.total_bits == n == p.declared_cost
            label = p.promise_label(x, y)
            if label is not STAR:
                assert out == label

    def test_deterministic_transcripts(self):
        params = GhdParams(32, 16, 2)
        p = sampling_protocol(params, 10)
        rng = make_rng(1)
        x, y = random_bitstring(32, rng), random_bitstring(32, rng)
        out1, t1 = run_protocol(p, x, y, seed=99)
        out2, t2 = run_protocol(p, x, y, seed=99)
        assert out1 == out2
        assert t1.messages == t2.messages

    def test_sampling_full_k_is_exact(self):
        params = GhdParams(20, 10, 2)
        p = sampling_protocol(params, 20)
        rng = make_rng(2)
        for _ in range(50):
            x, y = random_bitstring(20, rng), random_bitstring(20, rng)
            out, transcript = run_protocol(p, x, y, seed=int(rng.integers(2**32)))
            assert transcript.total_bits == 20
            label = p.promise_label(x, y)
            if label is not STAR:
                assert out == label

    def test_cost_contract_violation_detected(self):
        class Chatty(Protocol):
            name = "chatty"
            n = 4
            declared_cost = 2
            params = GhdParams(4, 2, 1)

            def execute(self, x, y, coins, transcript):
                transcript.send("A", x.bits, 4)
                return 0

        with pytest.raises(ProtocolContractError):
            run_protocol(Chatty(), BitString(4, 3), BitString(4, 5), seed=0)

    def test_rounds_count_alternations(self):
        t = Transcript()
        t.send("A", 1, 1)
        t.send("A", 0, 1)
        t.send("B", 1, 1)
        t.send("A", 1, 1)
        assert t.rounds == 3
        assert t.total_bits == 4


class TestSamplingProtocolExhaustive:
    """Tiny case n=6, g=2, k=4: enumerate all subsets and all pairs."""

    N, T, G, K = 6, 3, 2, 4

    def oracle_error_by_pair(self):
        params = GhdParams(self.N, self.T, self.G)
        subsets = list(itertools.combinations(range(self.N), self.K))
        worst = 0.0
        per_distance = {}
        for xb in range(1 << self.N):
            for yb in range(1 << self.N):
                d = bin(xb ^ yb).count("1")
                label = params.label_of_distance(d)
                if label is STAR:
                    continue
                wrong = 0
                for s in subsets:
                    j = sum(1 for i in s if (xb >> i) & 1 != (yb >> i) & 1)
                    out = 0 if j <= self.K * self.T / self.N else 1
                    if out != label:
                        wrong += 1
                err = wrong / len(subsets)
                per_distance.setdefault(d, set()).add(round(err, 12))
                worst = max(worst, err)
        return worst, per_distance

    def test_exact_mode_matches_enumeration_oracle(self):
        params = GhdParams(self.N, self.T, self.G)
        p = sampling_protocol(params, self.K)
        worst_oracle, per_distance = self.oracle_error_by_pair()
        # the protocol's error depends only on the distance class
        assert all(len(v) == 1 for v in per_distance.values())
        est = estimate_error(p, PromiseWorstCase(), trials=1, seed=0, exact=True)
        assert est.exact
        assert math.isclose(est.value, worst_oracle, rel_tol=1e-12)

    def test_monte_carlo_within_ci_of_exact(self):
        params = GhdParams(self.N, self.T, self.G)
        p = sampling_protocol(params, self.K)
        exact = estimate_error(p, PromiseWorstCase(), trials=1, seed=0, exact=True)
        mc = estimate_error(p, PromiseWorstCase(), trials=4000, seed=7)
        assert abs(mc.value - exact.value) <= mc.ci95 + 0.02

    def test_exact_distributional_matches_pair_enumeration(self):
        params = GhdParams(self.N, self.T, self.G)
        p = sampling_protocol(params, self.K)
        subsets = list(itertools.combinations(range(self.N), self.K))
        total = 0.0
        for xb in range(1 << self.N):
            for yb in range(1 << self.N):
                d = bin(xb ^ yb).count("1")
                label = params.label_of_distance(d)
                if label is STAR:
                    continue
                for s in subsets:
                    j = sum(1 for i in s if (xb >> i) & 1 != (yb >> i) & 1)
                    out = 0 if j <= self.K * self.T / self.N else 1
                    if out != label:
                        total += 1
        oracle = total / (4**self.N * len(subsets))
        est = estimate_error(p, UnderXi(CubePairLaw(self.N, 0.0)), 1, 0, exact=True)
        assert math.isclose(est.value, oracle, rel_tol=1e-10)


class TestSamplingHypergeometricOracle:
    def test_sample_size_constant_calibration(self):
        # k = ceil(18 n^2 / g^2) keeps the worst-promise error far below
        # 1/3 wherever it fits inside n, per the hypergeometric tails
        for n, g in [(1000, 250), (400, 120), (256, 80)]:
            t = n / 2
            k = math.ceil(18 * n * n / (g * g))
            assert k <= n
            params = GhdParams(n, t, g)
            for d in params.boundary_distances():
                label = params.label_of_distance(d)
                law = scipy.stats.hypergeom(n, d, k)
                p_out0 = law.cdf(math.floor(k * t / n))
                err = (1 - p_out0) if label == 0 else p_out0
                assert err <= 1 / 3

    def test_exact_error_matches_hypergeometric_tails(self):
        n, t, g, k = 12, 6, 1.5, 5
        params = GhdParams(n, t, g)
        p = sampling_protocol(params, k)
        est = estimate_error(p, PromiseWorstCase(), 1, 0, exact=True)
        for d, err in est.details["per_distance"].items():
            label = params.label_of_distance(d)
            law = scipy.stats.hypergeom(n, d, k)
            threshold = k * t / n
            p_out0 = law.cdf(math.floor(threshold))
            expected = (1 - p_out0) if label == 0 else p_out0
            assert math.isclose(err, expected, rel_tol=1e-12, abs_tol=1e-15)

    def test_profile_peaks_at_promise_boundary(self):
        n, k = 24, 8
        params = GhdParams(n, 12, 3)
        p = sampling_protocol(params, k)
        profile = error_by_distance_profile(p, n, trials_per_d=400, seed=3)
        deltas = profile.value
        # star band contributes zero
        for d in range(n + 1):
            if params.label_of_distance(d) is STAR:
                assert deltas[d] == 0
        # hypergeometric oracle: error decreases moving away from the gap
        law_err = []
        for d in range(n + 1):
            label = params.label_of_distance(d)
            if label is STAR:
                law_err.append(0.0)
                continue
            p_out0 = scipy.stats.hypergeom(n, d, k).cdf(math.floor(k * 12 / n))
            law_err.append(1 - p_out0 if label == 0 else p_out0)
        boundary_low, boundary_high = params.boundary_distances()
        assert np.argmax(law_err[: boundary_low + 1]) == boundary_low
        assert boundary_high + np.argmax(law_err[boundary_high:]) == boundary_high
        # MC profile agrees with the oracle within its CI (plus slack)
        assert np.all(np.abs(deltas - np.array(law_err)) <= profile.ci95 + 0.06)


class TestMixtureDecomposition:
    def test_uniform_error_is_distance_mixture(self):
        n = 32
        params = GhdParams(n, n / 2, math.sqrt(n))
        p = sampling_protocol(params, 8)
        direct = estimate_error(p, UnderXi(CubePairLaw(n, 0.0)), trials=6000, seed=4)
        profile = error_by_distance_profile(p, n, trials_per_d=500, seed=5)
        from ghdlab.core import distance_law

        pmf = distance_law(n, 0.0).pmf
        mixture = float(np.dot(pmf, profile.value))
        mixture_ci = float(np.dot(pmf, profile.ci95))
        assert abs(mixture - direct.value) <= mixture_ci + direct.ci95


class TestReductions:
    def test_repeat_transfer(self):
        inner = trivial_protocol(GhdParams(6, 3, 1.5))
        p = apply_reduction("repeat", {"k": 3}, inner)
        x, y = BitString.from_string("01"), BitString.from_string("11")
        xt, yt = p.transform(x, y)
        assert xt.to_string() == "010101"
        assert yt.to_string() == "111111"
        assert hamming_distance(xt, yt) == 3 * hamming_distance(x, y)

    def test_pad_transfer(self):
        inner = trivial_protocol(GhdParams(5, 3, 1))
        p = apply_reduction("pad", {"ell": 2, "m_pad": 1}, inner)
        x = BitString(2, 0b00)
        y = BitString(2, 0b00)
        xt, yt = p.transform(x, y)
        assert hamming_distance(xt, yt) == 2
        assert xt.n == yt.n == 5

    @given(st.integers(1, 40), st.data())
    @settings(max_examples=50, deadline=None)
    def test_transfer_laws_random(self, n, data):
        seed = data.draw(st.integers(0, 2**32))
        rng = make_rng(seed)
        x, y = random_bitstring(n, rng), random_bitstring(n, rng)
        d = hamming_distance(x, y)

        k = data.draw(st.integers(1, 4))
        inner = trivial_protocol(GhdParams(k * n, k * n / 2, 0))
        rep = apply_reduction("repeat", {"k": k}, inner)
        assert hamming_distance(*rep.transform(x, y)) == k * d

        ell = data.draw(st.integers(0, 8))
        m_pad = data.draw(st.integers(0, 8))
        inner = trivial_protocol(GhdParams(n + ell + m_pad, ell + n / 2, 0))
        pad = apply_reduction("pad", {"ell": ell, "m_pad": m_pad}, inner)
        assert hamming_distance(*pad.transform(x, y)) == d + ell

        inner = trivial_protocol(GhdParams(n, n / 2, 0))
        comp = apply_reduction("complement", {}, inner)
        assert hamming_distance(*comp.transform(x, y)) == n - d

        ru = apply_reduction("randomize_uniform", {}, inner)
        coins, _ = ru.draw_coins(make_rng(seed, 1))
        assert hamming_distance(*ru.transform(x, y, coins)) == d

    def test_gis_intersection_identity(self):
        rng = make_rng(8)
        for _ in range(100):
            n = int(rng.integers(1, 30))
            x, y = random_bitstring(n, rng), random_bitstring(n, rng)
            d = hamming_distance(x, y)
            assert (x.bits & y.bits).bit_count() == (x.weight() + y.weight() - d) / 2

    def test_gis_encoding_properties(self):
        n, t, g = 8, 3, 1
        inner = trivial_protocol(gis_inner_params(n, t, g))
        p = apply_reduction("gis_encode", {"n": n, "t": t, "g": g}, inner)
        rng = make_rng(9)
        for _ in range(200):
            x, y = random_bitstring(n, rng), random_bitstring(n, rng)
            xt, yt = p.transform(x, y)
            inter = (x.bits & y.bits).bit_count()
            assert xt.weight() == yt.weight() == n
            assert (xt.bits & yt.bits).bit_count() == inter
            assert hamming_distance(xt, yt) == 2 * n - 2 * inter
            # end to end: promise inputs answered correctly
            label = p.promise_label(x, y)
            if label is not STAR:
                out, _ = run_protocol(p, x, y, seed=0)
                assert out == label

    def test_complement_end_to_end(self):
        inner = trivial_protocol(GhdParams(10, 7, 1))
        p = apply_reduction("complement", {}, inner)
        assert p.params == GhdParams(10, 3, 1)
        rng = make_rng(10)
        for _ in range(100):
            x, y = random_bitstring(10, rng), random_bitstring(10, rng)
            label = p.promise_label(x, y)
            if label is not STAR:
                out, _ = run_protocol(p, x, y, seed=1)
                assert out == label

    def test_center_shift_matches_manual_pad(self):
        b = 1.0
        inner = trivial_protocol(GhdParams(32, 16, math.sqrt(32)))
        p = apply_reduction("center_shift", {"b": b}, inner)
        ell = round(16 / 2 + b * 4)
        assert p.args["ell"] == ell
        assert p.args["m_pad"] == 16 - ell
        assert p.n == 16
        assert p.params.t == 16 - ell

    def test_widen_gap_error_monotone(self):
        params = GhdParams(16, 8, 1)
        base = sampling_protocol(params, 6)
        widened = apply_reduction("widen_gap", {"g": 3}, base)
        e_base = estimate_error(base, PromiseWorstCase(), 1, 0, exact=True)
        e_wide = estimate_error(widened, PromiseWorstCase(), 1, 0, exact=True)
        assert e_wide.value <= e_base.value
        mc_base = estimate_error(base, PromiseWorstCase(), 800, seed=4)
        mc_wide = estimate_error(widened, PromiseWorstCase(), 800, seed=4)
        assert mc_wide.value <= mc_base.value + 1e-12

    def test_randomize_uniform_distance_class_uniform(self):
        n, d = 6, 3
        inner = trivial_protocol(GhdParams(n, 3, 0))
        p = apply_reduction("randomize_uniform", {}, inner)
        x = BitString.from_string("111000")
        y = BitString.from_string("000000")
        cells = {}
        trials = 60_000
        for i in range(trials):
            coins, _ = p.draw_coins(make_rng(11, i))
            xt, yt = p.transform(x, y, coins)
            cells[(xt.bits, yt.bits)] = cells.get((xt.bits, yt.bits), 0) + 1
        n_cells = (1 << n) * math.comb(n, d)
        observed = np.zeros(n_cells)
        observed[: len(cells)] = sorted(cells.values(), reverse=True)
        assert len(cells) <= n_cells
        p_value = scipy.stats.chisquare(observed).pvalue
        assert p_value > 0.001

    def test_cost_equals_inner_cost(self):
        inner = sampling_protocol(GhdParams(12, 6, 1), 5)
        for kind, args in [
            ("widen_gap", {"g": 2}),
            ("randomize_uniform", {}),
        ]:
            p = apply_reduction(kind, args, inner)
            assert p.declared_cost == inner.declared_cost
            rng = make_rng(12)
            x, y = random_bitstring(12, rng), random_bitstring(12, rng)
            _, transcript = run_protocol(p, x, y, seed=3)
            assert transcript.total_bits == inner.declared_cost


class TestHyperplaneGip:
    def test_equal_inputs_positive(self):
        p = hyperplane_gip_protocol(16, 32)
        v = np.ones(16) / 4.0
        out, transcript = run_protocol(p, v, v, seed=0)
        assert out == 1
        assert transcript.total_bits == 32

    def test_opposite_inputs_negative(self):
        p = hyperplane_gip_protocol(16, 32)
        v = np.ones(16) / 4.0
        out, _ = run_protocol(p, v, -v, seed=0)
        assert out == 0

    def test_non_unit_inputs_flagged(self):
        p = hyperplane_gip_protocol(4, 8)
        _, transcript = run_protocol(p, np.ones(4), np.ones(4), seed=0)
        assert transcript.warnings

    def test_boundary_error_small(self):
        d, eps, k = 128, 0.25, 256
        p = hyperplane_gip_protocol(d, k, eps)
        rng = make_rng(13)
        pairs = []
        for _ in range(300):
            u = rng.standard_normal(d)
            u /= np.linalg.norm(u)
            w = rng.standard_normal(d)
            w -= np.dot(w, u) * u
            w /= np.linalg.norm(w)
            sign = 1.0 if rng.random() < 0.5 else -1.0
            v = sign * eps * u + math.sqrt(1 - eps * eps) * w
            pairs.append((u, v))
        est = estimate_error(p, ExplicitPairs(pairs), trials=2000, seed=14)
        assert est.value <= 1 / 3
        # per-hyperplane disagreement rate at the boundary is arccos(eps)/pi
        u, v = pairs[0]
        disagreements = 0
        runs = 200
        for i in range(runs):
            coins = p.draw_coins(make_rng(15, i))
            sides_u = coins @ u >= 0
            sides_v = coins @ v >= 0
            disagreements += int(np.count_nonzero(sides_u != sides_v))
        rate = disagreements / (runs * k)
        ip = float(np.dot(u, v))
        expected = math.acos(ip) / math.pi
        sigma = math.sqrt(expected * (1 - expected) / (runs * k))
        assert abs(rate - expected) <= 4 * sigma

    def test_embedding_inner_product_identity(self):
        rng = make_rng(15)
        n = 25
        for _ in range(50):
            x, y = random_bitstring(n, rng), random_bitstring(n, rng)
            ip = float(np.dot(embed_cube_input(x), embed_cube_input(y)))
            assert math.isclose(ip, 1 - 2 * hamming_distance(x, y) / n, rel_tol=1e-9)


class TestWorkedComposition:
    def test_off_center_instance_reduces_to_centered(self):
        params = GhdParams(20, 6, 2)
        plan = worked_composition(params)
        inner_params = plan["inner"]
        assert inner_params.t == inner_params.n / 2
        assert math.isclose(inner_params.g, math.sqrt(2 * inner_params.n))
        protocol = compose_chain(plan["chain"], trivial_protocol(inner_params))
        assert protocol.n == 20
        rng = make_rng(16)
        for _ in range(200):
            x, y = random_bitstring(20, rng), random_bitstring(20, rng)
            label = params.label_of_distance(hamming_distance(x, y))
            if label is STAR:
                continue
            out, transcript = run_protocol(protocol, x, y, seed=1)
            assert out == label
            assert transcript.total_bits == inner_params.n

    def test_high_threshold_uses_complement(self):
        plan = worked_composition(GhdParams(20, 15, 2))
        assert plan["chain"][0][0] == "complement"


class TestDescriptors:
    def test_round_trip(self):
        inner = sampling_protocol(GhdParams(12, 6, 1), 5)
        p = apply_reduction("widen_gap", {"g": 2}, inner)
        desc = p.to_descriptor()
        rebuilt = protocol_from_descriptor(desc)
        assert rebuilt.to_descriptor() == desc
        rng = make_rng(17)
        x, y = random_bitstring(12, rng), random_bitstring(12, rng)
        assert run_protocol(p, x, y, 5)[0] == run_protocol(rebuilt, x, y, 5)[0]

    def test_descriptor_shape_is_name_params_reductions(self):
        inner = trivial_protocol(GhdParams(8, 4, 1))
        p = apply_reduction(
            "randomize_uniform", {}, apply_reduction("widen_gap", {"g": 2}, inner)
        )
        desc = p.to_descriptor()
        assert desc["name"] == "trivial"
        assert desc["params"] == {"n": 8, "t": 4, "g": 1}
        assert [step["kind"] for step in desc["reductions"]] == [
            "widen_gap",
            "randomize_uniform",
        ]
        rebuilt = protocol_from_descriptor(desc)
        assert rebuilt.to_descriptor() == desc
