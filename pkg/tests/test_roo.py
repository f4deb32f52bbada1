import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dpsampler import (
    CategoricalDistribution,
    CountVector,
    RandomStream,
    RooParams,
    empirical_distribution,
    required_dataset_size,
    roo_accuracy,
    roo_conditional_output,
    roo_epsilon,
    roo_marginal_output,
    roo_q_for_epsilon,
    roo_sample,
    roo_sampling_complexity,
    tv_distance,
)
from dpsampler.roo import RooConditional


def counts(*values):
    return CountVector(len(values), np.array(values))


class TestRooParams:
    def test_valid(self):
        RooParams(q=0.5, k=3, n=10)

    @pytest.mark.parametrize("q,k,n", [(-0.1, 2, 1), (1.1, 2, 1), (0.5, 1, 1), (0.5, 2, 0)])
    def test_invalid(self, q, k, n):
        with pytest.raises(ValueError):
            RooParams(q=q, k=k, n=n)


class TestConditionalOutput:
    def test_symmetry(self):
        got = roo_conditional_output(counts(2, 2), 0.5)
        assert got.probs.tolist() == [0.5, 0.5]

    def test_hand_value(self):
        got = roo_conditional_output(counts(4, 0), 0.5)
        assert got.probs.tolist() == [0.75, 0.25]

    def test_reveal_only(self):
        d = counts(1, 2, 3)
        assert np.array_equal(roo_conditional_output(d, 0.0).probs, empirical_distribution(d).probs)

    def test_obscure_only(self):
        got = roo_conditional_output(counts(5, 0, 0), 1.0)
        assert np.allclose(got.probs, 1 / 3, atol=1e-15)

    def test_sums_to_one(self):
        got = roo_conditional_output(counts(3, 1, 7), 0.37)
        assert abs(got.probs.sum() - 1.0) < 1e-15


class TestEpsilonFormulas:
    def test_q_one_gives_zero(self):
        assert roo_epsilon(1.0, 10, 4) == 0.0

    def test_n_equals_k(self):
        assert roo_epsilon(0.5, 7, 7) == pytest.approx(math.log(2), abs=1e-15)

    def test_hand_value(self):
        # k(1-q)/(nq) = 0.1, so eps = ln(1.1)
        assert roo_epsilon(0.5, 100, 10) == pytest.approx(0.09531017980432486, abs=1e-12)

    def test_q_zero_rejected(self):
        with pytest.raises(ValueError, match="no finite privacy"):
            roo_epsilon(0.0, 10, 2)

    def test_inversion_simple(self):
        assert roo_q_for_epsilon(math.log(2), 5, 5) == pytest.approx(0.5, abs=1e-12)

    def test_inversion_reference_point(self):
        assert roo_q_for_epsilon(0.1, 1000, 9) == pytest.approx(0.07882918129848758, abs=1e-12)

    def test_inversion_large_epsilon(self):
        q = roo_q_for_epsilon(20.0, 1000, 9)
        assert 0.0 < q < 2e-8

    @pytest.mark.parametrize("eps", [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0])
    @pytest.mark.parametrize("n,k", [(2, 2), (10, 3), (100, 10), (1000, 9)])
    def test_round_trip(self, eps, n, k):
        assert roo_epsilon(roo_q_for_epsilon(eps, n, k), n, k) == pytest.approx(eps, abs=1e-12)

    def test_private_side_rounding(self):
        # the float-evaluated worst pair never exceeds exp(eps)
        for eps in (0.01, 0.1, 0.5, 1.0, 2.0):
            for n in range(2, 30):
                for k in (2, 3, 5):
                    q = roo_q_for_epsilon(eps, n, k)
                    ratio = (q / k + (1.0 - q) * (1.0 / n)) / (q / k)
                    assert ratio <= math.exp(eps)


class TestAccuracyAndComplexity:
    def test_accuracy_values(self):
        assert roo_accuracy(0.0, 5) == 0.0
        assert roo_accuracy(1.0, 2) == 0.5
        assert roo_accuracy(0.5, 10) == pytest.approx(0.45, abs=1e-15)

    def test_complexity_spot(self):
        # 8 / (0.1 (e - 1))
        expected = 8.0 / (0.1 * math.expm1(1.0))
        assert roo_sampling_complexity(10, 0.1, 1.0) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(46.558, abs=5e-4)

    def test_complexity_near_alpha_limit(self):
        got = roo_sampling_complexity(10, 0.89, 1.0)
        assert got == pytest.approx(0.1 / (0.89 * math.expm1(1.0)), rel=1e-9)

    def test_complexity_epsilon_scaling(self):
        ratio = roo_sampling_complexity(10, 0.1, 2.0) / roo_sampling_complexity(10, 0.1, 1.0)
        assert ratio == pytest.approx(math.expm1(1.0) / math.expm1(2.0), rel=1e-12)
        assert ratio == pytest.approx(0.269, abs=5e-4)

    @pytest.mark.parametrize("alpha", [0.0, 0.9, 1.0, -0.2])
    def test_alpha_range_enforced(self, alpha):
        with pytest.raises(ValueError):
            roo_sampling_complexity(10, alpha, 1.0)

    def test_required_dataset_size_ceils(self):
        real = roo_sampling_complexity(10, 0.1, 1.0)
        assert required_dataset_size(10, 0.1, 1.0) == math.ceil(real)
        assert required_dataset_size(10, 0.89, 1.0) == 1

    def test_complexity_inverts_privacy(self):
        # picking q for the target alpha and the n from the complexity
        # formula reproduces the target epsilon
        for k, alpha, eps in [(10, 0.1, 1.0), (5, 0.3, 0.5), (2, 0.4, 2.0)]:
            n = roo_sampling_complexity(k, alpha, eps)
            q = k * alpha / (k - 1)
            assert math.log1p(k * (1 - q) / (n * q)) == pytest.approx(eps, rel=1e-12)


class TestMarginalOutput:
    def test_endpoints(self):
        p = CategoricalDistribution(3, np.array([0.2, 0.3, 0.5]))
        assert np.array_equal(roo_marginal_output(p, 0.0).probs, p.probs)
        assert np.allclose(roo_marginal_output(p, 1.0).probs, 1 / 3, atol=1e-15)

    def test_hand_value(self):
        p = CategoricalDistribution(2, np.array([1.0, 0.0]))
        assert roo_marginal_output(p, 0.5).probs.tolist() == [0.75, 0.25]

    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(2, 9).flatmap(
            lambda k: st.lists(st.floats(1e-3, 1.0), min_size=k, max_size=k)
        ),
        st.sampled_from([0.0, 0.25, 0.5, 1.0]),
    )
    def test_exact_utility_identity(self, weights, q):
        k = len(weights)
        p = CategoricalDistribution(k, np.array(weights) / sum(weights))
        uniform = CategoricalDistribution.uniform(k)
        got = tv_distance(roo_marginal_output(p, q), p)
        assert got == pytest.approx(q * tv_distance(uniform, p), abs=1e-12)
        assert got <= q * (1 - 1 / k) + 1e-12

    def test_bound_tight_at_corner(self):
        for k in (2, 5, 9):
            corner = CategoricalDistribution(k, np.array([1.0] + [0.0] * (k - 1)))
            got = tv_distance(roo_marginal_output(corner, 0.5), corner)
            assert got == pytest.approx(roo_accuracy(0.5, k), abs=1e-12)


class TestSampling:
    def test_pure_obscure_is_uniform(self):
        rng = RandomStream(11)
        d = counts(8, 0)
        draws = np.array([roo_sample(d, 1.0, rng) for _ in range(40_000)])
        freq = np.mean(draws == 1)
        assert abs(freq - 0.5) < 4 * math.sqrt(0.25 / 40_000)

    def test_pure_reveal_degenerate(self):
        rng = RandomStream(12)
        d = counts(4, 0)
        assert all(roo_sample(d, 0.0, rng) == 1 for _ in range(300))

    def test_mixed_law(self):
        # P(Y=1) = q/k + (1-q) = 0.75 for q = 0.5, counts (4, 0)
        rng = RandomStream(13)
        d = counts(4, 0)
        trials = 200_000
        draws = np.array([roo_sample(d, 0.5, rng) for _ in range(trials)])
        freq = float(np.mean(draws == 1))
        assert abs(freq - 0.75) < 4 * math.sqrt(0.75 * 0.25 / trials)

    def test_deterministic_given_stream(self):
        d = counts(3, 2, 1)
        a = [roo_sample(d, 0.3, RandomStream(5, 2)) for _ in range(1)]
        draws1 = _draw_seq(d, RandomStream(5, 2))
        draws2 = _draw_seq(d, RandomStream(5, 2))
        assert draws1 == draws2
        assert draws1[0] == a[0]


def _draw_seq(d, rng, q=0.3, count=50):
    return [roo_sample(d, q, rng) for _ in range(count)]


class TestRooConditional:
    def test_batch_matches_scalar(self):
        cond = RooConditional(0.4)
        mat = np.array([[3, 1, 0], [2, 2, 0], [0, 0, 4]])
        rows = cond.batch(mat)
        for row, c in zip(rows, mat):
            assert np.array_equal(row, cond(CountVector(3, c)).probs)
