import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from privlp.mechanisms import (BudgetExhausted, PrivacyBudget, QualityScore, compose_budget,
                               exp_mech_error_bound, exponential_mechanism,
                               exponential_mechanism_probabilities, laplace_cdf, laplace_sample,
                               laplace_tail_threshold)


class TestLaplace:
    def test_moments_scale_one(self):
        draws = laplace_sample(1.0, np.random.default_rng(1), size=100_000)
        assert abs(draws.mean()) < 0.02
        assert abs(draws.var() - 2.0) < 0.1

    def test_variance_scale_two(self):
        draws = laplace_sample(2.0, np.random.default_rng(2), size=100_000)
        assert draws.var() == pytest.approx(8.0, rel=0.05)

    def test_seed_reproducible(self):
        a = laplace_sample(1.0, np.random.default_rng(42), size=10)
        b = laplace_sample(1.0, np.random.default_rng(42), size=10)
        np.testing.assert_array_equal(a, b)
        assert isinstance(laplace_sample(1.0, np.random.default_rng(42)), float)

    def test_ks_against_scipy_laplace(self):
        draws = laplace_sample(1.5, np.random.default_rng(3), size=100_000)
        assert stats.kstest(draws, stats.laplace(scale=1.5).cdf).statistic < 0.01

    def test_cdf_matches_scipy(self):
        x = np.linspace(-5, 5, 41)
        np.testing.assert_allclose(laplace_cdf(x, 0.7), stats.laplace(scale=0.7).cdf(x), atol=1e-15)

    def test_rejects_negative_scale(self):
        with pytest.raises(ValueError):
            laplace_sample(-1.0, np.random.default_rng(0))

    def test_zero_scale_is_noiseless(self):
        assert laplace_sample(0.0, np.random.default_rng(0)) == 0.0
        np.testing.assert_array_equal(laplace_sample(0.0, np.random.default_rng(0), size=3), 0.0)

    def test_draws_always_finite(self):
        class Edge:
            def __init__(self, u):
                self.u = u

            def random(self, size=None):
                return np.full(size, self.u) if size is not None else self.u

        for u in (0.0, 0.5, 1.0 - 2 ** -53):
            assert np.isfinite(laplace_sample(1.0, Edge(u)))


class TestTailThreshold:
    def test_inverse_e(self):
        assert laplace_tail_threshold(1.0, 1 / math.e) == pytest.approx(1.0, rel=1e-15)

    def test_values(self):
        assert laplace_tail_threshold(1.0, 0.05) == pytest.approx(2.9957, abs=1e-4)
        assert laplace_tail_threshold(3.0, 0.05) == pytest.approx(8.987, abs=1e-3)

    @given(st.floats(0.01, 100), st.floats(1e-6, 0.99))
    def test_exact_tail_mass(self, scale, beta):
        T = laplace_tail_threshold(scale, beta)
        assert 2 * (1 - laplace_cdf(T, scale)) == pytest.approx(beta, rel=1e-9)

    def test_domain(self):
        for beta in (0.0, 1.0, 1.5):
            with pytest.raises(ValueError):
                laplace_tail_threshold(1.0, beta)


class TestExponentialMechanism:
    def test_two_point(self):
        p = exponential_mechanism_probabilities(QualityScore([0.0, math.log(2)], 1.0), 2.0)
        np.testing.assert_allclose(p, [1 / 3, 2 / 3], rtol=1e-14)

    def test_constant_is_uniform(self):
        p = exponential_mechanism_probabilities(QualityScore(np.full(4, 3.0), 1.0), 1.0)
        np.testing.assert_allclose(p, 0.25)

    def test_empirical_tv(self):
        q = QualityScore(np.log([1.0, 2.0, 4.0, 8.0]), 1.0)
        draws = exponential_mechanism(q, 2.0, np.random.default_rng(5), size=100_000)
        freq = np.bincount(draws, minlength=4) / draws.size
        assert 0.5 * np.abs(freq - np.array([1, 2, 4, 8]) / 15).sum() < 0.02

    def test_scalar_and_vector_agree(self):
        q = QualityScore([0.1, 0.5, 0.2], 1.0)
        single = [exponential_mechanism(q, 1.0, np.random.default_rng(s)) for s in range(20)]
        batched = [int(exponential_mechanism(q, 1.0, np.random.default_rng(s), size=1)[0])
                   for s in range(20)]
        assert single == batched

    def test_overflow_safe(self):
        p = exponential_mechanism_probabilities(QualityScore([1e6, 0.0], 1e-6), 1e6)
        np.testing.assert_array_equal(p, [1.0, 0.0])

    def test_errors(self):
        with pytest.raises(ValueError):
            QualityScore([], 1.0)
        with pytest.raises(ValueError):
            exponential_mechanism(QualityScore([1.0], 0.0), 1.0, np.random.default_rng(0))

    def test_suboptimality_rate(self):
        rng = np.random.default_rng(11)
        q = QualityScore(rng.uniform(0, 5, 10), 1.0)
        bound = exp_mech_error_bound(10, 1.0, 1.0, 0.1)
        draws = exponential_mechanism(q, 1.0, rng, size=10_000)
        assert np.mean(q.values[draws] < q.values.max() - bound) <= 0.1


class TestErrorBound:
    def test_degenerate(self):
        assert exp_mech_error_bound(1, 2.0, 1.0, 1.0) == 0.0

    def test_value(self):
        assert exp_mech_error_bound(10, 1.0, 1.0, 0.1) == pytest.approx(2 * math.log(100), rel=1e-15)
        assert exp_mech_error_bound(10, 1.0, 1.0, 0.1) == pytest.approx(9.210, abs=1e-3)

    def test_linear_in_sensitivity(self):
        assert exp_mech_error_bound(7, 0.5, 2.0, 0.2) == pytest.approx(
            2 * exp_mech_error_bound(7, 0.5, 1.0, 0.2), rel=1e-15)


class TestComposition:
    def test_eight_steps(self):
        assert compose_budget(1.0, 1 / math.e, 8) == pytest.approx(1 / 8, rel=1e-15)

    def test_single_step(self):
        assert compose_budget(0.7, 1 / math.e, 1) == pytest.approx(0.7 / math.sqrt(8), rel=1e-15)

    def test_substitution(self):
        assert compose_budget(0.5, 1e-6, 100) == pytest.approx(4.756e-3, rel=1e-3)

    @given(st.floats(0.01, 10), st.floats(1e-12, 0.5), st.integers(1, 10 ** 6))
    def test_identity(self, eps, delta, k):
        e = compose_budget(eps, delta, k)
        assert k * e * e * 8 * math.log(1 / delta) == pytest.approx(eps * eps, rel=1e-13)

    def test_domain(self):
        for delta in (0.0, 1.0):
            with pytest.raises(ValueError):
                compose_budget(1.0, delta, 3)
        with pytest.raises(ValueError):
            compose_budget(1.0, 0.1, 0)


class TestBudget:
    def test_exhaustion(self):
        b = PrivacyBudget(1.0, 1e-6)
        e = b.plan(2)
        b.charge("a", e).charge("b", e)
        with pytest.raises(BudgetExhausted):
            b.charge("c", e)

    def test_first_charge_and_order(self):
        b = PrivacyBudget(1.0, 1e-6)
        e = b.plan(3)
        b.charge("x", e)
        assert b.n_charges == 1
        b.charge("y", e).charge("x", e)
        audit = b.audit()
        assert [c["label"] for c in audit["charges"]] == ["x", "y"]
        assert [c["count"] for c in audit["charges"]] == [2, 1]
        assert audit["planned_k"] == 3 and audit["epsilon_prime"] == e

    def test_charge_before_plan_and_overcharge(self):
        b = PrivacyBudget(1.0, 1e-6)
        with pytest.raises(RuntimeError):
            b.charge("a", 0.1)
        e = b.plan(4)
        with pytest.raises(ValueError):
            b.charge("a", 2 * e)
        with pytest.raises(RuntimeError):
            b.plan(4)

    def test_basic_composition(self):
        b = PrivacyBudget(1.0, 1e-6)
        assert b.plan(4, composition="basic") == 0.25
        assert b.delta_prime == pytest.approx(2.5e-7)
        assert b.composition_residual() == 0.0
