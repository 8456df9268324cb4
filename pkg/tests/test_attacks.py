import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from privlp.attacks import (BitDatabase, applicable_bound, gadget_constraint, gadget_objective,
                            gadget_scalar, neighbor_diff, reconstruct_by_rounding,
                            reconstruction_bound, run_attack_experiment)
from privlp.lp import canonicalize
from privlp.objective import solve_exact_lp


class TestDatabase:
    def test_validation(self):
        with pytest.raises(ValueError):
            BitDatabase([0, 2])
        with pytest.raises(ValueError):
            BitDatabase([1, 1], balanced=True)

    def test_random_balanced(self):
        D = BitDatabase.random(10, 0, balanced=True)
        assert D.bits.sum() == 5
        with pytest.raises(ValueError):
            BitDatabase.random(5, 0, balanced=True)

    def test_swap_keeps_balance(self):
        D = BitDatabase([0, 1, 0, 1], balanced=True).swap(0, 1)
        np.testing.assert_array_equal(D.bits, [1, 0, 0, 1])
        assert D.balanced


class TestScalarGadget:
    def test_construction(self):
        g = gadget_scalar(BitDatabase([0, 1]))
        np.testing.assert_array_equal(g.lp.A, np.eye(2))
        np.testing.assert_array_equal(g.lp.b, [0.0, 1.0])

    def test_neighbor_flip(self):
        D = BitDatabase([0, 1, 1])
        a, b = gadget_scalar(D), gadget_scalar(D.flip(1))
        rows, obj = neighbor_diff(a, b)
        # row 1 is split into two canonical rows, each moving by 1
        np.testing.assert_array_equal(rows, [2, 3])
        la, lb = canonicalize(a.lp)[0], canonicalize(b.lp)[0]
        np.testing.assert_array_equal(np.abs(la.b - lb.b)[rows], [1.0, 1.0])
        assert obj.size == 0

    def test_empty(self):
        with pytest.raises(ValueError):
            gadget_scalar(BitDatabase(np.zeros(0, dtype=int)))


class TestObjectiveGadget:
    def test_two_bits(self):
        g = gadget_objective(BitDatabase([1, 0], balanced=True))
        sol = solve_exact_lp(g.lp, append_simplex=False)
        np.testing.assert_allclose(sol.x, [1.0, 0.0])
        assert sol.objective_value + g.objective_offset == pytest.approx(0.0)

    def test_exact_recovers(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            D = BitDatabase.random(12, rng, balanced=True)
            x = solve_exact_lp(gadget_objective(D).lp, append_simplex=False).x
            np.testing.assert_array_equal(reconstruct_by_rounding(x).bits, D.bits)

    def test_complement_value(self):
        D = BitDatabase([1, 0, 1, 0], balanced=True)
        g = gadget_objective(D)
        assert g.lp.c @ (1 - D.bits) + g.objective_offset == -2.0

    def test_needs_balance(self):
        with pytest.raises(ValueError):
            gadget_objective(BitDatabase([1, 1]))


class TestConstraintGadget:
    def test_two_bits_forced(self):
        g = gadget_constraint(BitDatabase([1, 0], balanced=True))
        np.testing.assert_allclose(solve_exact_lp(g.lp, append_simplex=False).x, [1.0, 0.0])
        assert g.private_rows.tolist() == [True, False, False, False]

    def test_exact_recovers_n20(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            D = BitDatabase.random(20, rng, balanced=True)
            x = solve_exact_lp(gadget_constraint(D).lp, append_simplex=False).x
            np.testing.assert_array_equal(reconstruct_by_rounding(x).bits, D.bits)

    def test_swap_changes_only_private_row(self):
        D = BitDatabase([1, 0, 0, 1], balanced=True)
        rows, _ = neighbor_diff(gadget_constraint(D), gadget_constraint(D.swap(0, 1)))
        np.testing.assert_array_equal(rows, [0, 1])  # the two halves of the private equality


class TestRounding:
    def test_identity_and_threshold(self):
        np.testing.assert_array_equal(reconstruct_by_rounding([0, 1, 1]).bits, [0, 1, 1])
        np.testing.assert_array_equal(reconstruct_by_rounding([0.4, 0.6]).bits, [0, 1])
        np.testing.assert_array_equal(reconstruct_by_rounding([0.5]).bits, [1])

    @settings(max_examples=300, deadline=None)
    @given(st.integers(1, 60), st.integers(0, 2 ** 32 - 1))
    def test_hamming_at_most_twice_l1(self, n, seed):
        rng = np.random.default_rng(seed)
        D = rng.integers(0, 2, size=n)
        x = D + rng.normal(0, rng.uniform(0, 1), size=n)
        l1 = np.abs(np.clip(x, 0, 1) - D).sum()
        assert np.count_nonzero(reconstruct_by_rounding(x).bits != D) <= 2 * l1 + 1e-12


class TestBound:
    def test_zero_privacy(self):
        assert reconstruction_bound(0.0, 0.0, 0.0) == pytest.approx(0.25)

    def test_infinite_epsilon(self):
        assert reconstruction_bound(math.inf, 0.0, 0.1) == pytest.approx(0.5 - 1 / 1.8)
        assert reconstruction_bound(50.0, 0.0, 0.0) == pytest.approx(0.0, abs=1e-15)

    @given(st.floats(0, 20), st.floats(0, 0.5), st.floats(0, 0.9))
    def test_monotone(self, eps, delta, beta):
        c = reconstruction_bound(eps, delta, beta)
        assert reconstruction_bound(eps + 0.1, delta, beta) <= c + 1e-15
        assert reconstruction_bound(eps, delta + 0.01, beta) <= c + 1e-15
        assert reconstruction_bound(eps, delta, min(beta + 0.05, 0.95)) <= c + 1e-15

    def test_domain(self):
        with pytest.raises(ValueError):
            reconstruction_bound(1.0, 0.0, 1.0)

    def test_applicable(self):
        assert applicable_bound("scalar", 1.0, 1e-6, 0.1) == 0.5
        assert applicable_bound("objective", 1.0, 1e-6, 0.1) == pytest.approx(
            reconstruction_bound(2.0, 1e-6 * (1 + math.e), 0.1))


class TestExperiment:
    def test_scalar_exact_perfect(self):
        rep = run_attack_experiment("scalar", "exact", 50, 100, 0)
        assert rep["perfect_rate"] == 1.0 and rep["mean_hamming"] == 0.0

    def test_objective_private_reports_bound(self):
        rep = run_attack_experiment("objective", "objective-private", 20, 20, 0)
        assert len(rep["l1_errors"]) == 20
        assert rep["bound"] == pytest.approx(applicable_bound("objective", 1.0, 1e-6, 0.1))

    def test_scalar_laplace_makes_errors(self):
        rep = run_attack_experiment("scalar", "scalar-laplace", 50, 20, 0, epsilon=0.5)
        assert rep["mean_hamming"] > 0.1

    def test_zero_trials(self):
        rep = run_attack_experiment("constraint", "exact", 4, 0, 0)
        assert rep["l1_errors"] == [] and "mean_hamming" not in rep

    def test_rejections(self):
        with pytest.raises(ValueError):
            run_attack_experiment("objective", "exact", 5, 1, 0)
        with pytest.raises(ValueError):
            run_attack_experiment("scalar", "objective-private", 4, 1, 0)

    def test_reproducible(self):
        assert run_attack_experiment("scalar", "scalar-laplace", 10, 5, 3) == \
            run_attack_experiment("scalar", "scalar-laplace", 10, 5, 3)
