import math

import numpy as np
import pytest
from scipy import stats

from privlp.lp import LpInstance
from privlp.objective import (objective_accuracy_bound, objective_noise_scale, perturb_objective,
                              solve_exact_lp, solve_objective_private)
from privlp.simplex import InfeasibleError
from privlp.verification import brute_force_lp


def test_noise_scale():
    assert objective_noise_scale(10, 1e-3, 1.0, 1e-6) == pytest.approx(0.03325, rel=1e-3)


def test_printed_bound():
    assert objective_accuracy_bound(10, 1e-3, 1.0, 1e-6) == pytest.approx(0.1436, rel=1e-3)


def test_zero_sensitivity_is_identity():
    c = np.array([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(perturb_objective(c, 0.0, 1.0, 1e-6, 0).c_hat, c)


def test_exact_lp_examples():
    sol = solve_exact_lp(LpInstance([[1.0, 1.0]], [1.0], c=[1.0, 0.0]), append_simplex=False)
    np.testing.assert_allclose(sol.x, [1.0, 0.0])
    sol = solve_exact_lp(LpInstance(np.zeros((1, 3)), [1.0], c=[3.0, 1.0, 2.0]))
    np.testing.assert_allclose(sol.x, [1.0, 0.0, 0.0])
    assert sol.objective_value == pytest.approx(3.0)


def test_exact_lp_against_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(100):
        m, d = rng.integers(1, 5), rng.integers(2, 5)
        A = rng.uniform(-1, 1, size=(m, d))
        b = rng.uniform(0.2, 1, size=m)
        c = rng.normal(size=d)
        try:
            _, value = brute_force_lp(c, A, b, np.ones((1, d)), np.ones(1))
        except ValueError:
            with pytest.raises(InfeasibleError):
                solve_exact_lp(LpInstance(A, b, c=c))
            continue
        sol = solve_exact_lp(LpInstance(A, b, c=c))
        assert sol.objective_value == pytest.approx(value, abs=1e-8)


def test_solution_always_feasible():
    rng = np.random.default_rng(1)
    A = rng.uniform(-1, 1, size=(6, 4))
    inst = LpInstance(A, np.full(6, 0.5), c=rng.normal(size=4))
    for seed in range(20):
        sol = solve_objective_private(inst, 1e-2, 1.0, 1e-6, seed)
        assert np.all(A @ sol.x <= 0.5 + 1e-9)
        assert sol.info["budget"]["charges"][0]["count"] == 4


def test_strict_beta_tail_rate():
    d, beta = 5, 0.1
    scale = objective_noise_scale(d, 1e-3, 1.0, 1e-6)
    alpha = objective_accuracy_bound(d, 1e-3, 1.0, 1e-6, beta=beta)
    # per-draw exceedance of alpha/2 equals beta/d exactly
    assert 2 * stats.laplace.sf(alpha / 2, scale=scale) == pytest.approx(beta / d, rel=1e-12)


def test_printed_bound_per_draw_rate():
    d = 5
    scale = objective_noise_scale(d, 1e-3, 1.0, 1e-6)
    alpha = objective_accuracy_bound(d, 1e-3, 1.0, 1e-6)
    analytic = math.exp(-alpha / (2 * scale))
    draws = np.random.default_rng(3).laplace(scale=scale, size=200_000)
    assert np.mean(np.abs(draws) > alpha / 2) == pytest.approx(analytic, rel=0.05)
    # larger than the beta / d = 0.02 the closed form would need
    assert analytic > 0.02


def test_missing_objective():
    with pytest.raises(ValueError):
        solve_objective_private(LpInstance([[1.0]], [1.0]), 1e-3, 1.0, 1e-6, 0)
