"""Objective-private LPs by randomized response.

Laplace noise is added to the objective once, and the perturbed LP is then
solved exactly and non-privately. The perturbed LP is the private release, so
the solution is always exactly feasible for the true constraints.
"""

from dataclasses import dataclass
import math

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_open_unit, check_positive, check_privacy, check_random_state, check_vector
from .lp import LpInstance, Sense, Solution, canonicalize
from .mechanisms import PrivacyBudget, laplace_sample
from .simplex import linprog_max


@dataclass(frozen=True, eq=False)
class PerturbedObjective:
    c_hat: np.ndarray
    noise_scale: float
    draws: np.ndarray


def objective_noise_scale(d, delta_1, epsilon, delta):
    """Per-coordinate Laplace scale ``delta_1 sqrt(8 d log(1/delta)) / epsilon``."""
    return delta_1 * math.sqrt(8.0 * d * math.log(1.0 / delta)) / epsilon


def perturb_objective(c, delta_1, epsilon, delta, rng, budget=None):
    """Add ``d`` independent Laplace draws to ``c``.

    Each draw is an ``epsilon' = epsilon / sqrt(8 d log(1/delta))`` private
    release of one coordinate; ``d`` of them compose to ``(epsilon, delta)``.
    """
    c = check_vector(c, name="c")
    check_privacy(epsilon, delta)
    if not delta_1 >= 0:
        raise ValueError("delta_1 must be nonnegative")
    rng = check_random_state(rng)
    d = c.shape[0]
    if budget is not None:
        eps_prime = budget.plan(d)
        for _ in range(d):
            budget.charge("laplace", eps_prime)
    scale = objective_noise_scale(d, delta_1, epsilon, delta)
    draws = laplace_sample(scale, rng, size=d)
    return PerturbedObjective(c + draws, scale, draws)


def objective_accuracy_bound(d, delta_1, epsilon, delta, beta=None):
    """Objective gap guaranteed for the perturbed solve.

    With ``beta=None`` this is the closed form ``4 delta_1 sqrt(8 d log(d/delta))
    / epsilon``. Passing ``beta`` gives ``2 * scale * log(d / beta)``: the gap
    that holds whenever all ``d`` draws stay below ``scale * log(d / beta)``,
    which by a union bound happens with probability at least ``1 - beta``.
    """
    check_privacy(epsilon, delta)
    if beta is None:
        return 4.0 * delta_1 * math.sqrt(8.0 * d * math.log(d / delta)) / epsilon
    check_open_unit(beta, "beta")
    return 2.0 * objective_noise_scale(d, delta_1, epsilon, delta) * math.log(d / beta)


def _split(instance, append_simplex):
    lp, _ = canonicalize(LpInstance(instance.A, instance.b, instance.c, instance.senses,
                                    instance.var_lower))
    A_eq = np.ones((1, instance.d)) if append_simplex else None
    b_eq = np.ones(1) if append_simplex else None
    return lp, A_eq, b_eq


def solve_exact_lp(instance, objective=None, append_simplex=True):
    """Exact optimum of ``max c @ x`` over the instance's rows and ``x >= 0``.

    With ``append_simplex`` the side constraint ``sum(x) == 1`` is added, which
    keeps the feasible region bounded. ``objective`` overrides ``instance.c``.
    """
    c = instance.c if objective is None else np.asarray(objective, dtype=np.float64)
    if c is None:
        c = np.zeros(instance.d)
    lp, A_eq, b_eq = _split(instance, append_simplex)
    x, _ = linprog_max(c, lp.A, lp.b, A_eq, b_eq)
    true_c = instance.c if instance.c is not None else np.zeros(instance.d)
    return Solution.from_point(lp, x, true_c)


def solve_objective_private(instance, delta_1, epsilon, delta, rng, append_simplex=True,
                            beta=None):
    """Release a Laplace-perturbed objective and solve the perturbed LP exactly.

    ``solution.info`` holds the perturbed objective, the noise scale, the
    accuracy bound and the budget audit.
    """
    if instance.c is None:
        raise ValueError("instance has no objective")
    budget = PrivacyBudget(epsilon, delta)
    pert = perturb_objective(instance.c, delta_1, epsilon, delta, rng, budget=budget)
    sol = solve_exact_lp(instance, objective=pert.c_hat, append_simplex=append_simplex)
    d = instance.d
    info = {
        "c_hat": pert.c_hat.tolist(),
        "noise_scale": pert.noise_scale,
        "alpha_bound": objective_accuracy_bound(d, delta_1, epsilon, delta, beta),
        "derived": {"k": d, "epsilon_prime": budget.epsilon_prime, "noise_scale": pert.noise_scale},
        "budget": budget.audit(),
    }
    return Solution(sol.x, sol.slack, sol.objective_value, info)


class ObjectivePrivateLP(BaseEstimator):
    """Objective-private LP solver with the sklearn estimator interface.

    ``fit(A, b, c)`` maximizes ``c @ x`` subject to ``A x <= b`` and the simplex
    constraint; the private output is ``x_`` together with ``c_hat_``.
    """

    def __init__(self, epsilon=1.0, delta=1e-6, sensitivity=1e-3, append_simplex=True,
                 random_state=0):
        self.epsilon = epsilon
        self.delta = delta
        self.sensitivity = sensitivity
        self.append_simplex = append_simplex
        self.random_state = random_state

    def fit(self, A, b, c):
        check_positive(self.sensitivity, "sensitivity")
        instance = LpInstance(A, b, c, (Sense.LE,) * np.shape(A)[0])
        self.solution_ = solve_objective_private(instance, self.sensitivity, self.epsilon,
                                                 self.delta, self.random_state,
                                                 self.append_simplex)
        self.x_ = self.solution_.x
        self.c_hat_ = np.asarray(self.solution_.info["c_hat"])
        self.objective_ = self.solution_.objective_value
        return self
