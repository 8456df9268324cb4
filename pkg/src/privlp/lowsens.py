"""Low-sensitivity private LP solvers over primal multiplicative weights.

MW keeps a distribution over the variables; every round a dual oracle (the
exponential mechanism over constraints) picks a nearly most-violated
constraint and its row becomes the loss. Which part of the LP is private
decides where noise goes:

* scalar: only ``b`` is private, so the oracle is the only private step;
* row: every entry of ``A`` may move by ``delta_inf``, so each loss coordinate
  also gets Laplace noise;
* column: each row of ``A`` moves by at most ``delta_1`` in l1, so one noise
  draw per round covers the whole loss vector.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import brentq
from sklearn.base import BaseEstimator

from ._validation import (check_nonnegative, check_open_unit,
                          check_privacy, check_random_state)
from .lp import FeasibilityLp, PublicRegion, Solution
from .mechanisms import PrivacyBudget, QualityScore, exponential_mechanism, laplace_sample
from .mw import MultiplicativeWeights

KINDS = ("scalar", "row", "column")


class VacuousBoundError(ValueError):
    """The accuracy bound has no solution below 1, so the guarantee says nothing."""


def exp_mech_dual_oracle(A, b, x, epsilon_prime, sensitivity, rng):
    """Privately pick a constraint with nearly maximal violation ``A_i x - b_i``.

    ``sensitivity == 0`` is the noiseless limit and returns the exact argmax
    (lowest index on ties).
    """
    scores = A @ x - b
    if sensitivity == 0:
        return int(np.argmax(scores))
    return exponential_mechanism(QualityScore(scores, sensitivity), epsilon_prime, rng)


def dual_oracle_error(m, epsilon_prime, sensitivity, gamma):
    """``(2 Delta / eps') log(m / gamma)``: the oracle's suboptimality w.p. ``1 - gamma``."""
    return 2.0 * sensitivity / epsilon_prime * math.log(m / gamma)


def iterations(kind, d, alpha, rho=1.0):
    """Round count: ``9 rho^2 log(d) / alpha^2`` for scalar, ``144 log(d) / alpha^2`` otherwise.

    Only the formula; :class:`LowSensParams` enforces the range of ``alpha``.
    """
    if kind == "scalar":
        return math.ceil(9.0 * rho ** 2 * math.log(d) / alpha ** 2)
    return math.ceil(144.0 * math.log(d) / alpha ** 2)


@dataclass(frozen=True)
class LowSensParams:
    """Privacy and accuracy targets for one of the three solvers.

    ``sensitivity`` is ``delta_inf`` for the scalar and row solvers and
    ``delta_1`` for the column solver.
    """

    kind: str
    epsilon: float
    delta: float
    alpha: float
    sensitivity: float
    beta: float = 0.1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        check_privacy(self.epsilon, self.delta)
        check_nonnegative(self.sensitivity, "sensitivity")
        check_open_unit(self.beta, "beta")
        if self.kind == "scalar":
            if not self.alpha > 0:
                raise ValueError("alpha must be positive")
        else:
            check_open_unit(self.alpha, "alpha")

    def iterations(self, d, rho=1.0):
        return iterations(self.kind, d, self.alpha, rho)

    def eta(self, d, rho=1.0):
        return math.sqrt(math.log(d) / self.iterations(d, rho))

    def composition_steps(self, d, rho=1.0):
        """``k`` in the composition identity: ``T``, ``2 d T`` or ``2 T``."""
        T = self.iterations(d, rho)
        return {"scalar": T, "row": 2 * d * T, "column": 2 * T}[self.kind]

    def epsilon_prime(self, d, rho=1.0):
        T = self.iterations(d, rho)
        log_inv = math.log(1.0 / self.delta)
        if self.kind == "scalar":
            return self.epsilon / math.sqrt(8.0 * T * log_inv)
        if self.kind == "row":
            return self.epsilon / (4.0 * math.sqrt(d * T * log_inv))
        return self.epsilon / (4.0 * math.sqrt(T * log_inv))


def _check_lp(lp, kind):
    if lp.region.kind != "simplex":
        raise ValueError("low-sensitivity solvers need the simplex region; see rescale_to_simplex")
    if kind != "scalar" and np.abs(lp.A).max() > 1.0:
        raise ValueError("row/column solvers need every entry of A in [-1, 1]")


def _solve(lp, params, rng, noise, budget, trace):
    rng = check_random_state(rng)
    _check_lp(lp, params.kind)
    m, d = lp.A.shape
    if d < 2:
        raise ValueError("need at least two variables")
    A, b = lp.A, lp.b
    rho = float(np.abs(A).max()) if params.kind == "scalar" else 1.0
    if rho == 0:
        raise ValueError("A is identically zero")
    T = params.iterations(d, rho)
    eta = params.eta(d, rho)
    k = params.composition_steps(d, rho)
    if budget is None:
        budget = PrivacyBudget(params.epsilon, params.delta)
    eps_prime = budget.plan(k)
    delta_s = params.sensitivity
    engine = MultiplicativeWeights(d, eta)
    total = np.zeros(d)
    out_of_range = 0
    for t in range(T):
        x = engine.distribution
        total += x
        budget.charge("dual_oracle", eps_prime)
        p = exp_mech_dual_oracle(A, b, x, eps_prime, delta_s, rng)
        row = A[p]
        if params.kind == "scalar":
            loss = row / rho
        else:
            scale = delta_s / eps_prime
            if params.kind == "row":
                for _ in range(d):
                    budget.charge("laplace", eps_prime)
                nu = laplace_sample(scale, rng, size=d)
            elif noise == "shared":
                budget.charge("laplace", eps_prime)
                nu = laplace_sample(scale, rng)
            else:
                budget.charge("laplace_vector", eps_prime)
                nu = laplace_sample(scale, rng, size=d)
            loss = (row + nu) / 2.0
            out_of_range += int(np.any(np.abs(loss) > 1.0))
        if trace is not None:
            trace.record(t, loss, x, None, eta)
        engine.update(loss)
    if trace is not None:
        trace.finish(engine.distribution)
    x_bar = total / T
    info = {
        "derived": {"T": T, "eta": eta, "epsilon_prime": eps_prime, "k": k, "rho": rho},
        "budget": budget.audit(),
        "rounds_with_loss_outside_unit": out_of_range,
    }
    return Solution.from_point(lp, x_bar, **info)


def solve_scalar_private(lp, params, rng, budget=None, trace=None):
    """Private LP solver when only the right-hand side ``b`` is private."""
    if params.kind != "scalar":
        raise ValueError("params are not for the scalar solver")
    return _solve(lp, params, rng, None, budget, trace)


def solve_row_private(lp, params, rng, budget=None, trace=None):
    """Private LP solver when every entry of ``A`` may change by ``delta_inf``."""
    if params.kind != "row":
        raise ValueError("params are not for the row solver")
    return _solve(lp, params, rng, None, budget, trace)


def solve_column_private(lp, params, rng, budget=None, trace=None, noise="shared"):
    """Private LP solver when each row of ``A`` may change by ``delta_1`` in l1.

    ``noise="shared"`` adds one Laplace draw to the whole selected row per
    round; ``noise="per_coordinate"`` adds an independent draw to each entry.
    Both cost one ``epsilon'`` charge per round.
    """
    if params.kind != "column":
        raise ValueError("params are not for the column solver")
    if noise not in ("shared", "per_coordinate"):
        raise ValueError(f"unknown noise mode {noise!r}")
    return _solve(lp, params, rng, noise, budget, trace)


def _bound_terms(kind, d, m, epsilon, delta, beta, sensitivity, rho):
    """``(K, C)`` such that the bound solves ``alpha = K * sqrt(log(C / alpha^2))``."""
    L = math.log(1.0 / delta)
    if kind == "scalar":
        K = math.sqrt(18.0 * rho * sensitivity * math.sqrt(8.0 * math.log(d) * L) / epsilon)
        C = 9.0 * rho ** 2 * math.log(d) * m / beta
    elif kind == "row":
        K = 12.0 * sensitivity ** 0.5 * d ** 0.25 * math.log(d) ** 0.25 * L ** 0.25 / epsilon ** 0.5
        C = 288.0 * d * math.log(d) * m / beta
    elif kind == "column":
        K = 12.0 * sensitivity ** 0.5 * math.log(d) ** 0.25 * L ** 0.25 / epsilon ** 0.5
        C = 288.0 * m * math.log(d) / beta
    else:
        raise ValueError(f"kind must be one of {KINDS}")
    return K, C


def bound_residual(kind, alpha, d, m, epsilon, delta, beta, sensitivity, rho=1.0):
    """``alpha`` minus the right-hand side of the accuracy inequality (>= 0 when it holds)."""
    K, C = _bound_terms(kind, d, m, epsilon, delta, beta, sensitivity, rho)
    return alpha - K * math.sqrt(max(math.log(C / alpha ** 2), 0.0))


def accuracy_bound(kind, d, m, epsilon, delta, beta, sensitivity, rho=1.0,
                   allow_vacuous=False):
    """Smallest ``alpha`` satisfying the solver's accuracy inequality.

    ``alpha`` appears inside its own log term; the residual ``alpha - rhs`` is
    increasing, so the smallest feasible ``alpha`` is its root, found to
    relative tolerance 1e-12. Raises :class:`VacuousBoundError` when the root is
    not below 1 unless ``allow_vacuous``.
    """
    if d < 2 or m < 1:
        raise ValueError("need d >= 2 and m >= 1")
    check_privacy(epsilon, delta)
    check_open_unit(beta, "beta")
    check_nonnegative(sensitivity, "sensitivity")
    if sensitivity == 0:
        return 0.0
    K, C = _bound_terms(kind, d, m, epsilon, delta, beta, sensitivity, rho)
    hi = math.sqrt(C)  # log(C / alpha^2) = 0 here, so the residual is positive
    lo = hi
    while bound_residual(kind, lo, d, m, epsilon, delta, beta, sensitivity, rho) > 0:
        lo /= 2.0
        if lo < 1e-300:
            raise RuntimeError("failed to bracket the accuracy bound")
    alpha = brentq(
        lambda a: bound_residual(kind, a, d, m, epsilon, delta, beta, sensitivity, rho),
        lo, hi, rtol=1e-12, maxiter=500)
    if alpha >= 1.0 and not allow_vacuous:
        raise VacuousBoundError(f"{kind} accuracy bound is {alpha:.4g} >= 1 (vacuous regime)")
    return alpha


def pst_bound(d, T, eta, rho):
    """Non-private accuracy ``3 (eta + log(d) / (eta T)) rho`` of primal MW."""
    return 3.0 * (eta + math.log(d) / (eta * T)) * rho


class _LowSensitivityLP(BaseEstimator):
    _kind = None

    def __init__(self, epsilon=1.0, delta=1e-6, alpha=0.5, sensitivity=0.0, beta=0.1,
                 random_state=0):
        self.epsilon = epsilon
        self.delta = delta
        self.alpha = alpha
        self.sensitivity = sensitivity
        self.beta = beta
        self.random_state = random_state

    def _params(self):
        return LowSensParams(self._kind, self.epsilon, self.delta, self.alpha,
                             self.sensitivity, self.beta)

    def _run(self, lp, params):
        return _solve(lp, params, self.random_state, "shared", None, None)

    def fit(self, A, b):
        """Solve ``A x <= b`` over the probability simplex."""
        lp = FeasibilityLp(A, b, PublicRegion.simplex())
        self.solution_ = self._run(lp, self._params())
        self.x_ = self.solution_.x
        self.slack_ = self.solution_.slack
        derived = self.solution_.info["derived"]
        self.n_iter_ = derived["T"]
        self.epsilon_prime_ = derived["epsilon_prime"]
        return self

    def score(self, A, b):
        """Negated largest constraint violation of ``x_`` on ``(A, b)``."""
        return -float(np.max(np.asarray(A) @ self.x_ - np.asarray(b)))


class ScalarPrivateLP(_LowSensitivityLP):
    """Private solver for LPs whose right-hand side is private (``delta_inf``)."""

    _kind = "scalar"


class RowPrivateLP(_LowSensitivityLP):
    """Private solver for LPs whose matrix entries move by ``delta_inf``."""

    _kind = "row"


class ColumnPrivateLP(_LowSensitivityLP):
    """Private solver for LPs whose matrix rows move by ``delta_1`` in l1."""

    _kind = "column"

    def __init__(self, epsilon=1.0, delta=1e-6, alpha=0.5, sensitivity=0.0, beta=0.1,
                 noise="shared", random_state=0):
        super().__init__(epsilon, delta, alpha, sensitivity, beta, random_state)
        self.noise = noise

    def _run(self, lp, params):
        return _solve(lp, params, self.random_state, self.noise, None, None)
