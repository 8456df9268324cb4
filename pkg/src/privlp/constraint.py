"""High-sensitivity constraint-private feasibility via dense multiplicative weights.

Dense MW keeps a 1/s-dense distribution over the constraints; an oracle answers
each round with a point of the public region that does well on the weighted
constraint. Capping every constraint's weight at ``1/s`` is what lets a
private oracle hide whether a single constraint is present, at the price of up
to ``s - 1`` constraints ending up violated by more than ``alpha``.
"""

from dataclasses import dataclass
import math

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_positive, check_privacy, check_random_state
from .lp import FeasibilityLp, PublicRegion, Solution, width
from .mechanisms import PrivacyBudget, QualityScore, exponential_mechanism
from .mw import DenseMultiplicativeWeights


class OracleContractError(RuntimeError):
    """The oracle returned a point outside the public region."""


@dataclass(frozen=True)
class ConstraintPrivateParams:
    epsilon: float
    delta: float
    alpha: float
    density: int
    rho: float
    beta: float = 0.1

    def __post_init__(self):
        check_privacy(self.epsilon, self.delta)
        check_positive(self.alpha, "alpha")
        check_positive(self.rho, "rho")
        if int(self.density) != self.density or self.density < 1:
            raise ValueError("density must be a positive integer")
        if self.alpha > 9 * self.rho:
            raise ValueError(f"alpha={self.alpha} exceeds 9 * rho = {9 * self.rho}")

    def iterations(self, m):
        return math.ceil(36.0 * self.rho ** 2 * math.log(m) / self.alpha ** 2)

    def eta(self, m):
        eta = math.sqrt(math.log(m) / self.iterations(m))
        if eta > 0.5:
            raise ValueError(f"derived eta={eta:.3f} exceeds 1/2; lower alpha")
        return eta

    def epsilon_prime(self, m):
        return self.epsilon / math.sqrt(8.0 * self.iterations(m) * math.log(1.0 / self.delta))

    def derived(self, m):
        return {"T": self.iterations(m), "eta": self.eta(m),
                "epsilon_prime": self.epsilon_prime(m), "gamma": self.beta / self.iterations(m)}


class ApproxOracle:
    """Base class for oracles of the constraint-private solver.

    An ``(alpha, beta)``-approximate, ``rho``-bounded oracle is called as
    ``oracle(y, A, b, rng)`` with a 1/s-dense distribution ``y`` over the
    constraints and returns a point ``x`` of the public region that nearly
    minimizes ``y @ (A @ x)``. Privacy of the whole solve requires the oracle to
    be ``epsilon'``-private when ``y`` moves by at most ``2/s`` in l1 and one
    row of ``A`` is added or removed; this cannot be checked mechanically.
    """

    private = False

    def prepare(self, lp, params, epsilon_prime):
        """Called once before the first round."""

    def __call__(self, y, A, b, rng):
        raise NotImplementedError


class VertexArgminOracle(ApproxOracle):
    """Exact, non-private oracle: best vertex of the region, lowest index on ties."""

    def __init__(self, vertices=None):
        self.vertices = vertices

    def prepare(self, lp, params, epsilon_prime):
        if self.vertices is None:
            self.vertices_ = lp.region.vertices(lp.d)
        else:
            self.vertices_ = np.atleast_2d(np.asarray(self.vertices, dtype=np.float64))

    def __call__(self, y, A, b, rng):
        values = (y @ A) @ self.vertices_.T
        return self.vertices_[int(np.argmin(values))]


def setcover_quality(y, cover, opt, costs):
    """``Q(j) = (opt / c_j) sum_i y_i a_ij - 1`` for every candidate set ``j``."""
    return opt / np.asarray(costs, dtype=np.float64) * (y @ cover) - 1.0


def setcover_sensitivity(opt, costs, density):
    return 3.0 * opt / (float(np.min(costs)) * density)


def setcover_oracle(y, cover, opt, costs, epsilon_prime, rng, density):
    """Pick a vertex ``(opt / c_j) e_j`` of the cost slice with the exponential mechanism."""
    costs = np.asarray(costs, dtype=np.float64)
    if costs.min() <= 0:
        raise ValueError("set costs must be positive")
    check_positive(opt, "opt")
    q = QualityScore(setcover_quality(y, cover, opt, costs),
                     setcover_sensitivity(opt, costs, density))
    j = exponential_mechanism(q, epsilon_prime, rng)
    x = np.zeros(costs.shape[0])
    x[j] = opt / costs[j]
    return x


def setcover_oracle_params(opt, costs, density, epsilon_prime, gamma):
    """Declared ``(rho, alpha_oracle)`` of the set-cover oracle."""
    c_min = float(np.min(costs))
    d = len(costs)
    rho = opt / c_min - 1.0
    alpha = 6.0 * opt * math.log(d) * math.log(1.0 / gamma) / (c_min * density * epsilon_prime)
    return rho, alpha


class SetCoverOracle(ApproxOracle):
    """Private oracle for fractional set cover written as ``-a_i @ x <= -1``."""

    private = True

    def prepare(self, lp, params, epsilon_prime):
        region = lp.region
        if region.kind != "objective_slice":
            raise ValueError("the set-cover oracle needs an objective_slice region")
        cover = -lp.A
        if not np.all((cover == 0) | (cover == 1)) or not np.all(lp.b == -1):
            raise ValueError("the set-cover oracle expects rows -a_i @ x <= -1 with a_i in {0,1}")
        self.cover_ = cover
        self.opt_ = region.opt
        self.costs_ = region.c
        self.density_ = params.density
        self.epsilon_prime_ = epsilon_prime

    def __call__(self, y, A, b, rng):
        return setcover_oracle(y, self.cover_, self.opt_, self.costs_,
                               self.epsilon_prime_, rng, self.density_)


def setcover_lp(cover, costs, opt):
    """The covering problem ``a_i @ x >= 1`` over ``{x >= 0 : c @ x = opt}`` in ``<=`` form."""
    cover = np.asarray(cover, dtype=np.float64)
    return FeasibilityLp(-cover, -np.ones(cover.shape[0]),
                         PublicRegion.objective_slice(costs, opt))


def setcover_density(opt, costs, m, epsilon, delta, alpha, beta):
    """Smallest density ``s`` for which the set-cover oracle is ``alpha/3`` accurate.

    Unfolds ``epsilon'``, ``T`` and ``gamma = beta / T`` and solves the oracle's
    accuracy for ``s``. Values above ``m`` mean the guarantee is vacuous.
    """
    c_min = float(np.min(costs))
    rho = opt / c_min - 1.0
    params = ConstraintPrivateParams(epsilon, delta, alpha, 1, rho, beta)
    T = params.iterations(m)
    eps_prime = params.epsilon_prime(m)
    gamma = beta / T
    d = len(costs)
    return math.ceil(18.0 * opt * math.log(d) * math.log(1.0 / gamma) / (c_min * eps_prime * alpha))


def solve_constraint_private(lp, oracle, params, rng, budget=None, trace=None,
                             keep_history=False):
    """Dense-MW feasibility solver.

    Each round projects the constraint weights to the 1/s-dense set, asks the
    oracle for ``x_t``, and feeds losses ``(b_i - A_i x_t) / (2 rho) + 1/2`` to
    DMW. Returns the average point; ``solution.info`` carries derived
    parameters and the budget audit.
    """
    rng = check_random_state(rng)
    m = lp.m
    if params.density > m:
        raise ValueError(f"density {params.density} exceeds the number of constraints {m}")
    T = params.iterations(m)
    eta = params.eta(m)
    if budget is None:
        budget = PrivacyBudget(params.epsilon, params.delta)
    eps_prime = budget.plan(T)
    oracle.prepare(lp, params, eps_prime)
    engine = DenseMultiplicativeWeights(m, eta, params.density)
    A, b = lp.A, lp.b
    total = np.zeros(lp.d)
    history = [] if keep_history else None
    max_abs_loss = 0.0
    for t in range(T):
        y = engine.projection
        budget.charge("oracle", eps_prime)
        x = np.asarray(oracle(y, A, b, rng), dtype=np.float64)
        if not lp.region.contains(x):
            raise OracleContractError(f"round {t}: oracle returned a point outside the region")
        loss = (b - A @ x) / (2.0 * params.rho) + 0.5
        max_abs_loss = max(max_abs_loss, float(np.abs(loss).max()))
        if trace is not None:
            trace.record(t, loss, y, params.density, eta)
        engine.update(loss)
        total += x
        if keep_history:
            history.append(x)
    if trace is not None:
        trace.finish(engine.projection)
    x_bar = total / T
    info = {
        "derived": {"T": T, "eta": eta, "epsilon_prime": eps_prime, "k": T,
                    "density": params.density, "rho": params.rho},
        "budget": budget.audit(),
        "oracle_private": bool(oracle.private),
        "max_abs_loss": max_abs_loss,
        "loss_bound_ok": max_abs_loss <= 1.0 + 1e-9,
    }
    if keep_history:
        info["history"] = np.array(history)
    return Solution.from_point(lp, x_bar, **info)


class ConstraintPrivateLP(BaseEstimator):
    """Constraint-private LP feasibility solver with the sklearn estimator interface.

    ``fit(A, b)`` solves ``A x <= b`` over ``region`` and stores the average
    point in ``x_``. When ``rho`` is ``None`` the width is computed from the
    region's vertices, which are public.

    Parameters
    ----------
    epsilon, delta : float
        Target privacy.
    alpha : float
        Accuracy on all but fewer than ``density`` constraints.
    density : int
        Density parameter ``s``.
    region : PublicRegion
        Public feasible set; must expose vertices unless ``oracle`` does.
    oracle : ApproxOracle or None
        Defaults to :class:`SetCoverOracle`.
    random_state : int or Generator
    """

    def __init__(self, epsilon=1.0, delta=1e-6, alpha=0.5, density=10, beta=0.1,
                 region=None, oracle=None, rho=None, random_state=0):
        self.epsilon = epsilon
        self.delta = delta
        self.alpha = alpha
        self.density = density
        self.beta = beta
        self.region = region
        self.oracle = oracle
        self.rho = rho
        self.random_state = random_state

    def fit(self, A, b):
        region = self.region if self.region is not None else PublicRegion.simplex()
        lp = FeasibilityLp(A, b, region)
        rho = self.rho
        if rho is None:
            rho = width(lp, region.vertices(lp.d))
        oracle = self.oracle if self.oracle is not None else SetCoverOracle()
        params = ConstraintPrivateParams(self.epsilon, self.delta, self.alpha,
                                         self.density, rho, self.beta)
        self.solution_ = solve_constraint_private(lp, oracle, params, self.random_state)
        self.x_ = self.solution_.x
        self.slack_ = self.solution_.slack
        self.n_iter_ = self.solution_.info["derived"]["T"]
        self.epsilon_prime_ = self.solution_.info["derived"]["epsilon_prime"]
        self.violated_ = self.solution_.violated_beyond(self.alpha)
        return self

    def score(self, A, b):
        """Negated largest constraint violation of ``x_`` on ``(A, b)``."""
        return -float(np.max(np.asarray(A) @ self.x_ - np.asarray(b)))
