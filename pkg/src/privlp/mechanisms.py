"""Laplace and exponential mechanisms, advanced composition and a budget accountant."""

from dataclasses import dataclass
import math

import numpy as np

from ._validation import check_open_unit, check_positive
from .mw import logsumexp


class BudgetExhausted(RuntimeError):
    """More private operations were attempted than the composition plan covers."""


def laplace_sample(scale, rng, size=None):
    """Draw from Laplace(0, scale) by inverting the CDF of one uniform per draw.

    ``scale == 0`` is accepted and returns exact zeros (the noiseless limit).
    """
    if not scale >= 0 or not math.isfinite(scale):
        raise ValueError(f"scale must be a nonnegative finite number, got {scale!r}")
    u = rng.random(size)
    if scale == 0:
        return np.zeros_like(u) if size is not None else 0.0
    # half-ulp shift keeps |v| < 1/2 strictly, so the log stays finite
    v = (u - 0.5) + 2.0 ** -54
    draw = -scale * np.sign(v) * np.log1p(-2.0 * np.abs(v))
    return draw if size is not None else float(draw)


def laplace_cdf(x, scale):
    x = np.asarray(x, dtype=np.float64)
    return np.where(x < 0, 0.5 * np.exp(x / scale), 1.0 - 0.5 * np.exp(-x / scale))


def laplace_tail_threshold(scale, beta):
    """The ``T`` with ``Pr[|nu| >= T] = beta`` for ``nu ~ Laplace(scale)``."""
    scale = check_positive(scale, "scale")
    beta = check_open_unit(beta, "beta")
    return scale * math.log(1.0 / beta)


@dataclass(frozen=True, eq=False)
class QualityScore:
    """Scores over a finite range together with their sensitivity."""

    values: np.ndarray
    sensitivity: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("quality scores need a nonempty 1-d range")
        if not np.all(np.isfinite(values)):
            raise ValueError("quality scores must be finite")
        object.__setattr__(self, "values", values)


def exponential_mechanism_log_weights(q, epsilon):
    if q.sensitivity <= 0:
        raise ValueError("the exponential mechanism needs a positive sensitivity")
    epsilon = check_positive(epsilon, "epsilon")
    return epsilon * q.values / (2.0 * q.sensitivity)


def exponential_mechanism_probabilities(q, epsilon):
    logw = exponential_mechanism_log_weights(q, epsilon)
    return np.exp(logw - logsumexp(logw))


def exponential_mechanism(q, epsilon, rng, size=None):
    """Sample an index ``r`` with probability proportional to ``exp(eps Q(r) / (2 Delta))``.

    With ``size`` an array of independent draws is returned.
    """
    logw = exponential_mechanism_log_weights(q, epsilon)
    w = np.exp(logw - logw.max())
    cdf = np.cumsum(w)
    u = rng.random(size) * cdf[-1]
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), w.size - 1)
    return idx if size is not None else int(idx)


def exp_mech_error_bound(range_size, epsilon, sensitivity, beta):
    """Additive suboptimality ``(2 Delta / eps) log(|R| / beta)`` that holds w.p. ``1 - beta``."""
    if range_size < 1:
        raise ValueError("range_size must be at least 1")
    check_positive(epsilon, "epsilon")
    check_positive(sensitivity, "sensitivity")
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    return 2.0 * sensitivity / epsilon * math.log(range_size / beta)


def compose_budget(epsilon, delta, k):
    """Per-step epsilon so ``k`` adaptive steps compose to ``(epsilon, delta)``."""
    epsilon = check_positive(epsilon, "epsilon")
    delta = check_open_unit(delta, "delta")
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    return epsilon / math.sqrt(8.0 * k * math.log(1.0 / delta))


class PrivacyBudget:
    """Plan-then-charge accountant.

    Callers first :meth:`plan` ``k`` steps, which fixes the per-step
    ``epsilon_prime``; every private operation then calls :meth:`charge`.
    ``composition="basic"`` splits ``(epsilon, delta)`` evenly instead of using
    advanced composition.
    """

    def __init__(self, epsilon, delta):
        self.epsilon = check_positive(epsilon, "epsilon")
        self.delta = check_open_unit(delta, "delta")
        self.planned_k = None
        self.composition = None
        self.epsilon_prime = None
        self.delta_prime = 0.0
        self.ledger = []

    def plan(self, k, composition="advanced"):
        if self.planned_k is not None:
            raise RuntimeError("budget already planned")
        if composition == "advanced":
            self.epsilon_prime = compose_budget(self.epsilon, self.delta, k)
        elif composition == "basic":
            if int(k) != k or k < 1:
                raise ValueError("k must be a positive integer")
            self.epsilon_prime = self.epsilon / k
            self.delta_prime = self.delta / k
        else:
            raise ValueError(f"unknown composition {composition!r}")
        self.planned_k = int(k)
        self.composition = composition
        return self.epsilon_prime

    def charge(self, label, epsilon_prime):
        if self.planned_k is None:
            raise RuntimeError("charge before plan")
        if epsilon_prime > self.epsilon_prime * (1 + 1e-12):
            raise ValueError(f"charge {epsilon_prime} exceeds the planned {self.epsilon_prime}")
        if len(self.ledger) >= self.planned_k:
            raise BudgetExhausted(
                f"{label!r} would be charge {len(self.ledger) + 1} of a {self.planned_k}-step plan")
        self.ledger.append((label, float(epsilon_prime)))
        return self

    @property
    def n_charges(self):
        return len(self.ledger)

    @property
    def remaining(self):
        return self.planned_k - len(self.ledger)

    def composition_residual(self):
        """Relative gap between the plan and the target epsilon; 0 up to rounding."""
        k, e = self.planned_k, self.epsilon_prime
        if self.composition == "basic":
            return abs(k * e - self.epsilon) / self.epsilon
        return abs(k * 8.0 * math.log(1.0 / self.delta) * e * e - self.epsilon ** 2) / self.epsilon ** 2

    def audit(self):
        """JSON-ready audit record; charges are counted per ``(label, eps)`` in first-use order."""
        groups = {}
        for label, eps in self.ledger:
            entry = groups.setdefault((label, eps), {"label": label, "eps": eps, "count": 0})
            entry["count"] += 1
        groups = list(groups.values())
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "composition": self.composition,
            "planned_k": self.planned_k,
            "epsilon_prime": self.epsilon_prime,
            "n_charges": len(self.ledger),
            "charges": groups,
        }
