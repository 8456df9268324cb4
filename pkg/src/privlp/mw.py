"""Multiplicative weights, dense multiplicative weights, and their regret audits.

Weights are kept as logarithms: a long run multiplies each weight by
``exp(-eta * loss)`` thousands of times and would underflow otherwise.
"""

from dataclasses import dataclass
from itertools import combinations
import math

import numpy as np


def logsumexp(a):
    """Max-shifted ``log(sum(exp(a)))`` for 1-d input.

    ``scipy.special.logsumexp`` gives the same value but its dispatch overhead
    dominates the per-round cost on vectors of a few dozen entries.
    """
    top = a.max()
    if not np.isfinite(top):
        return top
    return top + math.log(np.exp(a - top).sum())


def _check_eta(eta):
    if not 0 < eta <= 0.5:
        raise ValueError(f"eta must lie in (0, 1/2], got {eta!r}")
    return float(eta)


def _log(weights):
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be nonnegative and finite")
    with np.errstate(divide="ignore"):
        return np.log(w)


def mw_step(dist, loss, eta):
    """One multiplicative-weights update followed by normalization."""
    eta = _check_eta(eta)
    logp = _log(dist)
    loss = np.asarray(loss, dtype=np.float64)
    if loss.shape != logp.shape:
        raise ValueError("loss and distribution sizes differ")
    logp = logp - eta * loss
    total = logsumexp(logp)
    assert np.isfinite(total), "all weights vanished"
    return np.exp(logp - total)


def project_log(log_measure, s):
    """Bregman projection of a measure given by its logs (``-inf`` for zero weight).

    Solves ``sum_a min(1, c A_a) = s`` exactly: with weights sorted in
    decreasing order, the number of capped coordinates is the smallest ``k``
    with ``(s - k) A_(k) <= sum_{j >= k} A_(j)``.
    """
    lw = np.asarray(log_measure, dtype=np.float64)
    if int(s) != s or s < 1:
        raise ValueError("density parameter s must be a positive integer")
    s = int(s)
    support = int(np.count_nonzero(np.isfinite(lw)))
    if support < s:
        raise ValueError(
            f"measure has support {support} < s = {s}; no 1/s-dense projection exists")
    order = np.argsort(-lw, kind="stable")
    top = lw[order][:support]
    suffix = np.logaddexp.accumulate(top[::-1])[::-1]
    k = np.arange(s)
    ok = np.log(s - k) + top[:s] <= suffix[:s]
    first = int(np.argmax(ok))
    log_c = math.log(s - first) - suffix[first]
    with np.errstate(over="ignore"):
        capped = np.minimum(1.0, np.exp(log_c + lw))
    return capped / s


def bregman_project(measure, s):
    """Project a nonnegative measure onto the 1/s-dense distributions.

    Each coordinate becomes ``min(1, c * A_a) / s``; the result sums to one and
    no entry exceeds ``1/s``.
    """
    return project_log(_log(measure), s)


def dmw_step(measure, loss, eta, s):
    """One round of dense multiplicative weights.

    Returns ``(next_measure, projection)`` where the projection is taken from
    the measure *before* this round's loss is applied, and the measure itself is
    not normalized.
    """
    eta = _check_eta(eta)
    measure = np.asarray(measure, dtype=np.float64)
    projection = bregman_project(measure, s)
    return measure * np.exp(-eta * np.asarray(loss, dtype=np.float64)), projection


class MultiplicativeWeights:
    """MW over ``k`` actions, starting from the uniform distribution."""

    def __init__(self, k, eta):
        self.k = int(k)
        self.eta = _check_eta(eta)
        self.log_weights = np.full(self.k, -math.log(self.k))

    @property
    def distribution(self):
        return np.exp(self.log_weights)

    def update(self, loss):
        lw = self.log_weights - self.eta * np.asarray(loss, dtype=np.float64)
        self.log_weights = lw - logsumexp(lw)
        return self.distribution


class DenseMultiplicativeWeights:
    """DMW over ``k`` actions with density parameter ``s``.

    Starts from the uniform measure of density one. The measure is never
    renormalized; only its projection is a distribution.
    """

    def __init__(self, k, eta, s):
        if s > k:
            raise ValueError(f"density parameter {s} exceeds the number of actions {k}")
        self.k = int(k)
        self.eta = _check_eta(eta)
        self.s = int(s)
        self.log_measure = np.full(self.k, -math.log(self.k))

    @property
    def projection(self):
        return project_log(self.log_measure, self.s)

    def update(self, loss):
        self.log_measure = self.log_measure - self.eta * np.asarray(loss, dtype=np.float64)


@dataclass(frozen=True)
class RegretReport:
    """Both sides of a regret inequality; ``slack = rhs - lhs``."""

    lhs: float
    rhs: float
    n_comparators: int = 1

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def holds(self):
        return self.lhs <= self.rhs


def _stack(rows, name):
    arr = np.asarray(rows, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a T x k array")
    return arr


def regret_audit_mw(losses, dists, eta):
    """Check ``sum_t <l_t, p_t> <= min_a sum_t l_t[a] + eta T + log(k) / eta``."""
    if len(losses) == 0:
        return RegretReport(0.0, 0.0)
    L = _stack(losses, "losses")
    P = _stack(dists, "dists")
    T, k = L.shape
    lhs = float(np.einsum("tk,tk->", L, P))
    rhs = float(L.sum(axis=0).min() + eta * T + math.log(k) / eta)
    return RegretReport(lhs, rhs, k)


def regret_audit_dmw(losses, projections, eta, s, exhaustive_limit=100_000):
    """Check the dense regret bound against uniform distributions on size-``s`` sets.

    The averaged inequality ``(1/T) sum <l_t, B_t> <= (1/T) sum <l_t, B*> + eta
    + log(k) / (eta T)`` must hold for every comparator. Comparators are
    enumerated when there are at most ``exhaustive_limit`` of them; otherwise
    the binding one (the ``s`` actions with smallest cumulative loss) is used,
    which gives the same verdict.
    """
    if len(losses) == 0:
        return RegretReport(0.0, 0.0)
    L = _stack(losses, "losses")
    B = _stack(projections, "projections")
    T, k = L.shape
    lhs = float(np.einsum("tk,tk->", L, B)) / T
    cum = L.sum(axis=0)
    n = math.comb(k, s)
    if n <= exhaustive_limit:
        best = min(cum[list(S)].sum() for S in combinations(range(k), s)) / s
    else:
        best = np.sort(cum)[:s].sum() / s
    rhs = float(best / T + eta + math.log(k) / (eta * T))
    return RegretReport(lhs, rhs, n)
