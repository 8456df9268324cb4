"""Brute-force oracles, random instance generators and the trial harness.

Everything here is deliberately naive: exhaustive scans and vertex
enumeration serve as ground truth for the solvers and oracles elsewhere.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from itertools import combinations
import time

import numpy as np

from ._validation import check_random_state
from .io import read_trace
from .lp import FeasibilityLp, PublicRegion, max_violation
from .mw import (DenseMultiplicativeWeights, MultiplicativeWeights, bregman_project,
                 regret_audit_dmw, regret_audit_mw)
from .simplex import linprog_max

# Fixed seeds for the acceptance suites; tests/data/seeds.txt holds the same list.
DEFAULT_SEEDS = tuple(range(20_000, 20_200))


def load_seeds(path):
    """One integer per line; blank lines and ``#`` comments are ignored."""
    seeds = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                seeds.append(int(line))
    if not seeds:
        raise ValueError(f"{path} holds no seeds")
    return tuple(seeds)


@dataclass
class TrialReport:
    seed: int
    instance_id: str
    slack: np.ndarray
    max_slack: float
    n_violated: int
    success: bool
    runtime: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self, include_runtime=True):
        out = asdict(self)
        out["slack"] = self.slack.tolist()
        if not include_runtime:
            out.pop("runtime")
        return out


def check_feasibility(lp, x, alpha, seed=None, instance_id="", runtime=0.0):
    """Exhaustive slack check: counts rows with ``A_i x - b_i > alpha``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (lp.d,):
        raise ValueError(f"x has shape {x.shape}, expected ({lp.d},)")
    slack = np.array([float(lp.A[i] @ x - lp.b[i]) for i in range(lp.m)])
    n_violated = int(np.count_nonzero(slack > alpha))
    return TrialReport(seed, instance_id, slack, float(slack.max()), n_violated,
                       n_violated == 0, runtime)


def brute_force_vertex_argopt(y, A, vertices, sense="min"):
    """Index of the vertex minimizing (or maximizing) ``y @ A @ v``; lowest index on ties."""
    V = np.atleast_2d(np.asarray(vertices, dtype=np.float64))
    if V.shape[0] == 0 or V.size == 0:
        raise ValueError("empty vertex set")
    w = np.asarray(y, dtype=np.float64) @ np.asarray(A, dtype=np.float64)
    best, best_val = 0, None
    for j in range(V.shape[0]):
        val = float(w @ V[j])
        if sense == "max":
            val = -val
        if best_val is None or val < best_val:
            best, best_val = j, val
    return best


def brute_force_most_violated(A, b, x):
    """Index of the row with the largest ``A_i x - b_i`` by a plain scan."""
    best, best_val = 0, None
    for i in range(len(b)):
        val = float(np.dot(A[i], x) - b[i])
        if best_val is None or val > best_val:
            best, best_val = i, val
    return best


def enumerate_vertices(A_ub, b_ub, A_eq=None, b_eq=None, tol=1e-9):
    """All basic feasible points of ``{x >= 0 : A_ub x <= b_ub, A_eq x = b_eq}``.

    Tries every choice of ``d - m_eq`` active inequalities. Exponential; meant
    for ``d`` up to about 8.
    """
    A_ub = np.atleast_2d(np.asarray(A_ub, dtype=np.float64))
    d = A_ub.shape[1]
    b_ub = np.asarray(b_ub, dtype=np.float64)
    A_eq = np.zeros((0, d)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=np.float64))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=np.float64)
    G = np.vstack([A_ub, -np.eye(d)])
    h = np.concatenate([b_ub, np.zeros(d)])
    need = d - A_eq.shape[0]
    found = []
    for active in combinations(range(G.shape[0]), need):
        M = np.vstack([A_eq, G[list(active)]])
        rhs = np.concatenate([b_eq, h[list(active)]])
        if np.linalg.matrix_rank(M) < d:
            continue
        x = np.linalg.solve(M, rhs)
        scale = 1.0 + np.abs(x).max()
        if np.all(G @ x <= h + tol * scale) and np.allclose(A_eq @ x, b_eq, atol=tol * scale):
            if not any(np.allclose(x, v, atol=1e-9) for v in found):
                found.append(x)
    return np.array(found).reshape(-1, d)


def brute_force_lp(c, A_ub, b_ub, A_eq=None, b_eq=None):
    """``max c @ x`` by vertex enumeration; assumes a bounded, nonempty region."""
    V = enumerate_vertices(A_ub, b_ub, A_eq, b_eq)
    if V.shape[0] == 0:
        raise ValueError("no vertices: region empty or unbounded in every direction")
    values = V @ np.asarray(c, dtype=np.float64)
    j = int(np.argmax(values))
    return V[j], float(values[j])


def adjacent_measure_gap(measure, extra, s):
    """l1 distance between the projections of ``measure`` and ``measure + [extra]``."""
    p = np.append(bregman_project(measure, s), 0.0)
    q = bregman_project(np.append(measure, extra), s)
    return float(np.abs(p - q).sum())


def projection_sensitivity_stress(trials, k_max, s, rng):
    """Largest projection gap over random adjacent measures.

    Weights are log-normal over several orders of magnitude so that capping
    happens often; one trial in ten appends a zero-weight coordinate.
    """
    rng = check_random_state(rng)
    if k_max <= s:
        raise ValueError("k_max must exceed s")
    worst = 0.0
    for _ in range(trials):
        k = int(rng.integers(s, k_max))  # size before the append
        measure = np.exp(rng.normal(0.0, 3.0, size=k))
        extra = 0.0 if rng.random() < 0.1 else float(np.exp(rng.normal(0.0, 3.0)))
        worst = max(worst, adjacent_measure_gap(measure, extra, s))
    return worst


def regret_replay(path, tol=1e-9):
    """Re-run the engine on the losses in a trace and audit the regret bound.

    The distributions are recomputed from the losses alone and must match the
    stored ones; a mismatch means the trace is inconsistent. Returns a dict with
    ``consistent``, the regret sides and ``passed``.
    """
    steps, final = read_trace(path)
    if not steps:
        return {"engine": None, "steps": 0, "consistent": True, "holds": True,
                "passed": True, "vacuous": True}
    L = np.array([s["loss"] for s in steps], dtype=np.float64)
    D = np.array([s["distribution"] for s in steps], dtype=np.float64)
    if L.ndim != 2 or D.shape != L.shape:
        raise ValueError("malformed trace: ragged loss or distribution rows")
    eta = steps[0]["eta"]
    density = steps[0]["density_param"]
    if any(s["eta"] != eta or s["density_param"] != density for s in steps):
        raise ValueError("malformed trace: eta or density changes between steps")
    k = L.shape[1]
    if density is None:
        engine = MultiplicativeWeights(k, eta)
        current = lambda: engine.distribution  # noqa: E731
    else:
        engine = DenseMultiplicativeWeights(k, eta, density)
        current = lambda: engine.projection  # noqa: E731
    deviation = 0.0
    for t in range(L.shape[0]):
        deviation = max(deviation, float(np.abs(current() - D[t]).max()))
        engine.update(L[t])
    if final is not None:
        deviation = max(deviation, float(np.abs(current() - np.asarray(final)).max()))
    if density is None:
        report = regret_audit_mw(L, D, eta)
    else:
        report = regret_audit_dmw(L, D, eta, density)
    consistent = deviation <= tol
    return {"engine": "mw" if density is None else "dmw", "steps": int(L.shape[0]),
            "consistent": consistent, "max_deviation": deviation,
            "lhs": report.lhs, "rhs": report.rhs, "holds": report.holds,
            "passed": consistent and report.holds, "vacuous": False}


def map_trials(fn, seeds, workers=1):
    """Run ``fn(seed)`` per seed; results come back in seed order regardless of workers."""
    seeds = list(seeds)
    if workers <= 1:
        return [fn(s) for s in seeds]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seeds))


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start


# random instance generators

def random_simplex_lp(m, d, rng, entry_bound=1.0, max_slack=0.2):
    """Feasible ``A x <= b`` over the simplex with entries in ``[-entry_bound, entry_bound]``.

    A random interior distribution ``x*`` is feasible by construction; about
    half the rows are tight at ``x*``.
    """
    rng = check_random_state(rng)
    A = rng.uniform(-entry_bound, entry_bound, size=(m, d))
    x_star = rng.dirichlet(np.ones(d))
    slack = rng.uniform(0.0, max_slack, size=m) * (rng.random(m) < 0.5)
    return FeasibilityLp(A, A @ x_star + slack, PublicRegion.simplex()), x_star


def random_cover(m, d, rng, p=0.3):
    """0/1 incidence matrix (elements x sets) where every element lies in at least one set."""
    rng = check_random_state(rng)
    cover = (rng.random((m, d)) < p).astype(np.float64)
    for i in np.flatnonzero(cover.sum(axis=1) == 0):
        cover[i, rng.integers(d)] = 1.0
    return cover


def setcover_opt(cover, costs):
    """Optimal fractional cover cost ``min c @ x`` s.t. ``cover @ x >= 1``, ``x >= 0``."""
    m = cover.shape[0]
    _, value = linprog_max(-np.asarray(costs, dtype=np.float64), -cover, -np.ones(m))
    return -value


def check_against_max_violation(lp, x, report):
    """``check_feasibility`` and ``max_violation`` must agree on the worst row."""
    _, worst = max_violation(lp, x)
    return abs(worst - report.max_slack) <= 1e-12 * max(1.0, abs(worst))
