"""Reconstruction attacks through gadget LPs.

Each gadget turns a bit database into an LP whose accurate solution, rounded
coordinate-wise, reveals the database. Running a solver on gadgets and
measuring the rounded error shows what accuracy a solver gives away.
"""

from dataclasses import dataclass
import math

import numpy as np

from ._validation import check_random_state, spawn_generators
from .lp import LpInstance, Sense, canonicalize
from .mechanisms import laplace_sample
from .objective import solve_exact_lp, solve_objective_private

GADGETS = ("scalar", "objective", "constraint")


@dataclass(frozen=True, eq=False)
class BitDatabase:
    bits: np.ndarray
    balanced: bool = False

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 1 or not np.all((bits == 0) | (bits == 1)):
            raise ValueError("bits must be a 1-d 0/1 vector")
        bits = bits.astype(np.int64)
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)
        if self.balanced:
            n = bits.size
            if n % 2 or np.count_nonzero(bits == 0) != n // 2:
                raise ValueError("a balanced database has even n and exactly n/2 zeros")

    @property
    def n(self):
        return self.bits.size

    @classmethod
    def random(cls, n, rng, balanced=False):
        rng = check_random_state(rng)
        if balanced:
            if n % 2:
                raise ValueError("balanced databases need even n")
            bits = np.zeros(n, dtype=np.int64)
            bits[rng.permutation(n)[: n // 2]] = 1
        else:
            bits = rng.integers(0, 2, size=n)
        return cls(bits, balanced)

    def flip(self, i):
        bits = self.bits.copy()
        bits[i] ^= 1
        return BitDatabase(bits)

    def swap(self, i, j):
        bits = self.bits.copy()
        bits[[i, j]] = bits[[j, i]]
        return BitDatabase(bits, self.balanced)


@dataclass(frozen=True, eq=False)
class GadgetInstance:
    """A gadget LP with its database.

    ``private_rows`` marks the rows of ``lp`` that depend on the database; the
    remaining rows are public. ``objective_offset`` is the constant added to
    ``lp.c @ x``.
    """

    kind: str
    database: BitDatabase
    lp: LpInstance
    private_rows: np.ndarray
    objective_offset: float = 0.0


def _require_balanced(D):
    if not D.balanced:
        raise ValueError("this gadget needs a balanced database (exactly n/2 zeros)")


def gadget_scalar(D):
    """Equalities ``x_i = D_i``: a flipped bit moves one right-hand side by 1."""
    n = D.n
    if n == 0:
        raise ValueError("empty database")
    lp = LpInstance(np.eye(n), D.bits.astype(float), np.zeros(n), (Sense.EQ,) * n)
    return GadgetInstance("scalar", D, lp, np.ones(n, dtype=bool))


def _box_and_sum(n):
    """Public rows ``x_i <= 1`` followed by ``sum(x) = n/2``."""
    return np.vstack([np.eye(n), np.ones((1, n))]), np.r_[np.ones(n), n / 2]


def gadget_objective(D):
    """``max sum_i D_i x_i - n/2`` over ``sum(x) = n/2``, ``0 <= x <= 1``."""
    _require_balanced(D)
    n = D.n
    A, b = _box_and_sum(n)
    senses = (Sense.LE,) * n + (Sense.EQ,)
    lp = LpInstance(A, b, D.bits.astype(float), senses)
    return GadgetInstance("objective", D, lp, np.zeros(n + 1, dtype=bool), -n / 2)


def gadget_constraint(D):
    """Feasibility of ``sum_i D_i x_i = n/2`` together with the public box and sum rows."""
    _require_balanced(D)
    n = D.n
    box, rhs = _box_and_sum(n)
    A = np.vstack([D.bits.astype(float)[None, :], box])
    b = np.r_[n / 2, rhs]
    senses = (Sense.EQ,) + (Sense.LE,) * n + (Sense.EQ,)
    lp = LpInstance(A, b, np.zeros(n), senses)
    private = np.zeros(n + 2, dtype=bool)
    private[0] = True
    return GadgetInstance("constraint", D, lp, private)


GADGET_BUILDERS = {"scalar": gadget_scalar, "objective": gadget_objective,
                   "constraint": gadget_constraint}


def reconstruct_by_rounding(x):
    """Threshold each coordinate at 1/2; exact halves round to 1."""
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
    return BitDatabase((x >= 0.5).astype(np.int64))


def reconstruction_bound(epsilon, delta, beta):
    """``1/2 - (e^eps + delta) / (2 (1 + e^eps) (1 - beta))``.

    The normalized l1 error every ``(epsilon, delta)``-private reconstruction
    must incur. Nonpositive values mean the bound is vacuous.
    """
    if not 0 <= beta < 1:
        raise ValueError("beta must lie in [0, 1)")
    if not 0 <= delta < 1:
        raise ValueError("delta must lie in [0, 1)")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if math.isinf(epsilon):
        return 0.5 - 1.0 / (2.0 * (1.0 - beta))
    # e^eps / (1 + e^eps) written stably for large eps
    share = 1.0 / (1.0 + math.exp(-epsilon))
    return 0.5 - (share + delta / (1.0 + math.exp(epsilon))) / (2.0 * (1.0 - beta))


def applicable_bound(kind, epsilon, delta, beta):
    """Analytic lower bound on normalized error for a private solver on this gadget.

    One record change moves two LP coefficients in the objective and constraint
    gadgets, hence the doubled parameters there.
    """
    if kind == "scalar":
        return 0.5
    return reconstruction_bound(2 * epsilon, delta * (1 + math.exp(epsilon)), beta)


def _exact(gadget, rng, epsilon, delta):
    lp = gadget.lp
    return solve_exact_lp(lp, append_simplex=False).x


def _scalar_laplace(gadget, rng, epsilon, delta):
    """Randomized response on the right-hand side: ``x = D + Lap(1/epsilon)``."""
    if gadget.kind != "scalar":
        raise ValueError("scalar-laplace only applies to the scalar gadget")
    n = gadget.database.n
    return gadget.lp.b + laplace_sample(1.0 / epsilon, rng, size=n)


def _objective_private(gadget, rng, epsilon, delta):
    if gadget.kind != "objective":
        raise ValueError("objective-private only applies to the objective gadget")
    return solve_objective_private(gadget.lp, 1.0, epsilon, delta, rng, append_simplex=False).x


ATTACK_SOLVERS = {"exact": _exact, "scalar-laplace": _scalar_laplace,
                  "objective-private": _objective_private}


def run_attack_experiment(kind, solver, n, trials, seed, epsilon=1.0, delta=1e-6, beta=0.1):
    """Sample databases, solve their gadgets, round, and record normalized errors.

    Returns a JSON-ready dict with per-trial normalized l1 and Hamming errors,
    their mean and quantiles, and the analytic lower bound that applies to an
    ``(epsilon, delta)``-private solver. The bound is reported for comparison
    only; an empirical run cannot certify a privacy violation.
    """
    if kind not in GADGETS:
        raise ValueError(f"unknown gadget {kind!r}")
    if solver not in ATTACK_SOLVERS:
        raise ValueError(f"unknown solver {solver!r}")
    if kind == "objective" and solver == "scalar-laplace" or \
            kind != "objective" and solver == "objective-private" or \
            kind != "scalar" and solver == "scalar-laplace":
        raise ValueError(f"solver {solver!r} is incompatible with the {kind} gadget")
    balanced = kind != "scalar"
    if balanced and n % 2:
        raise ValueError("balanced gadgets need even n")
    report = {"gadget": kind, "solver": solver, "n": n, "trials": trials,
              "epsilon": epsilon, "delta": delta, "beta": beta,
              "bound": applicable_bound(kind, epsilon, delta, beta),
              "l1_errors": [], "hamming_errors": []}
    if trials == 0:
        return report
    run = ATTACK_SOLVERS[solver]
    for rng in spawn_generators(seed, trials):
        D = BitDatabase.random(n, rng, balanced=balanced)
        gadget = GADGET_BUILDERS[kind](D)
        x = np.asarray(run(gadget, rng, epsilon, delta), dtype=np.float64)
        report["l1_errors"].append(float(np.abs(np.clip(x, 0, 1) - D.bits).sum() / n))
        recon = reconstruct_by_rounding(x)
        report["hamming_errors"].append(float(np.count_nonzero(recon.bits != D.bits) / n))
    ham = np.asarray(report["hamming_errors"])
    report.update(
        mean_hamming=float(ham.mean()),
        quantiles={str(q): float(np.quantile(ham, q)) for q in (0.1, 0.5, 0.9)},
        mean_l1=float(np.mean(report["l1_errors"])),
        perfect_rate=float(np.mean(ham == 0)),
    )
    return report


def neighbor_diff(gadget_a, gadget_b):
    """Positions where two gadgets' canonical LPs differ.

    Returns ``(rows, objective)``: the canonical rows whose coefficients or
    right-hand sides differ, and the objective coordinates that differ.
    """
    lp_a, _ = canonicalize(gadget_a.lp)
    lp_b, _ = canonicalize(gadget_b.lp)
    rows = np.flatnonzero(np.any(lp_a.A != lp_b.A, axis=1) | (lp_a.b != lp_b.b))
    obj = np.flatnonzero(gadget_a.lp.c != gadget_b.lp.c)
    return rows, obj
