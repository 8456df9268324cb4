"""LP representations, feasibility-form conversions and the search over OPT.

Every solver in the package consumes a :class:`FeasibilityLp`: find ``x`` in a
public region ``K`` with ``A x <= b``. :func:`canonicalize` produces one from a
general :class:`LpInstance` with mixed constraint senses.
"""

from dataclasses import dataclass, field
from enum import Enum
import math

import numpy as np

from ._validation import check_matrix, check_vector, check_positive


class Sense(str, Enum):
    LE = "LE"
    GE = "GE"
    EQ = "EQ"


def _frozen(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class PublicRegion:
    """Data-independent part of the feasible set.

    ``kind`` is one of ``"nonnegative"``, ``"simplex"`` or ``"objective_slice"``;
    the slice is ``{x >= 0 : c @ x == opt}``.
    """

    kind: str = "nonnegative"
    c: np.ndarray = None
    opt: float = None

    KINDS = ("nonnegative", "simplex", "objective_slice")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.kind == "objective_slice":
            if self.c is None or self.opt is None:
                raise ValueError("objective_slice needs c and opt")
            c = check_vector(self.c, name="c")
            if not np.any(c != 0):
                raise ValueError("objective_slice requires a nonzero c")
            if not math.isfinite(self.opt):
                raise ValueError("objective_slice requires a finite opt")
            object.__setattr__(self, "c", _frozen(c))
            object.__setattr__(self, "opt", float(self.opt))

    @classmethod
    def nonnegative(cls):
        return cls("nonnegative")

    @classmethod
    def simplex(cls):
        return cls("simplex")

    @classmethod
    def objective_slice(cls, c, opt):
        return cls("objective_slice", c, opt)

    def vertices(self, d):
        """Extreme points of the region as rows of a ``(k, d)`` array.

        For the slice these are ``(opt / c_j) e_j``, which requires ``c > 0``
        and ``opt >= 0``.
        """
        if self.kind == "simplex":
            return np.eye(d)
        if self.kind == "objective_slice":
            if self.c.shape[0] != d:
                raise ValueError("region dimension does not match the LP")
            if np.any(self.c <= 0) or self.opt < 0:
                raise ValueError("slice vertices need positive costs and opt >= 0")
            return np.diag(self.opt / self.c)
        raise ValueError("the nonnegative orthant has no bounded vertex set")

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=np.float64)
        if np.any(x < -tol):
            return False
        if self.kind == "simplex":
            return abs(x.sum() - 1.0) <= tol
        if self.kind == "objective_slice":
            scale = max(1.0, abs(self.opt))
            return abs(self.c @ x - self.opt) <= tol * scale
        return True

    def to_dict(self):
        out = {"kind": self.kind}
        if self.kind == "objective_slice":
            out.update(c=self.c.tolist(), opt=self.opt)
        return out

    @classmethod
    def from_dict(cls, data):
        if data is None:
            return cls()
        return cls(data["kind"], data.get("c"), data.get("opt"))


@dataclass(frozen=True, eq=False)
class SensitivityModel:
    """Which coefficients may differ on neighboring instances, and by how much."""

    kind: str
    delta_inf: float = None
    delta_1: float = None

    LOW = {
        "low_scalar": "delta_inf",
        "low_row": "delta_inf",
        "low_column": "delta_1",
        "low_objective": "delta_1",
    }
    HIGH = ("high_constraint", "high_scalar", "high_column", "high_objective")

    def __post_init__(self):
        if self.kind in self.HIGH:
            if self.delta_inf is not None or self.delta_1 is not None:
                raise ValueError(f"{self.kind} carries no sensitivity value")
            return
        if self.kind not in self.LOW:
            raise ValueError(f"unknown sensitivity kind {self.kind!r}")
        attr = self.LOW[self.kind]
        value = getattr(self, attr)
        if value is None or not math.isfinite(value) or value < 0:
            raise ValueError(f"{self.kind} needs a nonnegative finite {attr}")
        other = "delta_1" if attr == "delta_inf" else "delta_inf"
        if getattr(self, other) is not None:
            raise ValueError(f"{self.kind} only uses {attr}")

    @property
    def value(self):
        """The per-record sensitivity this model carries (``None`` when high)."""
        if self.kind in self.HIGH:
            return None
        return getattr(self, self.LOW[self.kind])

    def to_dict(self):
        out = {"kind": self.kind}
        if self.delta_inf is not None:
            out["delta_inf"] = self.delta_inf
        if self.delta_1 is not None:
            out["delta_1"] = self.delta_1
        return out

    @classmethod
    def from_dict(cls, data):
        return cls(data["kind"], data.get("delta_inf"), data.get("delta_1"))


@dataclass(frozen=True, eq=False)
class LpInstance:
    """A general LP ``max c @ x`` subject to mixed-sense rows and ``x >= var_lower``."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray = None
    senses: tuple = None
    var_lower: np.ndarray = None
    sensitivity: SensitivityModel = None
    region: PublicRegion = None

    def __post_init__(self):
        A = check_matrix(self.A)
        m, d = A.shape
        b = check_vector(self.b, m, name="b")
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "b", _frozen(b))
        if self.c is not None:
            object.__setattr__(self, "c", _frozen(check_vector(self.c, d, name="c")))
        senses = self.senses if self.senses is not None else ("LE",) * m
        senses = tuple(Sense(s) for s in senses)
        if len(senses) != m:
            raise ValueError(f"got {len(senses)} senses for {m} rows")
        object.__setattr__(self, "senses", senses)
        lower = np.zeros(d) if self.var_lower is None else self.var_lower
        object.__setattr__(self, "var_lower", _frozen(check_vector(lower, d, name="var_lower")))

    @property
    def shape(self):
        return self.A.shape

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def d(self):
        return self.A.shape[1]


@dataclass(frozen=True, eq=False)
class FeasibilityLp:
    """Find ``x`` in ``region`` with ``A @ x <= b``."""

    A: np.ndarray
    b: np.ndarray
    region: PublicRegion = field(default_factory=PublicRegion)

    def __post_init__(self):
        A = check_matrix(self.A)
        b = check_vector(self.b, A.shape[0], name="b")
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "b", _frozen(b))
        if self.region.kind == "objective_slice" and self.region.c.shape[0] != A.shape[1]:
            raise ValueError("region c has the wrong length")

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def d(self):
        return self.A.shape[1]

    def slack(self, x):
        return self.A @ np.asarray(x, dtype=np.float64) - self.b


@dataclass(frozen=True, eq=False)
class Solution:
    """A candidate point with its per-constraint slack ``A_i x - b_i``."""

    x: np.ndarray
    slack: np.ndarray
    objective_value: float = None
    info: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_point(cls, lp, x, objective=None, **info):
        x = np.asarray(x, dtype=np.float64)
        value = None if objective is None else float(objective @ x)
        return cls(_frozen(x), _frozen(lp.slack(x)), value, info)

    @property
    def max_slack(self):
        return float(self.slack.max())

    def violated_beyond(self, alpha):
        return np.flatnonzero(self.slack > alpha)


def canonicalize(instance):
    """Rewrite every row as ``<=``.

    GE rows are negated and EQ rows become a ``<=`` / ``>=`` pair. Positive
    variable lower bounds turn into extra rows ``-x_j <= -l_j``.

    Returns ``(lp, provenance)`` where ``provenance[k] = (source, sign)``: the
    output row ``k`` is ``sign`` times input row ``source``; lower-bound rows use
    ``source = -(j + 1)``.
    """
    if np.any(instance.var_lower < 0):
        raise ValueError("negative variable lower bounds are not supported")
    rows, rhs, provenance = [], [], []
    for i, sense in enumerate(instance.senses):
        a, bi = instance.A[i], instance.b[i]
        if sense in (Sense.LE, Sense.EQ):
            rows.append(a)
            rhs.append(bi)
            provenance.append((i, 1))
        if sense in (Sense.GE, Sense.EQ):
            rows.append(-a)
            rhs.append(-bi)
            provenance.append((i, -1))
    d = instance.d
    for j in np.flatnonzero(instance.var_lower > 0):
        row = np.zeros(d)
        row[j] = -1.0
        rows.append(row)
        rhs.append(-instance.var_lower[j])
        provenance.append((-(int(j) + 1), 1))
    region = instance.region if instance.region is not None else PublicRegion()
    lp = FeasibilityLp(np.vstack(rows), np.asarray(rhs), region)
    return lp, tuple(provenance)


def rescale_to_simplex(lp, L):
    """Divide ``b`` by ``L`` so a feasible point of l1 norm ``L`` becomes a distribution.

    A point ``x`` with slack at most ``alpha`` for the result maps back to
    ``L * x`` with slack at most ``L * alpha`` for ``lp``.
    """
    L = check_positive(L, "L")
    return FeasibilityLp(lp.A, lp.b / L, PublicRegion.simplex())


def width(lp, vertex_set):
    """``max ||A v - b||_inf`` over the supplied extreme points of the region."""
    V = np.atleast_2d(np.asarray(vertex_set, dtype=np.float64))
    if V.size == 0:
        raise ValueError("vertex set is empty")
    if V.shape[1] != lp.d:
        raise ValueError("vertex dimension does not match the LP")
    return float(np.abs(V @ lp.A.T - lp.b).max())


def objective_to_feasibility(instance, opt_guess):
    """Replace the objective with the public slice ``{x >= 0 : c @ x = opt_guess}``."""
    if instance.c is None:
        raise ValueError("instance has no objective")
    lp, _ = canonicalize(instance)
    return FeasibilityLp(lp.A, lp.b, PublicRegion.objective_slice(instance.c, opt_guess))


def max_violation(lp, x):
    """Index and value of the largest ``A_i x - b_i``; ties go to the lowest index."""
    slack = lp.slack(x)
    i = int(np.argmax(slack))
    return i, float(slack[i])


def search_calls(lo, hi, tol):
    """Number of feasibility calls :func:`binary_search_opt` makes."""
    if hi == lo:
        return 1
    return max(1, math.ceil(math.log2((hi - lo) / tol)))


def binary_search_opt(instance, feas_solver, lo, hi, tol, budget):
    """Search for the largest objective value the feasibility solver accepts.

    ``feas_solver(lp, epsilon, delta)`` returns a :class:`Solution` or ``None``
    when it declares the slice infeasible. The ``(epsilon, delta)`` budget is
    split evenly over the calls by basic composition, and each call is charged
    to ``budget``.

    Returns ``(opt_estimate, solution)``.
    """
    if not lo <= hi:
        raise ValueError("need lo <= hi")
    check_positive(tol, "tol")
    k = search_calls(lo, hi, tol)
    budget.plan(k, composition="basic")
    best = None
    for _ in range(k):
        guess = (lo + hi) / 2
        budget.charge("feasibility", budget.epsilon_prime)
        sol = feas_solver(objective_to_feasibility(instance, guess),
                          budget.epsilon_prime, budget.delta_prime)
        if sol is not None:
            best = (guess, sol)
            lo = guess
        else:
            hi = guess
    if best is None:
        raise ValueError("no guess in [lo, hi] was declared feasible")
    return best
