"""Acceptance checks grouped into suites.

Each ``criterion_*`` function runs one check on a fixed seed list and returns
a :class:`CriterionResult`; :func:`run_suite` groups them for the ``verify``
command. Statistical thresholds are fractions of the trials run, so a shorter
seed list gives a quicker, noisier check.
"""

from dataclasses import dataclass, field
import math
import time

import numpy as np
from scipy import stats

from . import attacks
from .constraint import (ConstraintPrivateParams, SetCoverOracle, VertexArgminOracle,
                         setcover_density, setcover_lp, solve_constraint_private)
from .lowsens import (LowSensParams, VacuousBoundError, accuracy_bound, bound_residual,
                      pst_bound, solve_column_private, solve_row_private, solve_scalar_private)
from .lp import LpInstance, width
from .mechanisms import (QualityScore, exponential_mechanism,
                         exponential_mechanism_probabilities, laplace_cdf, laplace_sample)
from .mw import DenseMultiplicativeWeights, MultiplicativeWeights, regret_audit_dmw, regret_audit_mw
from .objective import objective_accuracy_bound, solve_exact_lp, solve_objective_private
from .verification import (DEFAULT_SEEDS, adjacent_measure_gap, map_trials,
                           projection_sensitivity_stress, random_cover, random_simplex_lp,
                           setcover_opt)

SOLVERS = {"scalar": solve_scalar_private, "row": solve_row_private,
           "column": solve_column_private}

# desk-scale settings shared by the checks and the tests
COVER_M, COVER_D, COVER_P = 40, 8, 0.5
COVER_ALPHA, COVER_DENSITY, COVER_EPS, COVER_DELTA = 0.5, 10, 5.0, 1e-6
OBJ_D, OBJ_M, OBJ_DELTA1, OBJ_EPS, OBJ_DELTA, OBJ_BETA = 5, 8, 1e-3, 1.0, 1e-6, 0.1
ACC_D, ACC_M, ACC_SENS, ACC_EPS, ACC_DELTA, ACC_BETA = 6, 12, 1e-5, 2.0, 1e-6, 0.1
NOISELESS_ALPHA = 0.4
COMPOSITION_RTOL = 1e-12


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    runtime: float = 0.0

    def line(self):
        verdict = "PASS" if self.passed else "FAIL"
        return f"[{verdict}] criterion {self.number}: {self.name} ({self.runtime:.1f}s)"

    def to_dict(self, include_runtime=False):
        out = {"criterion": self.number, "name": self.name, "passed": self.passed,
               "detail": self.detail}
        if include_runtime:
            out["runtime"] = self.runtime
        return out


def _timed(number, name, body):
    start = time.perf_counter()
    passed, detail = body()
    return CriterionResult(number, name, bool(passed), detail, time.perf_counter() - start)


# 1: mechanisms

def criterion_mechanisms(seeds=DEFAULT_SEEDS, n_samples=100_000):
    def body():
        rng = np.random.default_rng(seeds[0])
        ks = {}
        for scale in (0.5, 1.0, 3.0):
            draws = laplace_sample(scale, rng, size=n_samples)
            ks[str(scale)] = float(stats.kstest(draws, lambda x, s=scale: laplace_cdf(x, s)).statistic)
        tv = {}
        for size in range(2, 9):
            q = QualityScore(rng.uniform(0.0, 1.0, size), 1.0)
            eps = float(rng.uniform(0.5, 8.0))
            draws = exponential_mechanism(q, eps, rng, size=n_samples)
            freq = np.bincount(draws, minlength=size) / n_samples
            p = exponential_mechanism_probabilities(q, eps)
            tv[str(size)] = float(0.5 * np.abs(freq - p).sum())
        ok = max(ks.values()) < 0.01 and max(tv.values()) < 0.02
        return ok, {"ks": ks, "tv": tv, "ks_limit": 0.01, "tv_limit": 0.02}
    return _timed(1, "mechanism fidelity", body)


# 2: projection sensitivity

PROJECTION_RTOL = 1e-12


def criterion_projection(seeds=DEFAULT_SEEDS, trials=1000, k_max=50):
    def body():
        detail = {}
        ok = True
        for i, s in enumerate((2, 5, 10)):
            gap = projection_sensitivity_stress(trials, k_max, s, np.random.default_rng(seeds[i]))
            limit = 2.0 / s
            detail[str(s)] = {"max_gap": gap, "limit": limit}
            ok &= gap <= limit * (1 + PROJECTION_RTOL)
        hand = adjacent_measure_gap(np.ones(2), 1.0, 2)
        detail["hand_example_gap"] = hand
        ok &= abs(hand - 2.0 / 3.0) < 1e-12
        return ok, detail
    return _timed(2, "projection sensitivity", body)


# 3: regret audits

def _regret_trial(seed, T=200):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 9))
    eta = float(rng.uniform(0.02, 0.5))
    # a per-action drift makes some actions clearly better than others
    drift = rng.uniform(-0.5, 0.5, size=k)
    L = np.clip(rng.uniform(-1, 1, size=(T, k)) * 0.5 + drift, -1, 1)
    mw = MultiplicativeWeights(k, eta)
    dists = []
    for t in range(T):
        dists.append(mw.distribution)
        mw.update(L[t])
    r_mw = regret_audit_mw(L, dists, eta)
    s = int(rng.integers(1, k + 1))
    dmw = DenseMultiplicativeWeights(k, eta, s)
    proj = []
    for t in range(T):
        proj.append(dmw.projection)
        dmw.update(L[t])
    r_dmw = regret_audit_dmw(L, proj, eta, s, exhaustive_limit=math.inf)
    return {"k": k, "s": s, "eta": eta, "mw_slack": r_mw.slack, "dmw_slack": r_dmw.slack,
            "dmw_comparators": r_dmw.n_comparators, "mw_ok": r_mw.holds, "dmw_ok": r_dmw.holds}


def criterion_regret(seeds=DEFAULT_SEEDS[:100], workers=1):
    def body():
        rows = map_trials(_regret_trial, seeds, workers)
        mw_fail = sum(not r["mw_ok"] for r in rows)
        dmw_fail = sum(not r["dmw_ok"] for r in rows)
        return mw_fail == 0 and dmw_fail == 0, {
            "trials": len(rows), "mw_failures": mw_fail, "dmw_failures": dmw_fail,
            "min_mw_slack": min(r["mw_slack"] for r in rows),
            "min_dmw_slack": min(r["dmw_slack"] for r in rows)}
    return _timed(3, "regret audits", body)


# 4: noiseless limit

def _noiseless_trial(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 11))
    m = int(rng.integers(1, 51))
    lp, _ = random_simplex_lp(m, d, rng)
    out = {}
    for kind, solve in SOLVERS.items():
        params = LowSensParams(kind, 1.0, 1e-6, NOISELESS_ALPHA, 0.0)
        sol = solve(lp, params, rng)
        dv = sol.info["derived"]
        bound = pst_bound(d, dv["T"], dv["eta"], dv["rho"])
        out[kind] = {"max_slack": sol.max_slack, "bound": bound, "ok": sol.max_slack <= bound}
    return out


def criterion_noiseless(seeds=DEFAULT_SEEDS[:100], workers=1):
    def body():
        rows = map_trials(_noiseless_trial, seeds, workers)
        fails = {k: sum(not r[k]["ok"] for r in rows) for k in SOLVERS}
        worst = {k: max(r[k]["max_slack"] / r[k]["bound"] for r in rows) for k in SOLVERS}
        return sum(fails.values()) == 0, {"trials": len(rows), "failures": fails,
                                          "worst_slack_over_bound": worst}
    return _timed(4, "noiseless-limit solver equivalence", body)


# 5: constraint-private set cover

def covering_instance(rng, m=COVER_M, d=COVER_D, p=COVER_P):
    cover = random_cover(m, d, rng, p)
    costs = rng.uniform(1.0, 2.0, size=d)
    opt = setcover_opt(cover, costs)
    lp = setcover_lp(cover, costs, opt)
    return lp, cover, costs, opt


def _cover_trial(seed):
    rng = np.random.default_rng(seed)
    lp, cover, costs, opt = covering_instance(rng)
    rho = width(lp, lp.region.vertices(lp.d))
    params = ConstraintPrivateParams(COVER_EPS, COVER_DELTA, COVER_ALPHA, COVER_DENSITY, rho)
    exact = solve_constraint_private(lp, VertexArgminOracle(), params, rng)
    private = solve_constraint_private(lp, SetCoverOracle(), params, rng)
    return {
        "opt": opt, "rho": rho, "T": params.iterations(lp.m),
        "theory_density": setcover_density(opt, costs, lp.m, COVER_EPS, COVER_DELTA,
                                           COVER_ALPHA, 0.1),
        "exact_violations": int(exact.violated_beyond(COVER_ALPHA).size),
        "private_violations": int(private.violated_beyond(COVER_ALPHA).size),
    }


def criterion_constraint_private(seeds=DEFAULT_SEEDS[:100], workers=1, threshold=0.95):
    def body():
        rows = map_trials(_cover_trial, seeds, workers)
        limit = COVER_DENSITY - 1
        exact_fail = sum(r["exact_violations"] > limit for r in rows)
        private_ok = sum(r["private_violations"] <= limit for r in rows)
        rate = private_ok / len(rows)
        return exact_fail == 0 and rate >= threshold, {
            "trials": len(rows), "density": COVER_DENSITY, "alpha": COVER_ALPHA,
            "exact_failures": exact_fail, "private_success_rate": rate, "threshold": threshold,
            "max_exact_violations": max(r["exact_violations"] for r in rows),
            "max_private_violations": max(r["private_violations"] for r in rows),
            "min_theory_density": min(r["theory_density"] for r in rows)}
    return _timed(5, "constraint-private end-to-end", body)


# 6: objective-private

def _objective_trial(seed):
    rng = np.random.default_rng(seed)
    lp, _ = random_simplex_lp(OBJ_M, OBJ_D, rng)
    inst = LpInstance(lp.A, lp.b, rng.uniform(0.0, 1.0, OBJ_D))
    best = solve_exact_lp(inst)
    sol = solve_objective_private(inst, OBJ_DELTA1, OBJ_EPS, OBJ_DELTA, rng)
    return {"max_slack": sol.max_slack, "simplex_error": abs(sol.x.sum() - 1.0),
            "gap": best.objective_value - sol.objective_value}


def criterion_objective_private(seeds=DEFAULT_SEEDS[:200], workers=1, threshold=0.85):
    def body():
        rows = map_trials(_objective_trial, seeds, workers)
        alpha = objective_accuracy_bound(OBJ_D, OBJ_DELTA1, OBJ_EPS, OBJ_DELTA)
        feasible = int(sum(r["max_slack"] <= 1e-9 and r["simplex_error"] <= 1e-9 for r in rows))
        rate = sum(r["gap"] <= alpha for r in rows) / len(rows)
        return feasible == len(rows) and rate >= threshold, {
            "trials": len(rows), "feasible": feasible, "alpha": alpha,
            "gap_success_rate": rate, "threshold": threshold,
            "max_gap": max(r["gap"] for r in rows)}
    return _timed(6, "objective-private accuracy", body)


# 7: accuracy formulas

FORMULA_GRID = [
    (kind, d, m, eps, sens)
    for kind in ("scalar", "row", "column")
    for d in (2, 6, 50)
    for m in (3, 12, 1000)
    for eps in (0.5, 2.0)
    for sens in (1e-7, 1e-5)
]


def _accuracy_trial(seed):
    rng = np.random.default_rng(seed)
    lp, _ = random_simplex_lp(ACC_M, ACC_D, rng)
    out = {}
    for kind, solve in SOLVERS.items():
        rho = float(np.abs(lp.A).max()) if kind == "scalar" else 1.0
        alpha = accuracy_bound(kind, ACC_D, ACC_M, ACC_EPS, ACC_DELTA, ACC_BETA, ACC_SENS, rho)
        sol = solve(lp, LowSensParams(kind, ACC_EPS, ACC_DELTA, alpha, ACC_SENS, ACC_BETA), rng)
        out[kind] = {"alpha": alpha, "max_slack": sol.max_slack, "ok": sol.max_slack <= alpha}
    return out


def criterion_accuracy(seeds=DEFAULT_SEEDS[:100], workers=1, threshold=0.9):
    def body():
        worst_rel, vacuous, checked = 0.0, 0, 0
        for kind, d, m, eps, sens in FORMULA_GRID:
            try:
                alpha = accuracy_bound(kind, d, m, eps, ACC_DELTA, ACC_BETA, sens)
            except VacuousBoundError:
                vacuous += 1
                continue
            rhs = alpha - bound_residual(kind, alpha, d, m, eps, ACC_DELTA, ACC_BETA, sens)
            # the fixed point must satisfy alpha >= rhs up to relative 1e-6
            worst_rel = max(worst_rel, (rhs - alpha) / alpha)
            checked += 1
        formulas_ok = worst_rel <= 1e-6 and checked > 0
        rows = map_trials(_accuracy_trial, seeds, workers)
        rates = {k: sum(r[k]["ok"] for r in rows) / len(rows) for k in SOLVERS}
        ok = formulas_ok and min(rates.values()) >= threshold
        return ok, {"formula_points": checked, "vacuous_points": vacuous,
                    "worst_relative_violation": worst_rel, "trials": len(rows),
                    "success_rates": rates, "alphas": {k: rows[0][k]["alpha"] for k in SOLVERS},
                    "threshold": threshold}
    return _timed(7, "accuracy formulas", body)


# 8: attack lab

def _neighbor_checks(n, rng):
    """Diff gadget LPs over every flip (scalar) or swap (balanced gadgets)."""
    bad = 0
    D = attacks.BitDatabase.random(n, rng)
    base = attacks.gadget_scalar(D)
    for i in range(n):
        rows, obj = attacks.neighbor_diff(base, attacks.gadget_scalar(D.flip(i)))
        bad += not (rows.tolist() == [2 * i, 2 * i + 1] and obj.size == 0)
    B = attacks.BitDatabase.random(n, rng, balanced=True)
    ones, zeros = np.flatnonzero(B.bits == 1), np.flatnonzero(B.bits == 0)
    g_obj, g_con = attacks.gadget_objective(B), attacks.gadget_constraint(B)
    for i in ones:
        for j in zeros:
            nb = B.swap(i, j)
            rows, obj = attacks.neighbor_diff(g_obj, attacks.gadget_objective(nb))
            bad += not (rows.size == 0 and sorted(obj.tolist()) == sorted([i, j]))
            rows, obj = attacks.neighbor_diff(g_con, attacks.gadget_constraint(nb))
            # the private equality canonicalizes into rows 0 and 1
            bad += not (rows.tolist() == [0, 1] and obj.size == 0)
    return bad


def criterion_attacks(seeds=DEFAULT_SEEDS[:100], n=50):
    def body():
        imperfect = {}
        for kind in attacks.GADGETS:
            rep = attacks.run_attack_experiment(kind, "exact", n, len(seeds), seeds[0])
            imperfect[kind] = sum(h > 0 for h in rep["hamming_errors"])
        bound = attacks.reconstruction_bound(0.0, 0.0, 0.0)
        bad_diffs = _neighbor_checks(n, np.random.default_rng(seeds[0]))
        ok = sum(imperfect.values()) == 0 and bound == 0.25 and bad_diffs == 0
        return ok, {"n": n, "trials": len(seeds), "imperfect_reconstructions": imperfect,
                    "bound_000": bound, "bad_neighbor_diffs": bad_diffs}
    return _timed(8, "attack lab", body)


# 9: budget accounting

def composition_identity_error(k, delta, epsilon_prime, epsilon):
    return abs(k * 8.0 * math.log(1.0 / delta) * epsilon_prime ** 2 - epsilon ** 2) / epsilon ** 2


def criterion_budget(seeds=DEFAULT_SEEDS[:5]):
    def body():
        errors, over = [], 0
        for seed in seeds:
            rng = np.random.default_rng(seed)
            eps = float(rng.uniform(0.3, 5.0))
            lp, _ = random_simplex_lp(10, 5, rng)
            runs = []
            for kind, solve in SOLVERS.items():
                runs.append(solve(lp, LowSensParams(kind, eps, 1e-6, 0.6, 1e-4), rng))
            inst = LpInstance(lp.A, lp.b, rng.uniform(0, 1, 5))
            runs.append(solve_objective_private(inst, 1e-3, eps, 1e-6, rng))
            clp, _, _, _ = covering_instance(rng, m=12, d=4)
            rho = width(clp, clp.region.vertices(clp.d))
            runs.append(solve_constraint_private(
                clp, SetCoverOracle(), ConstraintPrivateParams(eps, 1e-6, 2.0, 3, rho), rng))
            for sol in runs:
                dv, audit = sol.info["derived"], sol.info["budget"]
                errors.append(composition_identity_error(dv["k"], 1e-6, dv["epsilon_prime"], eps))
                over += audit["n_charges"] > audit["planned_k"]
        worst = max(errors)
        return worst <= COMPOSITION_RTOL and over == 0, {
            "runs": len(errors), "worst_relative_error": worst, "tolerance": COMPOSITION_RTOL,
            "overdrawn_runs": over}
    return _timed(9, "budget accounting", body)


SUITES = {
    "mechanisms": (criterion_mechanisms,),
    "projection": (criterion_projection,),
    "regret": (criterion_regret,),
    "solvers": (criterion_noiseless, criterion_constraint_private, criterion_objective_private,
                criterion_accuracy, criterion_budget),
    "attacks": (criterion_attacks,),
}

_SEED_NEEDS = {criterion_regret: 100, criterion_noiseless: 100,
               criterion_constraint_private: 100, criterion_objective_private: 200,
               criterion_accuracy: 100, criterion_attacks: 100, criterion_budget: 5}


def run_suite(name, seeds=DEFAULT_SEEDS, workers=1):
    """Run every check of a suite; each uses at most as many seeds as it needs."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    results = []
    for fn in SUITES[name]:
        kwargs = {"seeds": tuple(seeds[:_SEED_NEEDS.get(fn, len(seeds))])}
        if "workers" in fn.__code__.co_varnames:
            kwargs["workers"] = workers
        results.append(fn(**kwargs))
    return results
