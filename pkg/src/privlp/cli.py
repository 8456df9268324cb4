"""Command-line entry point.

Every command takes an explicit ``--seed``; reports are canonical JSON (sorted
keys, no timestamps or timings) so identical invocations give identical bytes.
"""

import argparse
import json
import sys

import numpy as np

from . import attacks, suites
from ._validation import spawn_generators
from .constraint import (ConstraintPrivateParams, SetCoverOracle, VertexArgminOracle,
                         solve_constraint_private)
from .io import TraceWriter, dumps_report, load_instance
from .lowsens import (LowSensParams, VacuousBoundError, accuracy_bound, solve_column_private,
                      solve_row_private, solve_scalar_private)
from .lp import FeasibilityLp, PublicRegion, canonicalize, width
from .objective import (objective_accuracy_bound, objective_noise_scale, solve_exact_lp,
                        solve_objective_private)
from .verification import DEFAULT_SEEDS, check_feasibility, load_seeds

REQUIRED_MODEL = {
    "solve-constraint": "high_constraint",
    "solve-scalar": "low_scalar",
    "solve-row": "low_row",
    "solve-column": "low_column",
    "solve-objective": "low_objective",
}


class UsageError(Exception):
    """Bad input detected before any computation."""


def _check_model(command, instance):
    need = REQUIRED_MODEL[command]
    model = instance.sensitivity
    if model is None:
        raise UsageError(f"instance has no sensitivity model; {command} needs {need!r}")
    if model.kind != need:
        raise UsageError(
            f"instance declares sensitivity {model.kind!r} but {command} is the solver for "
            f"{need!r}; running it would apply the wrong privacy model")


def _slack_report(lp, x, alpha):
    rep = check_feasibility(lp, x, np.inf if alpha is None else alpha)
    out = {"slack": rep.slack, "max_slack": rep.max_slack}
    if alpha is not None:
        out["violated_beyond_alpha"] = np.flatnonzero(rep.slack > alpha)
    return out


def _trace(args):
    return TraceWriter(args.trace) if args.trace else None


def _common_params(args):
    return {"epsilon": args.epsilon, "delta": args.delta}


def _cmd_solve_constraint(args):
    instance = load_instance(args.instance)
    _check_model(args.command, instance)
    lp, _ = canonicalize(instance)
    if lp.region.kind == "nonnegative":
        raise UsageError("solve-constraint needs a bounded public region (simplex or objective_slice)")
    rho = args.rho if args.rho is not None else width(lp, lp.region.vertices(lp.d))
    params = ConstraintPrivateParams(args.epsilon, args.delta, args.alpha, args.density, rho,
                                     args.beta)
    params.eta(lp.m)
    if args.density > lp.m:
        raise UsageError(f"density {args.density} exceeds the {lp.m} constraints")
    oracle = SetCoverOracle() if args.oracle == "setcover" else VertexArgminOracle()
    trace = _trace(args)
    try:
        sol = solve_constraint_private(lp, oracle, params, args.seed, trace=trace)
    finally:
        if trace is not None:
            trace.close()
    info = sol.info
    return {
        "parameters": dict(_common_params(args), alpha=args.alpha, beta=args.beta,
                           density=args.density, rho=rho, oracle=args.oracle),
        "derived": info["derived"],
        "oracle_private": info["oracle_private"],
        "solution": {"x": sol.x},
        "slack_report": _slack_report(lp, sol.x, args.alpha),
        "budget": info["budget"],
    }


_LOW = {"solve-scalar": ("scalar", solve_scalar_private),
        "solve-row": ("row", solve_row_private),
        "solve-column": ("column", solve_column_private)}


def _simplex_lp(instance):
    if instance.region is not None and instance.region.kind != "simplex":
        raise UsageError("low-sensitivity solvers run over the probability simplex; "
                         "set region kind 'simplex' or omit it")
    lp, _ = canonicalize(instance)
    return FeasibilityLp(lp.A, lp.b, PublicRegion.simplex())


def _cmd_solve_low(args):
    kind, solve = _LOW[args.command]
    instance = load_instance(args.instance)
    _check_model(args.command, instance)
    lp = _simplex_lp(instance)
    sens = instance.sensitivity.value
    rho = float(np.abs(lp.A).max()) if kind == "scalar" else 1.0
    bound = None
    try:
        bound = accuracy_bound(kind, lp.d, lp.m, args.epsilon, args.delta, args.beta, sens, rho)
    except VacuousBoundError:
        pass
    alpha = args.alpha if args.alpha is not None else bound
    if alpha is None:
        raise UsageError(f"the {kind} accuracy bound is vacuous here; pass --alpha explicitly")
    if alpha == 0:
        raise UsageError("sensitivity is zero, so the bound is 0; pass --alpha explicitly")
    params = LowSensParams(kind, args.epsilon, args.delta, alpha, sens, args.beta)
    extra = {"noise": args.noise} if kind == "column" else {}
    report = {
        "parameters": dict(_common_params(args), alpha=alpha, beta=args.beta, sensitivity=sens,
                           **extra),
        "derived": {"alpha_bound": bound},
    }
    if args.trials:
        if args.trace:
            raise UsageError("--trace records a single run; drop it or --trials")
        rows = []
        for rng in spawn_generators(args.seed, args.trials):
            sol = solve(lp, params, rng, **extra)
            rows.append(sol.max_slack)
        report["derived"].update(sol.info["derived"])
        report["trials"] = {"max_slack": rows,
                            "success_rate": float(np.mean(np.asarray(rows) <= alpha))}
        return report
    trace = _trace(args)
    try:
        sol = solve(lp, params, args.seed, trace=trace, **extra)
    finally:
        if trace is not None:
            trace.close()
    report["derived"].update(sol.info["derived"])
    report.update(solution={"x": sol.x}, slack_report=_slack_report(lp, sol.x, alpha),
                  budget=sol.info["budget"])
    return report


def _cmd_solve_objective(args):
    instance = load_instance(args.instance)
    _check_model(args.command, instance)
    if instance.c is None:
        raise UsageError("solve-objective needs an objective c in the instance")
    if args.trace:
        raise UsageError("the objective-private solver has no iterative trace")
    delta_1 = instance.sensitivity.value
    append = not args.no_simplex
    best = solve_exact_lp(instance, append_simplex=append)
    bound = objective_accuracy_bound(instance.d, delta_1, args.epsilon, args.delta)
    report = {
        "parameters": dict(_common_params(args), sensitivity=delta_1, simplex=append),
        "derived": {"k": instance.d, "alpha_bound": bound,
                    "noise_scale": objective_noise_scale(instance.d, delta_1, args.epsilon,
                                                         args.delta)},
        "true_optimum": best.objective_value,
    }
    if args.trials:
        gaps = []
        for rng in spawn_generators(args.seed, args.trials):
            sol = solve_objective_private(instance, delta_1, args.epsilon, args.delta, rng, append)
            gaps.append(best.objective_value - sol.objective_value)
        report["derived"]["epsilon_prime"] = sol.info["derived"]["epsilon_prime"]
        report["trials"] = {"objective_gap": gaps,
                            "success_rate": float(np.mean(np.asarray(gaps) <= bound))}
        return report
    sol = solve_objective_private(instance, delta_1, args.epsilon, args.delta, args.seed, append)
    lp, _ = canonicalize(instance)
    report["derived"]["epsilon_prime"] = sol.info["derived"]["epsilon_prime"]
    report.update(
        solution={"x": sol.x, "c_hat": sol.info["c_hat"], "objective": sol.objective_value},
        objective_gap=best.objective_value - sol.objective_value,
        slack_report=_slack_report(lp, sol.x, 0.0),
        budget=sol.info["budget"])
    return report


def _cmd_attack(args):
    balanced = args.gadget != "scalar"
    if balanced and args.n % 2:
        raise UsageError(f"the {args.gadget} gadget needs a balanced database, so --n must be even")
    try:
        return attacks.run_attack_experiment(args.gadget, args.solver, args.n, args.trials,
                                             args.seed, args.epsilon, args.delta, args.beta)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _cmd_verify(args):
    seeds = load_seeds(args.seed_file) if args.seed_file else DEFAULT_SEEDS
    results = suites.run_suite(args.suite, seeds, args.workers)
    passed = all(r.passed for r in results)
    return {"suite": args.suite, "passed": passed,
            "criteria": [r.to_dict() for r in results]}, passed


def _cmd_bound(args):
    if args.kind == "reconstruction":
        base = attacks.reconstruction_bound(args.epsilon, args.delta, args.beta)
        return {"kind": "reconstruction", "c": base, "vacuous": base <= 0,
                "doubled": attacks.applicable_bound("objective", args.epsilon, args.delta,
                                                    args.beta)}
    if args.kind == "objective":
        return {"kind": "objective", "d": args.d,
                "alpha": objective_accuracy_bound(args.d, args.sensitivity, args.epsilon, args.delta),
                "alpha_beta": objective_accuracy_bound(args.d, args.sensitivity, args.epsilon,
                                                       args.delta, args.beta)}
    alpha = accuracy_bound(args.kind, args.d, args.m, args.epsilon, args.delta, args.beta,
                           args.sensitivity, args.rho, allow_vacuous=True)
    return {"kind": args.kind, "d": args.d, "m": args.m, "alpha": alpha, "vacuous": alpha >= 1}


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="privlp", description="Differentially private LP solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    def privacy(p, eps=None):
        p.add_argument("--epsilon", type=float, required=eps is None, default=eps)
        p.add_argument("--delta", type=float, default=1e-6)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--output", help="write the JSON report here instead of stdout")

    p = sub.add_parser("solve-constraint", help="constraint-private feasibility (dense MW)")
    p.add_argument("--instance", required=True)
    privacy(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--density", type=_positive_int, required=True)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--rho", type=float, help="width; computed from the region's vertices if omitted")
    p.add_argument("--oracle", choices=("setcover", "exact"), default="setcover")
    p.add_argument("--trace", help="write a JSON-lines trace of every DMW step")

    for name in _LOW:
        p = sub.add_parser(name, help=f"{_LOW[name][0]}-private LP over the simplex")
        p.add_argument("--instance", required=True)
        privacy(p)
        p.add_argument("--alpha", type=float, help="defaults to the accuracy bound")
        p.add_argument("--beta", type=float, default=0.1)
        p.add_argument("--trials", type=_nonneg_int, default=0)
        p.add_argument("--trace")
        if name == "solve-column":
            p.add_argument("--noise", choices=("shared", "per_coordinate"), default="shared")

    p = sub.add_parser("solve-objective", help="objective-private LP by a perturbed objective")
    p.add_argument("--instance", required=True)
    privacy(p)
    p.add_argument("--trials", type=_nonneg_int, default=0)
    p.add_argument("--no-simplex", action="store_true",
                   help="do not add sum(x) == 1; the instance must then be bounded")
    p.add_argument("--trace")

    p = sub.add_parser("attack", help="reconstruction attack through a gadget LP")
    p.add_argument("--gadget", choices=attacks.GADGETS, required=True)
    p.add_argument("--solver", choices=sorted(attacks.ATTACK_SOLVERS), default="exact")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--trials", type=_nonneg_int, default=10)
    p.add_argument("--beta", type=float, default=0.1)
    privacy(p, eps=1.0)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=sorted(suites.SUITES), required=True)
    p.add_argument("--seed-file")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--output")

    p = sub.add_parser("bound", help="print accuracy or reconstruction bounds")
    p.add_argument("--kind", choices=("scalar", "row", "column", "objective", "reconstruction"),
                   required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--d", type=_positive_int, default=2)
    p.add_argument("--m", type=_positive_int, default=1)
    p.add_argument("--sensitivity", type=float, default=1e-3)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--output")
    return parser


_COMMANDS = {
    "solve-constraint": _cmd_solve_constraint,
    "solve-scalar": _cmd_solve_low,
    "solve-row": _cmd_solve_low,
    "solve-column": _cmd_solve_low,
    "solve-objective": _cmd_solve_objective,
    "attack": _cmd_attack,
    "bound": _cmd_bound,
}


def run(args):
    """Execute a parsed command; returns ``(report, ok)``."""
    if args.command == "verify":
        report, ok = _cmd_verify(args)
    else:
        report, ok = _COMMANDS[args.command](args), True
    report = dict(report, command=args.command)
    if hasattr(args, "seed"):
        report["seed"] = args.seed
    if getattr(args, "instance", None):
        report["instance"] = args.instance
    return report, ok


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        report, ok = run(args)
    except (UsageError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"privlp {args.command}: error: {exc}", file=sys.stderr)
        return 2
    text = dumps_report(report)
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
