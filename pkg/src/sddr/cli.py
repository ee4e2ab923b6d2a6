"""Command-line front end.

Exit codes: 0 success, 1 model infeasibility or validation failure, 2
malformed input or usage error, 3 size guard exceeded. The environment
variable ``SDD_ORACLE_LIMIT`` overrides the oracle's order-count guard.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .compare import compare_models, rows_to_csv, rows_to_dict, rows_to_text
from .core import (
    ConfigError,
    InvalidInstanceError,
    MalformedInputError,
    SizeGuardError,
    instance_from_dict,
    instance_violations,
    load_instance,
    save_instance,
    validate_instance,
)
from .dynamics import (
    Policy,
    SimConfig,
    sim_report_to_csv,
    sim_report_to_dict,
    simulate,
)
from .generator import GeneratorProfile, gen_instance
from .oracle import OracleGuard, oracle_solve
from .plans import PlanError, load_plan, validate_plan
from .solvers import SolverConfig, report_to_dict, solve_f1, solve_f2, solve_f2_lex, solve_f3, solve_f4

_MODEL_SOLVERS = {
    "f1": solve_f1,
    "f2": solve_f2,
    "f2lex": solve_f2_lex,
    "f3": solve_f3,
    "f4": solve_f4,
}


def _write_json(path: str, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load(args) -> "Instance":
    inst = load_instance(args.instance)
    if getattr(args, "big_m", None) is not None:
        inst = validate_instance(replace(inst, big_m=args.big_m))
    if getattr(args, "max_trips", None) is not None:
        inst = validate_instance(replace(inst, max_trips=args.max_trips))
    return inst


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        max_trips=getattr(args, "max_trips", None),
        time_limit=getattr(args, "time_limit", None),
    )


def _cmd_solve(args) -> int:
    inst = _load(args)
    report = _MODEL_SOLVERS[args.model](inst, _solver_config(args))
    doc = report_to_dict(report)
    if args.out:
        _write_json(args.out, doc)
    status = "optimal" if report.optimal else f"incumbent (gap {report.bound_gap:.6f})"
    print(
        f"{args.model}: objective {report.objective:.6f} ({status}), "
        f"served {len(report.plan.assignments)}, trips {len(report.plan.trips)}, "
        f"nodes {report.nodes_explored}, {report.runtime:.3f}s"
    )
    return 0


def _cmd_oracle(args) -> int:
    inst = _load(args)
    guard = OracleGuard()
    limit = os.environ.get("SDD_ORACLE_LIMIT")
    if limit is not None:
        guard = OracleGuard(max_orders=int(limit), max_stations=int(limit), max_options=int(limit))
    report = oracle_solve(inst, args.model.upper(), guard)
    if args.out:
        _write_json(args.out, report_to_dict(report))
    print(
        f"oracle {args.model}: objective {report.objective:.6f}, "
        f"served {len(report.plan.assignments)}, trips {len(report.plan.trips)}"
    )
    return 0


def _cmd_validate(args) -> int:
    doc = json.loads(Path(args.instance).read_text(encoding="utf-8"))
    inst = instance_from_dict(doc)
    errs = instance_violations(inst)
    if errs:
        for e in errs:
            print(f"violation: {e}")
        return 1
    validate_instance(inst)
    print(f"valid: {len(inst.orders)} orders, {len(inst.stations)} stations")
    return 0


def _cmd_check_plan(args) -> int:
    inst = _load(args)
    plan = load_plan(args.plan, inst)
    bad = validate_plan(inst, plan)
    if bad:
        for v in bad:
            slack = "" if v.slack is None else f" (slack {v.slack:.6f})"
            print(f"{v.tag}{slack}: {v.detail}")
        return 1
    print("plan ok")
    return 0


def _cmd_gen(args) -> int:
    deadlines = None
    if args.deadlines:
        deadlines = tuple(float(x) for x in args.deadlines.split(","))
    profile = GeneratorProfile(
        orders=args.orders,
        stations=args.stations,
        side=args.side,
        alpha=args.alpha,
        horizon=args.horizon,
        radius=args.radius,
        deadlines=deadlines,
        wtp_lo=args.wtp_lo,
        wtp_hi=args.wtp_hi,
        capacity=args.capacity,
        seed=args.seed,
        release_spread=args.release_spread,
    )
    inst = gen_instance(profile)
    save_instance(inst, args.out)
    print(f"wrote {args.out}: {len(inst.orders)} orders, {len(inst.stations)} stations")
    return 0


def _cmd_compare(args) -> int:
    inst = _load(args)
    rows = compare_models(inst, _solver_config(args))
    print(rows_to_text(rows), end="")
    if args.csv:
        Path(args.csv).write_text(rows_to_csv(rows), encoding="utf-8")
    if args.out:
        _write_json(args.out, rows_to_dict(rows))
    if args.plot:
        from .figures import render_compare_figures

        written = render_compare_figures(inst, rows, args.plot)
        for p in written:
            print(f"figure: {p}")
    return 0


def _cmd_simulate(args) -> int:
    inst = _load(args)
    policies = []
    for name in args.policy or ["myopic"]:
        if name == "myopic":
            policies.append(Policy.myopic())
        elif name == "threshold":
            policies.append(Policy.threshold(args.theta))
        elif name == "expected":
            policies.append(Policy.expected_value())
        elif name == "consensus":
            policies.append(Policy.consensus(args.samples))
        else:
            raise MalformedInputError(f"unknown policy {name!r}")
    cfg = SimConfig(grid_step=args.grid, replications=args.reps, master_seed=args.seed)
    report = simulate(inst, policies, cfg)
    for name in sorted(report.mean_served):
        print(f"{name}: mean served {report.mean_served[name]:.6f}")
    print(f"perfect information: mean {report.mean_pi:.6f}")
    if args.csv:
        Path(args.csv).write_text(sim_report_to_csv(report), encoding="utf-8")
    if args.out:
        _write_json(args.out, sim_report_to_dict(report))
    if args.plot:
        from .figures import render_simulation_figures

        written = render_simulation_figures(report, args.plot)
        for p in written:
            print(f"figure: {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sddr", description="Same-day delivery routing toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_instance(p):
        p.add_argument("--instance", required=True, help="instance JSON file")

    def add_solver_flags(p):
        p.add_argument("--max-trips", type=int, default=None, dest="max_trips")
        p.add_argument("--big-m", type=float, default=None, dest="big_m")
        p.add_argument("--time-limit", type=float, default=None, dest="time_limit")

    p = sub.add_parser("solve", help="solve one model exactly")
    p.add_argument("--model", required=True, choices=sorted(_MODEL_SOLVERS))
    add_instance(p)
    p.add_argument("--out", help="write the solve report JSON here")
    add_solver_flags(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("oracle", help="solve by exhaustive enumeration (small instances)")
    p.add_argument("--model", required=True, choices=sorted(_MODEL_SOLVERS))
    add_instance(p)
    p.add_argument("--out")
    add_solver_flags(p)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("validate", help="validate an instance file")
    add_instance(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("check-plan", help="validate a plan against an instance")
    add_instance(p)
    p.add_argument("--plan", required=True)
    p.add_argument("--big-m", type=float, default=None, dest="big_m")
    p.set_defaults(func=_cmd_check_plan)

    p = sub.add_parser("gen", help="generate a seeded random instance")
    p.add_argument("--orders", type=int, required=True)
    p.add_argument("--stations", type=int, default=0)
    p.add_argument("--side", type=float, default=100.0)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--horizon", type=float, default=250.0)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--deadlines", default=None, help="comma-separated, e.g. 60,120,240")
    p.add_argument("--wtp-lo", type=float, default=5.0, dest="wtp_lo")
    p.add_argument("--wtp-hi", type=float, default=50.0, dest="wtp_hi")
    p.add_argument("--capacity", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--release-spread", type=float, default=0.0, dest="release_spread")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("compare", help="solve all five models and tabulate metrics")
    add_instance(p)
    p.add_argument("--csv", help="write the table as CSV here")
    p.add_argument("--out", help="write the table as JSON here")
    p.add_argument("--plot", help="render figures into this directory")
    add_solver_flags(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("simulate", help="rolling-horizon dispatch simulation")
    add_instance(p)
    p.add_argument("--policy", action="append", choices=["myopic", "threshold", "expected", "consensus"])
    p.add_argument("--theta", type=int, default=2)
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--grid", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv")
    p.add_argument("--out")
    p.add_argument("--plot")
    p.set_defaults(func=_cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MalformedInputError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SizeGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (InvalidInstanceError, ConfigError, PlanError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
