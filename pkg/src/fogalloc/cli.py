"""Command-line front end: ``validate``, ``solve``, ``gen`` and ``experiment``.

Exit codes: 0 success (Optimal/Feasible/valid), 1 infeasible or trend
violation, 2 input error, 3 limit reached (TimedOut).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .experiments import run_experiment
from .instance import (
    InstanceDomainError,
    InstanceSyntaxError,
    generate_instance,
    parse_instance,
    serialize_instance,
    validate,
)
from .model import Assignment, check_feasible
from .scenario import ScenarioError, load_scenario
from .solver import METHODS, GuardExceeded, SolveResult, Status

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3

_STATUS_EXIT = {
    Status.Optimal: EXIT_OK,
    Status.Feasible: EXIT_OK,
    Status.Infeasible: EXIT_INFEASIBLE,
    Status.TimedOut: EXIT_LIMIT,
}


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load_instance(path: str, lenient: bool, check: bool = True):
    try:
        return parse_instance(_read(path), strict=not lenient, check=check)
    except (InstanceSyntaxError, InstanceDomainError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_validate(args: argparse.Namespace) -> int:
    inst = _load_instance(args.path, args.lenient, check=False)
    problems = validate(inst)
    if problems:
        for v in problems:
            print(v)
        return EXIT_INPUT
    if args.solution is None:
        print("OK")
        return EXIT_OK
    try:
        doc = json.loads(_read(args.solution))
        pairs = [(int(u), int(s)) for u, s in doc["assignment"]]
        a = Assignment.from_pairs(inst, pairs)
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        raise InputError(f"{args.solution}: malformed solution: {exc}") from exc
    report = check_feasible(inst, a)
    print(json.dumps(report.to_json()))
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def _result_csv(res: SolveResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["status", "objective", "nodes_explored", "candidates_generated", "wall_time",
                "assignment"])
    pairs = "" if res.assignment is None else ";".join(f"{u}:{s}" for u, s in res.assignment.pairs())
    w.writerow([res.status.value, "" if res.objective is None else repr(res.objective),
                res.stats.nodes_explored, res.stats.candidates_generated,
                f"{res.stats.wall_time:#.6g}", pairs])
    return buf.getvalue()


def cmd_solve(args: argparse.Namespace) -> int:
    inst = _load_instance(args.path, args.lenient)
    method = METHODS[args.method]
    try:
        if args.method == "exact":
            res = method(inst, time_limit=args.time_limit)
        else:
            res = method(inst)
    except GuardExceeded as exc:
        raise InputError(str(exc)) from exc
    if args.output == "csv":
        sys.stdout.write(_result_csv(res))
    else:
        print(json.dumps(res.to_json()))
    return _STATUS_EXIT[res.status]


def cmd_gen(args: argparse.Namespace) -> int:
    try:
        spec = load_scenario(args.scenario)
        inst = generate_instance(spec, args.users, args.seed if args.seed is not None else spec.seed)
    except ScenarioError as exc:
        raise InputError(str(exc)) from exc
    _emit(serialize_instance(inst), args.out)
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    try:
        result = run_experiment(args.preset, seed=args.seed, time_limit=args.time_limit)
    except ScenarioError as exc:
        raise InputError(str(exc)) from exc
    _emit(result.csv, args.out)
    if args.assert_trends and result.violations:
        for v in result.violations:
            print(v, file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fogalloc",
        description="Minimum-cost multicast allocation of user demand to fog servers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an instance file (and optionally a solution)")
    p.add_argument("path")
    p.add_argument("--lenient", action="store_true", help="ignore unknown keys")
    p.add_argument("--solution", metavar="JSON",
                   help="solve result whose assignment is checked against the instance")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="solve an instance file")
    p.add_argument("path")
    p.add_argument("--method", choices=sorted(METHODS), default="exact")
    p.add_argument("--time-limit", type=float, default=None, metavar="S")
    p.add_argument("--output", choices=["json", "csv"], default="json")
    p.add_argument("--lenient", action="store_true", help="ignore unknown keys")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="generate an instance from a scenario preset or file")
    p.add_argument("--scenario", required=True, metavar="PRESET_OR_FILE")
    p.add_argument("--users", type=int, required=True, metavar="N")
    p.add_argument("--seed", type=int, default=None, metavar="K")
    p.add_argument("--out", default=None, metavar="PATH")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("experiment", help="run a sweep preset and write CSV")
    p.add_argument("--preset", required=True, metavar="fig2|fig3|fig4|fig5|FILE")
    p.add_argument("--seed", type=int, default=None, metavar="K")
    p.add_argument("--out", default=None, metavar="PATH")
    p.add_argument("--assert-trends", action="store_true")
    p.add_argument("--time-limit", type=float, default=None, metavar="S",
                   help="per-solve time limit")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
