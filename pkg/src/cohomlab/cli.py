"""Command-line entry point.

Two subcommands: `compute` reads a group specification file and reports the
cocycle, coboundary, and locally trivial quotient data for the group it
describes; `experiment` runs one of the named experiments. All output is
exact integers serialized as JSON or CSV, byte-identical across runs with
equal inputs (experiment verdicts except for their elapsed_ms field).

Exit codes: 0 pass, 1 property violation, 2 input error, 3 budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Optional

from .cohom import h1_loc, h1_loc_via_restrictions
from .errors import BudgetExceeded, CapExceeded, CohomLabError, WrongLevel
from .experiments import (
    DEFAULT_BUDGET_MS,
    EXPERIMENT_NAMES,
    falsify_main_theorem,
    run_example6,
    verify_diagonal_triviality,
    verify_oracle_equivalence,
    verify_shape_lemma,
    verify_structure_props,
)
from .galoisdict import evaluate_main_theorem_conditions
from .matgrp import DEFAULT_CAP, Mat2, MatGroup, close_group
from .zmod import ModulusContext


def resolve_cap(explicit: Optional[int]) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get("COHOMLAB_CAP")
    if env is not None:
        return int(env)
    return DEFAULT_CAP


def load_group_spec(path: str, cap: int) -> MatGroup:
    """Parse and validate a GroupSpecFile, then close its generators."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("group spec must be a JSON object")
    missing = {"p", "n", "generators"} - set(data)
    if missing:
        raise ValueError(f"group spec is missing keys: {sorted(missing)}")
    p, n, gens = data["p"], data["n"], data["generators"]
    if not isinstance(p, int) or not isinstance(n, int):
        raise ValueError("p and n must be integers")
    ctx = ModulusContext(p, n)
    if not isinstance(gens, list):
        raise ValueError("generators must be a list of 2x2 integer arrays")
    mats = []
    for g in gens:
        rows_ok = (
            isinstance(g, list)
            and len(g) == 2
            and all(isinstance(row, list) and len(row) == 2 for row in g)
            and all(isinstance(e, int) and not isinstance(e, bool) for row in g for e in row)
        )
        if not rows_ok:
            raise ValueError(f"generator is not a 2x2 integer array: {g!r}")
        if any(not 0 <= e < ctx.modulus for row in g for e in row):
            raise ValueError(f"generator entries must lie in [0, {ctx.modulus}): {g!r}")
        mats.append(Mat2(g[0][0], g[0][1], g[1][0], g[1][1], ctx))
    return close_group(mats, ctx, cap=cap)


def _emit(doc: dict, csv_rows: list, out: Optional[str], fmt: str) -> None:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(csv_rows)
        text = buf.getvalue()
    else:
        text = json.dumps(doc, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_compute(args) -> int:
    group = load_group_spec(args.spec, resolve_cap(args.cap))
    report = h1_loc(group)
    doc = report.to_json_dict()
    violation = False
    if args.local:
        via = h1_loc_via_restrictions(group)
        doc["h1locViaRestrictions"] = via
        doc["localAgreement"] = via == list(report.h1loc_invariants)
        if not doc["localAgreement"]:
            violation = True
    if args.conditions:
        doc["conditions"] = evaluate_main_theorem_conditions(group).to_json_dict()
    rows = [["field", "value"]] + [[key, json.dumps(value)] for key, value in doc.items()]
    _emit(doc, rows, args.out, args.format)
    return 1 if violation else 0


def _require_p(args) -> int:
    if args.p is None:
        raise ValueError(f"experiment {args.name} requires --p")
    return args.p


def cmd_experiment(args) -> int:
    name = args.name
    if name == "example6":
        verdict = run_example6(_require_p(args), m=args.m, budget_ms=args.budget_ms)
    elif name == "diagonal":
        verdict = verify_diagonal_triviality(_require_p(args), args.n, budget_ms=args.budget_ms)
    elif name == "shape-lemma":
        verdict = verify_shape_lemma(_require_p(args), seed=args.seed, budget_ms=args.budget_ms)
    elif name == "structure-props":
        verdict = verify_structure_props(_require_p(args), seed=args.seed, budget_ms=args.budget_ms)
    elif name == "main-theorem":
        verdict = falsify_main_theorem(_require_p(args), seed=args.seed, budget_ms=args.budget_ms)
    else:
        verdict = verify_oracle_equivalence(budget_ms=args.budget_ms)
    _emit(verdict.to_json_dict(), verdict.to_csv_rows(), args.out, args.format)
    return 0 if verdict.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cohomlab",
        description="group cohomology laboratory for 2x2 matrix groups over Z/p^n",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("compute", help="report cocycle data for a group spec file")
    pc.add_argument("spec", help="path to a JSON file with keys p, n, generators")
    pc.add_argument("--local", action="store_true", help="cross-check via cyclic restrictions")
    pc.add_argument("--conditions", action="store_true", help="append the condition report (needs n >= 2)")
    pc.add_argument("--cap", type=int, default=None, help="group closure cap (default env COHOMLAB_CAP or 5000)")
    pc.add_argument("--out", default=None, help="write the report to this path instead of stdout")
    pc.add_argument("--format", choices=("json", "csv"), default="json")
    pc.set_defaults(func=cmd_compute)

    pe = sub.add_parser("experiment", help="run a named experiment")
    pe.add_argument("name", choices=EXPERIMENT_NAMES)
    pe.add_argument("--p", type=int, default=None, help="prime parameter")
    pe.add_argument("--n", type=int, default=2, help="level parameter (diagonal experiment)")
    pe.add_argument("--m", type=int, default=None, help="override the nonsquare (example6)")
    pe.add_argument("--cap", type=int, default=None, help="accepted for symmetry; closure caps are structural")
    pe.add_argument("--budget-ms", type=int, default=DEFAULT_BUDGET_MS, help="wall-clock budget in milliseconds")
    pe.add_argument("--seed", type=int, default=0, help="sampling seed")
    pe.add_argument("--out", default=None, help="write the verdict to this path instead of stdout")
    pe.add_argument("--format", choices=("json", "csv"), default="json")
    pe.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (CapExceeded, BudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, WrongLevel, CohomLabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
