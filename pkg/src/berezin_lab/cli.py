"""berezin-lab command line.

Exit codes: 0 when every checked inequality holds, 2 on any violation,
1 on usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

from . import bounds, linalg
from .rkhs import DEFAULT_ANALYTIC_DIM, KINDS, default_sample, make_space
from .verify import (
    OPERATOR_CLASSES,
    Case,
    OperatorSpec,
    ParamGrid,
    case_from_matrix,
    case_from_spec,
    evaluate_case,
    random_operator,
    run_lemmas,
)

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2

CSV_COLUMNS = (
    "operator",
    "bound_id",
    "r",
    "alpha",
    "nu",
    "alphaf",
    "swap",
    "variant",
    "lhs",
    "mid",
    "rhs",
    "slack",
    "tol",
    "holds",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def write_atomic(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def report_row(label: str, rep: bounds.BoundReport) -> dict:
    p = rep.params
    return {
        "operator": label,
        "bound_id": rep.bound_id,
        "r": p.get("r", ""),
        "alpha": p.get("alpha", ""),
        "nu": p.get("nu", ""),
        "alphaf": p.get("alphaf", ""),
        "swap": p.get("swap", p.get("adjoint_variant", "")),
        "variant": p.get("variant", ""),
        "lhs": rep.lhs,
        "mid": "" if rep.mid is None else rep.mid,
        "rhs": rep.rhs,
        "slack": rep.slack,
        "tol": rep.tol,
        "holds": rep.holds,
    }


def render_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def render_json(payload) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


# -- argument plumbing ------------------------------------------------------------------


def _add_space_args(p):
    p.add_argument("--space", choices=KINDS, default="standard")
    p.add_argument("--dim", type=int, nargs="+", default=None, help="space dimension(s)")
    p.add_argument("--nr", type=int, default=20)
    p.add_argument("--ntheta", type=int, default=64)
    p.add_argument("--rmax", type=float, default=0.99)


def _add_operator_args(p, trials=1):
    p.add_argument("--ops", nargs="+", default=None, help="matrix JSON files")
    p.add_argument("--class", dest="op_class", choices=OPERATOR_CLASSES, default="general")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=trials)


def _add_grid_args(p):
    p.add_argument("--r", type=float, nargs="+", default=[1.0, 1.5, 2.0])
    p.add_argument("--alpha-grid", type=int, default=11)
    p.add_argument("--nu", type=float, nargs="+", default=[0.25, 0.5, 0.75])
    p.add_argument("--alphaf", type=float, nargs="+", default=[0.0, 0.5, 1.0])
    p.add_argument("--bounds", nargs="+", default=None, help="restrict to these bound ids")
    p.add_argument("--no-minimize", action="store_true", help="skip the alpha-minimised rows")


def _add_output_args(p):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="berezin-lab", description="Berezin number inequality verifier.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write seeded random operators as matrix JSON")
    g.add_argument("--class", dest="op_class", choices=OPERATOR_CLASSES, default="general")
    g.add_argument("--n", "--dim", dest="n", type=int, default=2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--trials", type=int, default=1)
    g.add_argument("--no-normalize", action="store_true")
    g.add_argument("--out", default=None, help="output file (one operator) or directory")

    c = sub.add_parser("check", help="evaluate every bound on the given operators")
    _add_space_args(c)
    _add_operator_args(c)
    _add_grid_args(c)
    _add_output_args(c)

    s = sub.add_parser("sharpness", help="random search for the smallest slack per bound")
    _add_space_args(s)
    _add_operator_args(s, trials=20)
    _add_grid_args(s)
    _add_output_args(s)

    lm = sub.add_parser("lemmas", help="run the vector-level lemma oracles")
    lm.add_argument("--trials", type=int, default=10_000)
    lm.add_argument("--seed", type=int, default=7)
    _add_output_args(lm)
    return parser


def _grid(args) -> ParamGrid:
    if args.alpha_grid < 1:
        raise UsageError("--alpha-grid must be >= 1")
    if args.alpha_grid == 1:
        alphas = (0.0,)
    else:
        alphas = tuple(i / (args.alpha_grid - 1) for i in range(args.alpha_grid))
    return ParamGrid(
        tuple(args.r),
        alphas,
        tuple(args.nu),
        tuple(args.alphaf),
        tuple(args.bounds) if args.bounds else None,
        not args.no_minimize,
    )


def _cases(args) -> list[Case]:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    cases = []
    if args.ops:
        for path in args.ops:
            try:
                m = linalg.load_matrix(path)
            except (OSError, ValueError) as exc:
                raise UsageError(f"cannot read operator {path}: {exc}") from exc
            cases.append(case_from_matrix(m, Path(path).stem))
        return cases
    if args.dim:
        dims = args.dim
    elif args.space == "standard":
        dims = [2, 4, 8]
    else:
        dims = [DEFAULT_ANALYTIC_DIM]
    for n in dims:
        for t in range(args.trials):
            cases.append(case_from_spec(OperatorSpec(args.op_class, n, args.seed + t)))
    return cases


def _space_for(args, n: int):
    if args.dim and len(args.dim) == 1 and args.dim[0] != n:
        raise UsageError(f"operator dimension {n} does not match --dim {args.dim[0]}")
    space = make_space(args.space, n)
    try:
        plan = default_sample(space, args.nr, args.ntheta, args.rmax)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return space, plan


# -- commands ------------------------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.n < 1 or args.trials < 1:
        raise UsageError("--n and --trials must be >= 1")
    paths = []
    for t in range(args.trials):
        spec = OperatorSpec(args.op_class, args.n, args.seed + t, not args.no_normalize)
        m = random_operator(spec)
        name = f"{spec.op_class}_n{spec.dim}_s{spec.seed}.json"
        if args.out is None:
            path = Path(name)
        elif args.trials == 1 and not Path(args.out).is_dir() and args.out.endswith(".json"):
            path = Path(args.out)
        else:
            path = Path(args.out) / name
        write_atomic(json.dumps(linalg.matrix_to_dict(m)) + "\n", str(path))
        paths.append(str(path))
    for p in paths:
        print(p)
    return EXIT_OK


def check_reports(args) -> list[tuple[str, object]]:
    grid = _grid(args)
    out = []
    for case in _cases(args):
        space, plan = _space_for(args, case.a.shape[0])
        for bound_id, params, outcome in evaluate_case(case, space, plan, grid):
            out.append((case.label, outcome if not isinstance(outcome, Exception) else (bound_id, params, outcome)))
    return out


def cmd_check(args) -> int:
    results = check_reports(args)
    reports = [(label, r) for label, r in results if isinstance(r, bounds.BoundReport)]
    skipped = [
        {"operator": label, "bound_id": r[0], "params": r[1], "reason": str(r[2])}
        for label, r in results
        if not isinstance(r, bounds.BoundReport)
    ]
    violations = [(label, r) for label, r in reports if not r.holds]
    worst = min(reports, key=lambda lr: lr[1].slack, default=None)
    summary = {
        "total": len(reports),
        "holds": len(reports) - len(violations),
        "violations": len(violations),
        "skipped": len(skipped),
        "min_slack": worst[1].slack if worst else None,
        "min_slack_bound": worst[1].bound_id if worst else None,
        "min_slack_operator": worst[0] if worst else None,
        "min_slack_params": worst[1].params if worst else None,
    }
    if args.format == "csv":
        text = render_csv([report_row(label, r) for label, r in reports], CSV_COLUMNS)
    else:
        text = render_json(
            {
                "command": "check",
                "space": args.space,
                "plan": {"nr": args.nr, "ntheta": args.ntheta, "rmax": args.rmax},
                "summary": summary,
                "reports": [{"operator": label, **r.to_dict()} for label, r in reports],
                "skipped": skipped,
            }
        )
    write_atomic(text, args.out)
    print(
        f"checked {summary['total']} inequalities, {summary['violations']} violations, "
        f"min slack {summary['min_slack']} at {summary['min_slack_bound']}",
        file=sys.stderr,
    )
    return EXIT_VIOLATION if violations else EXIT_OK


def cmd_sharpness(args) -> int:
    results = check_reports(args)
    cases = {c.label: c for c in _cases(args)}
    best: dict[str, tuple[str, bounds.BoundReport]] = {}
    for label, rep in results:
        if not isinstance(rep, bounds.BoundReport):
            continue
        cur = best.get(rep.bound_id)
        if cur is None or rep.slack < cur[1].slack:
            best[rep.bound_id] = (label, rep)
    entries = []
    for bound_id in sorted(best):
        label, rep = best[bound_id]
        case = cases[label]
        entries.append(
            {
                "bound_id": bound_id,
                "min_slack": rep.slack,
                "holds": rep.holds,
                "params": rep.params,
                "lhs": rep.lhs,
                "rhs": rep.rhs,
                "operator": label,
                "spec": case.spec.to_dict() if case.spec else None,
                "matrix": linalg.matrix_to_dict(case.a),
                "companion": linalg.matrix_to_dict(case.b),
            }
        )
    if args.format == "csv":
        rows = [report_row(best[e["bound_id"]][0], best[e["bound_id"]][1]) for e in entries]
        text = render_csv(rows, CSV_COLUMNS)
    else:
        text = render_json({"command": "sharpness", "trials": args.trials, "bounds": entries})
    write_atomic(text, args.out)
    return EXIT_VIOLATION if any(not e["holds"] for e in entries) else EXIT_OK


def cmd_lemmas(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    stats = run_lemmas(args.trials, args.seed)
    rows = [s.to_dict() for s in stats]
    if args.format == "csv":
        text = render_csv(rows, ("lemma", "trials", "passed", "failed", "min_slack"))
    else:
        text = render_json({"command": "lemmas", "seed": args.seed, "lemmas": rows})
    write_atomic(text, args.out)
    return EXIT_VIOLATION if any(s.failed for s in stats) else EXIT_OK


COMMANDS = {"gen": cmd_gen, "check": cmd_check, "sharpness": cmd_sharpness, "lemmas": cmd_lemmas}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"berezin-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
