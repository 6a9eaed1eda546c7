"""Command line front end.

    maxprob solve --config exp.cfg [--format csv|json] [--out PATH] [--threads K]
    maxprob enumerate --config exp.cfg [--n N ...] [--format csv|json] [--out PATH]
    maxprob reproduce-tables [--format csv|json] [--out DIR] [--threads K]

Exit codes: 0 success, 2 config error, 3 infeasible or empty working set,
4 solver non-convergence, 5 golden mismatch, 6 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import IoFailure, MaxProbError
from .experiment import emit, load_config, reproduce_paper_tables, run_experiment
from .model import build_working_set_spec
from .workingset import count, enumerate_working_set


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {out}: {exc}") from exc


def cmd_solve(args) -> int:
    config = load_config(args.config)
    fmt = args.format or config.output_format
    table = run_experiment(config, threads=args.threads)
    emit(table, fmt, args.out)
    return 0


def cmd_enumerate(args) -> int:
    config = load_config(args.config)
    fmt = args.format or config.output_format
    sizes = args.n or list(config.sample_sizes)
    if not sizes:
        raise MaxProbError("no sample size given (use --n or sample_sizes)")
    m = config.constraints.m
    if fmt == "json":
        doc = []
        for n in sizes:
            spec = build_working_set_spec(n, config.constraints)
            vectors = [list(t) for t in enumerate_working_set(spec).tuples()]
            doc.append({"n": n, "J": count(spec), "vectors": vectors})
        _write(json.dumps(doc) + "\n", args.out)
        return 0
    lines = [",".join(["n", "j", *(f"cell_{i + 1}" for i in range(m))])]
    for n in sizes:
        spec = build_working_set_spec(n, config.constraints)
        for j, t in enumerate(enumerate_working_set(spec).tuples(), 1):
            lines.append(",".join(map(str, (n, j, *t))))
    _write("\n".join(lines) + "\n", args.out)
    return 0


def cmd_reproduce(args) -> int:
    result = reproduce_paper_tables(threads=args.threads, q4_counts=args.q4_counts)
    for check in result.checks:
        print(check.line())
    failed = sum(not c.passed for c in result.checks)
    print(f"{len(result.checks) - failed}/{len(result.checks)} cells match")
    if args.out:
        try:
            os.makedirs(args.out, exist_ok=True)
        except OSError as exc:
            raise IoFailure(f"cannot create {args.out}: {exc}") from exc
        ext = args.format or "csv"
        for name, by_gen in result.tables.items():
            for gen, table in by_gen.items():
                emit(table, ext, os.path.join(args.out, f"{name}_{gen}.{ext}"))
    return result.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maxprob", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="flat key = value config file")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--out", help="output path (directory for reproduce-tables)")
        p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("solve", help="run the solvers selected in a config")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("enumerate", help="list the working set")
    common(p)
    p.add_argument("--n", type=int, action="append", help="sample size (repeatable)")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("reproduce-tables", help="recompute the reference tables and compare")
    common(p, config=False)
    p.add_argument("--q4-counts", choices=("rounded", "gamma"), default="rounded")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MaxProbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
