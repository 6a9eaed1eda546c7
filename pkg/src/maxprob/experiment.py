"""Experiment configuration, result tables and the built-in reference tables."""

from __future__ import annotations

import io
import json
import os
import sys
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Sequence

from .divergence import jem_solve, npml_solve, rem_solve
from .errors import ConfigError, IoFailure, MaxProbError
from .finite import solve_q1, solve_q2, solve_q4, solve_q4_expected
from .model import (
    MomentConstraintSet,
    OccurrenceVector,
    Pmf,
    build_working_set_spec,
    moment_constraints,
    parse_rational,
    uniform_pmf,
    validate_pmf,
)
from .workingset import count

FINITE_SOLVERS = ("q1", "q2", "q4", "q4_expected")
LIMIT_SOLVERS = ("rem", "npml", "jem")
SOLVERS = FINITE_SOLVERS + LIMIT_SOLVERS

# finite-n question -> the divergence solver it converges to
LIMIT_OF = {"q1": "rem", "q2": "rem", "q4": "jem", "q4_expected": "jem"}


@dataclass(frozen=True)
class ExperimentConfig:
    generator: Pmf
    constraints: MomentConstraintSet
    sample_sizes: tuple[int, ...] = ()
    solvers: tuple[str, ...] = ()
    counts_vector: OccurrenceVector | None = None
    output_format: str = "csv"
    rounding: int = 4
    tolerance: float = 1e-12
    q4_counts: str = "rounded"
    threads: int | None = None

    def __post_init__(self):
        unknown = [s for s in self.solvers if s not in SOLVERS]
        if unknown:
            raise ConfigError(f"unknown solvers {unknown}; choose from {list(SOLVERS)}")
        if any(s in FINITE_SOLVERS for s in self.solvers) and not self.sample_sizes:
            raise ConfigError("finite-n solvers need at least one sample size")
        if "npml" in self.solvers and self.counts_vector is None:
            raise ConfigError("npml needs counts_vector")
        if self.counts_vector is not None and len(self.counts_vector) != self.constraints.m:
            raise ConfigError("counts_vector length differs from the support size")
        if len(self.generator) != self.constraints.m:
            raise ConfigError("generator length differs from the support size")
        if any(n < 1 for n in self.sample_sizes):
            raise ConfigError("sample sizes must be positive")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"output_format must be csv or json, not {self.output_format!r}")
        if self.q4_counts not in ("rounded", "gamma"):
            raise ConfigError(f"q4_counts must be rounded or gamma, not {self.q4_counts!r}")
        if self.rounding < 0:
            raise ConfigError("rounding must be nonnegative")


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


CONFIG_KEYS = {
    "generator", "support", "targets", "sample_sizes", "solvers", "counts_vector",
    "output_format", "rounding", "tolerance", "q4_counts", "threads",
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse the flat ``key = value`` config format.

    One key per line, ``#`` starts a comment, lists are comma separated.
    ``support`` may hold several rows separated by ``;`` (one per target).
    ``generator`` may be ``uniform``. Numbers are read as exact rationals.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    try:
        support_rows = [_split(r) for r in raw.get("support", "").split(";") if r.strip()]
        targets = _split(raw.get("targets", ""))
        gen_text = raw.get("generator", "uniform").strip()
        if gen_text.lower() == "uniform":
            if not support_rows:
                raise ConfigError("a uniform generator needs the support to fix its size")
            generator = uniform_pmf(len(support_rows[0]))
        else:
            generator = validate_pmf(_split(gen_text), role="generator")
        m = len(generator)
        if not support_rows:
            constraints = moment_constraints(m=m)
        elif len(support_rows) == 1:
            constraints = moment_constraints(support_rows[0], targets, m=m)
        else:
            constraints = moment_constraints(support_rows, targets, m=m)
        counts = raw.get("counts_vector")
        counts_vector = OccurrenceVector.of(int(c) for c in _split(counts)) if counts else None
        threads = raw.get("threads")
        return ExperimentConfig(
            generator=generator,
            constraints=constraints,
            sample_sizes=tuple(sorted({int(v) for v in _split(raw.get("sample_sizes", ""))})),
            solvers=tuple(_split(raw.get("solvers", ""))),
            counts_vector=counts_vector,
            output_format=raw.get("output_format", "csv").strip(),
            rounding=int(raw.get("rounding", "4")),
            tolerance=float(parse_rational(raw.get("tolerance", "1e-12"))),
            q4_counts=raw.get("q4_counts", "rounded").strip(),
            threads=int(threads) if threads else None,
        )
    except MaxProbError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def round_half_even(value: float, places: int) -> str:
    quantum = Decimal(1).scaleb(-places)
    return str(Decimal(value).quantize(quantum, rounding=ROUND_HALF_EVEN))


@dataclass(frozen=True)
class ResultRow:
    solver: str
    n: int  # -1 for limit rows
    J: int | None
    cells: tuple[float, ...]
    distance_to_limit: float | None = None

    @property
    def is_limit(self) -> bool:
        return self.n == -1


@dataclass
class ResultTable:
    m: int
    rounding: int = 4
    rows: list[ResultRow] = field(default_factory=list)

    def rounded(self, row: ResultRow) -> tuple[str, ...]:
        return tuple(round_half_even(v, self.rounding) for v in row.cells)

    def row(self, solver: str, n: int | None = None) -> ResultRow:
        key = -1 if n is None else n
        for r in self.rows:
            if r.solver == solver and r.n == key:
                return r
        raise KeyError((solver, n))


def _distance(a: Sequence[float], b: Sequence[float]) -> float:
    return max(abs(x - y) for x, y in zip(a, b))


def run_experiment(config: ExperimentConfig, threads: int | None = None) -> ResultTable:
    threads = threads if threads is not None else config.threads
    table = ResultTable(config.constraints.m, config.rounding)
    selected = [s for s in SOLVERS if s in config.solvers]
    limits: dict[str, tuple[float, ...]] = {}

    def limit(name: str) -> tuple[float, ...]:
        if name not in limits:
            solver = rem_solve if name == "rem" else jem_solve
            limits[name] = solver(config.generator, config.constraints,
                                  config.tolerance).solution.probs
        return limits[name]

    finite = {
        "q1": lambda spec: solve_q1(spec, config.generator, threads),
        "q2": lambda spec: solve_q2(spec, config.generator, threads),
        "q4": lambda spec: solve_q4(spec, config.generator, threads, config.q4_counts),
        "q4_expected": lambda spec: solve_q4_expected(spec, config.generator, threads,
                                                      config.q4_counts),
    }
    for name in selected:
        if name in FINITE_SOLVERS:
            target = limit(LIMIT_OF[name])
            for n in config.sample_sizes:
                spec = build_working_set_spec(n, config.constraints)
                answer = finite[name](spec)
                J = count(spec)
                if J != answer.J:
                    raise MaxProbError(f"enumerated {answer.J} vectors but counted {J}")
                table.rows.append(ResultRow(name, n, J, answer.normalized,
                                            _distance(answer.normalized, target)))
        elif name == "npml":
            report = npml_solve(config.counts_vector, config.constraints, config.tolerance)
            table.rows.append(ResultRow(name, -1, None, report.solution.probs))
        else:
            table.rows.append(ResultRow(name, -1, None, limit(name)))
    return table


# -- emission -----------------------------------------------------------------------

def format_float(value: float) -> str:
    """Shortest decimal that round-trips (at most 17 significant digits)."""
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def _csv_text(table: ResultTable) -> str:
    header = ["solver", "n", "J", *(f"cell_{i + 1}" for i in range(table.m)), "distance_to_limit"]
    lines = [",".join(header)]
    for r in table.rows:
        fields = [
            r.solver,
            str(r.n),
            "" if r.J is None else str(r.J),
            *(format_float(v) for v in r.cells),
            "" if r.distance_to_limit is None else format_float(r.distance_to_limit),
        ]
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def _json_text(table: ResultTable) -> str:
    doc = {
        "m": table.m,
        "rounding": table.rounding,
        "rows": [
            {
                "solver": r.solver,
                "n": r.n,
                "J": r.J,
                "cells": list(r.cells),
                "rounded": list(table.rounded(r)),
                "distance_to_limit": r.distance_to_limit,
            }
            for r in table.rows
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def render(table: ResultTable, fmt: str = "csv") -> str:
    if fmt == "csv":
        return _csv_text(table)
    if fmt == "json":
        return _json_text(table)
    raise ConfigError(f"unknown format {fmt!r}")


def emit(table: ResultTable, fmt: str = "csv", destination=None) -> None:
    """Write ``table`` as CSV or JSON to a path, a text stream, or stdout."""
    text = render(table, fmt)
    if destination is None:
        destination = sys.stdout
    if isinstance(destination, io.TextIOBase) or hasattr(destination, "write"):
        destination.write(text)
        return
    try:
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {destination}: {exc}") from exc


def table_from_json(text: str) -> ResultTable:
    doc = json.loads(text)
    rows = [
        ResultRow(r["solver"], r["n"], r["J"], tuple(r["cells"]), r["distance_to_limit"])
        for r in doc["rows"]
    ]
    return ResultTable(doc["m"], doc["rounding"], rows)


def table_from_csv(text: str, rounding: int = 4) -> ResultTable:
    lines = text.splitlines()
    header = lines[0].split(",")
    m = len(header) - 4
    rows = []
    for line in lines[1:]:
        f = line.split(",")
        rows.append(ResultRow(
            f[0], int(f[1]), int(f[2]) if f[2] else None,
            tuple(float(v) for v in f[3:3 + m]),
            float(f[-1]) if f[-1] else None,
        ))
    return ResultTable(m, rounding, rows)


# -- reference tables -----------------------------------------------------------------

REFERENCE_Q = ("0.13", "0.09", "0.42", "0.36")
REFERENCE_SUPPORT = (1, 2, 3, 4)
REFERENCE_TARGET = "3.2"
REFERENCE_SIZES = (10, 50, 100, 500, 1000)
REFERENCE_COUNTS = (13, 9, 42, 36)

# (table, generator) -> {n or None for the limit row: 4-dp cells}
GOLDEN = {
    ("table1", "q"): {
        10: "0.1000 0.0000 0.5000 0.4000",
        50: "0.0800 0.0600 0.4400 0.4200",
        100: "0.0800 0.0700 0.4200 0.4300",
        500: "0.0820 0.0700 0.4140 0.4340",
        1000: "0.0830 0.0700 0.4110 0.4360",
        None: "0.0826 0.0709 0.4103 0.4361",
    },
    ("table1", "uniform"): {
        10: "0.1000 0.1000 0.3000 0.5000",
        50: "0.0800 0.1400 0.2800 0.5000",
        100: "0.0800 0.1400 0.2800 0.5000",
        500: "0.0780 0.1460 0.2740 0.5020",
        1000: "0.0790 0.1460 0.2710 0.5040",
        None: "0.0788 0.1462 0.2714 0.5037",
    },
    ("table2", "q"): {
        10: "0.0721 0.0736 0.4365 0.4178",
        50: "0.0806 0.0714 0.4153 0.4327",
        100: "0.0816 0.0712 0.4128 0.4344",
        500: "0.0824 0.0710 0.4108 0.4358",
        1000: "0.0825 0.0709 0.4106 0.4360",
        None: "0.0826 0.0709 0.4103 0.4361",
    },
    ("table2", "uniform"): {
        10: "0.0701 0.1510 0.2877 0.4912",
        50: "0.0771 0.1471 0.2745 0.5013",
        100: "0.0779 0.1466 0.2729 0.5025",
        500: "0.0786 0.1463 0.2717 0.5035",
        1000: "0.0787 0.1462 0.2715 0.5036",
        None: "0.0788 0.1462 0.2714 0.5037",
    },
    ("table3", "q"): {
        10: "0.1000 0.1000 0.3000 0.5000",
        50: "0.0800 0.0600 0.4400 0.4200",
        100: "0.0800 0.0700 0.4200 0.4300",
        500: "0.0840 0.0700 0.4080 0.4380",
        1000: "0.0840 0.0710 0.4060 0.4390",
        None: "0.0844 0.0705 0.4056 0.4394",
    },
    ("table3", "uniform"): {
        10: "0.1000 0.1000 0.3000 0.5000",
        50: "0.1000 0.1400 0.2200 0.5400",
        100: "0.0900 0.1400 0.2500 0.5200",
        500: "0.0920 0.1400 0.2440 0.5240",
        1000: "0.0930 0.1390 0.2430 0.5250",
        None: "0.0926 0.1395 0.2433 0.5246",
    },
}

GOLDEN_J = {10: 10, 50: 154, 100: 574, 500: 13534, 1000: 53734}

TABLE_SOLVERS = {"table1": ("q1", "rem"), "table2": ("q2", "rem"), "table3": ("q4", "jem")}


def reference_config(table: str, generator: str, q4_counts: str = "rounded") -> ExperimentConfig:
    gen = validate_pmf(REFERENCE_Q) if generator == "q" else uniform_pmf(len(REFERENCE_SUPPORT))
    return ExperimentConfig(
        generator=gen,
        constraints=moment_constraints(REFERENCE_SUPPORT, REFERENCE_TARGET),
        sample_sizes=REFERENCE_SIZES,
        solvers=TABLE_SOLVERS[table],
        q4_counts=q4_counts,
    )


@dataclass(frozen=True)
class CellCheck:
    table: str
    generator: str
    solver: str
    n: int | None
    field: str
    expected: str
    got: str

    @property
    def passed(self) -> bool:
        return self.expected == self.got

    def line(self) -> str:
        row = "limit" if self.n is None else f"n={self.n}"
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.table} {self.generator} {self.solver} {row} "
                f"{self.field}: expected {self.expected} got {self.got}")


@dataclass
class TableReproduction:
    tables: dict[str, dict[str, ResultTable]]
    checks: list[CellCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 5


def reproduce_paper_tables(threads: int | None = None, q4_counts: str = "rounded",
                           tables: Sequence[str] = ("table1", "table2", "table3")) -> TableReproduction:
    """Recompute the three reference tables and compare every 4-dp cell."""
    out: dict[str, dict[str, ResultTable]] = {}
    checks: list[CellCheck] = []
    for name in tables:
        out[name] = {}
        finite, lim = TABLE_SOLVERS[name]
        for gen in ("q", "uniform"):
            result = run_experiment(reference_config(name, gen, q4_counts), threads=threads)
            out[name][gen] = result
            golden = GOLDEN[(name, gen)]
            for n, expected in golden.items():
                solver = lim if n is None else finite
                row = result.row(solver, n)
                got = result.rounded(row)
                for i, (e, g) in enumerate(zip(expected.split(), got)):
                    checks.append(CellCheck(name, gen, solver, n, f"cell_{i + 1}", e, g))
                if name == "table1" and n is not None:
                    checks.append(CellCheck(name, gen, solver, n, "J",
                                            str(GOLDEN_J[n]), str(row.J)))
    return TableReproduction(out, checks)
