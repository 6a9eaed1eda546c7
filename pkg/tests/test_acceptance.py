"""Acceptance gate: one test per criterion, reported in the terminal summary."""

import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from maxprob import (
    build_working_set_spec,
    count,
    digamma_gap,
    enumerate_working_set,
    jem_solve,
    log_multinomial,
    moment_constraints,
    npml_solve,
    rem_solve,
    reproduce_paper_tables,
    scaled_differential_identity,
    solve_q1,
    solve_q2,
    validate_pmf,
)
from maxprob.experiment import GOLDEN, GOLDEN_J

from oracles import compositions, exact_argmax, exact_expectation, filtered_compositions

SIZES = (10, 50, 100, 500, 1000)


def failures(result):
    return [c.line() for c in result.checks if not c.passed]


def sup_distance(a, b):
    return max(abs(x - y) for x, y in zip(a, b))


def test_table1_reproduction(criterion):
    criterion(1, "Table 1 cells, J and limits at 4 dp, under 5 s")
    start = time.perf_counter()
    result = reproduce_paper_tables(tables=("table1",))
    elapsed = time.perf_counter() - start
    assert failures(result) == []
    for gen in ("q", "uniform"):
        table = result.tables["table1"][gen]
        assert {n: table.row("q1", n).J for n in SIZES} == GOLDEN_J
    assert result.tables["table1"]["q"].rounded(result.tables["table1"]["q"].row("rem")) == \
        ("0.0826", "0.0709", "0.4103", "0.4361")
    assert result.tables["table1"]["uniform"].rounded(result.tables["table1"]["uniform"].row("rem")) == \
        ("0.0788", "0.1462", "0.2714", "0.5037")
    assert elapsed < 5.0, f"took {elapsed:.2f} s"


def test_table2_reproduction(criterion):
    criterion(2, "Table 2 cells at 4 dp, expected vector nearer the limit, under 5 s")
    start = time.perf_counter()
    result = reproduce_paper_tables(tables=("table2",))
    elapsed = time.perf_counter() - start
    assert failures(result) == []
    modes = reproduce_paper_tables(tables=("table1",)).tables["table1"]
    for gen in ("q", "uniform"):
        means = result.tables["table2"][gen]
        limit = means.row("rem").cells
        for n in (50, 100, 500, 1000):
            mean_gap = sup_distance(means.row("q2", n).cells, limit)
            mode_gap = sup_distance(modes[gen].row("q1", n).cells, limit)
            assert mean_gap < mode_gap, (gen, n, mean_gap, mode_gap)
    assert elapsed < 5.0, f"took {elapsed:.2f} s"


def test_table3_reproduction(criterion):
    criterion(3, "Table 3 cells and JEM limits at 4 dp, under 10 s")
    start = time.perf_counter()
    result = reproduce_paper_tables(tables=("table3",))
    elapsed = time.perf_counter() - start
    assert failures(result) == []
    tables = result.tables["table3"]
    assert tables["q"].rounded(tables["q"].row("jem")) == ("0.0844", "0.0705", "0.4056", "0.4394")
    assert tables["uniform"].rounded(tables["uniform"].row("jem")) == \
        ("0.0926", "0.1395", "0.2433", "0.5246")
    assert GOLDEN[("table3", "q")][None] == "0.0844 0.0705 0.4056 0.4394"
    assert elapsed < 10.0, f"took {elapsed:.2f} s"


def test_npml_example(criterion):
    criterion(4, "NPML values at 4 dp and scale invariance within 1e-10")
    cons = moment_constraints([1, 2, 3, 4], "16/5")
    r4 = lambda rep: tuple(f"{v:.4f}" for v in rep.solution.probs)  # noqa: E731
    base = npml_solve((13, 9, 42, 36), cons)
    assert r4(base) == ("0.0860", "0.0704", "0.4013", "0.4423")
    assert r4(npml_solve((25, 25, 25, 25), cons)) == ("0.1009", "0.1384", "0.2204", "0.5403")
    for k in (2, 3, 5):
        scaled = npml_solve(tuple(k * c for c in (13, 9, 42, 36)), cons)
        assert sup_distance(scaled.solution.probs, base.solution.probs) <= 1e-10


def test_mode_converges_to_rem(criterion):
    criterion(5, "most probable vector within 2e-3 of the REM limit at n=1000, non-increasing gap")
    table = reproduce_paper_tables(tables=("table1",)).tables["table1"]["q"]
    limit = table.row("rem").cells
    gaps = [sup_distance(table.row("q1", n).cells, limit) for n in (100, 500, 1000)]
    assert gaps[-1] <= 2e-3
    assert all(b <= a for a, b in zip(gaps, gaps[1:])), gaps


def test_special_function_suite(criterion, reference_q, reference_constraints):
    criterion(6, "scaling identity, digamma gap decay and REM/JEM stationarity")
    rng = np.random.default_rng(1000)
    for _ in range(1000):
        m = int(rng.integers(2, 7))
        q = rng.dirichlet(np.ones(m))
        nvec = rng.uniform(0.1, 500, m)
        d = rng.normal(size=m)
        d -= d.mean()
        k = float(rng.uniform(0.1, 20))
        lhs, rhs = scaled_differential_identity(nvec, q, d, k)
        assert abs(lhs - rhs) <= 1e-12
    for k in (0.0, 0.5, 1.0):
        gaps = [abs(digamma_gap(10.0**j, k)) for j in range(2, 7)]
        assert all(b < a for a, b in zip(gaps, gaps[1:])), (k, gaps)
        assert gaps[-1] < 1e-5
    for gen in (reference_q, validate_pmf([0.25] * 4)):
        assert rem_solve(gen, reference_constraints).stationarity_residual <= 1e-8
        assert jem_solve(gen, reference_constraints).stationarity_residual <= 1e-8


def test_exact_oracle_equivalence(criterion):
    criterion(7, "Q1/Q2 match the exact-rational oracle; counts match brute force")
    rng = random.Random(20)
    checked = 0
    while checked < 150:
        m = rng.randint(1, 3)
        n = rng.randint(1, 12)
        q = [Fraction(rng.randint(1, 9)) for _ in range(m)]
        q = [v / sum(q) for v in q]
        if m > 1 and rng.random() < 0.7:
            x = [rng.randint(0, 5) for _ in range(m)]
            comp = rng.choice(list(compositions(n, m)))
            a = Fraction(sum(c * v for c, v in zip(comp, x)), n)
            if not min(x) < a < max(x):
                continue
            cons = moment_constraints(x, a)
            vectors = filtered_compositions(n, [x], [a])
        else:
            cons = moment_constraints(m=m)
            vectors = list(compositions(n, m))
        spec = build_working_set_spec(n, cons)
        pmf = validate_pmf(q)
        assert solve_q1(spec, pmf).vector.counts == exact_argmax(vectors, q)
        expected = [float(v) for v in exact_expectation(vectors, q)]
        got = solve_q2(spec, pmf).vector
        assert sup_distance(got, expected) <= 1e-10
        checked += 1

    checked = 0
    while checked < 150:
        m = rng.randint(1, 4)
        n = rng.randint(1, 30)
        rows, targets = [], []
        if m > 1:
            for _ in range(rng.randint(0, 2)):
                x = [rng.randint(0, 4) for _ in range(m)]
                comp = rng.choice(list(compositions(n, m))) if n <= 12 else \
                    _random_composition(rng, n, m)
                a = Fraction(sum(c * v for c, v in zip(comp, x)), n)
                if min(x) < a < max(x):
                    rows.append(x)
                    targets.append(a)
        cons = moment_constraints(rows, targets, m=m) if rows else moment_constraints(m=m)
        spec = build_working_set_spec(n, cons)
        brute = filtered_compositions(n, rows, targets) if rows else list(compositions(n, m))
        assert [t for t in enumerate_working_set(spec).tuples()] == brute
        assert count(spec) == len(brute)
        checked += 1


def _random_composition(rng, n, m):
    cuts = sorted(rng.randint(0, n) for _ in range(m - 1))
    bounds = [0, *cuts, n]
    return tuple(b - a for a, b in zip(bounds, bounds[1:]))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_multinomial_normalization(criterion, m):
    criterion(8, "multinomial sums to 1 within 1e-12 for m <= 3, n <= 8")
    rng = np.random.default_rng(m)
    for n in range(1, 9):
        for q in ([1 / m] * m, list(rng.dirichlet(np.ones(m)))):
            total = math.fsum(math.exp(log_multinomial(c, validate_pmf(q))) for c in compositions(n, m))
            assert abs(total - 1.0) <= 1e-12, (m, n, total)
