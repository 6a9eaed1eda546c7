"""Exact finite-n answers obtained by scoring the whole working set.

Four questions are answered for a working set H_n and a generator q:

* ``solve_q1``: the most probable vector, argmax of pi(n | q);
* ``solve_q2``: the expected vector under pi(n | q) restricted to H_n;
* ``solve_q4``: the argmax of the joint score pi(n | q) * pi(q n | n / n);
* ``solve_q4_expected``: the expected vector under that joint score.

Scoring runs over fixed lexicographic blocks of H_n (see
``WorkingSetStream.blocks``), optionally on a thread pool. Blocks are reduced
in order, so the result does not depend on the number of threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Literal

import numpy as np

from .errors import AllScoresImpossible, DimensionMismatch, EmptyWorkingSet
from .kernel import (
    _as_generator,
    lgamma_table,
    log_gen_multinomial_rows,
    log_multinomial_rows,
)
from .model import OccurrenceVector, Pmf, WorkingSetSpec
from .workingset import enumerate_working_set

TIE_WINDOW = 1e-12
BLOCK_SIZE = 16384

GeneratedCounts = Literal["rounded", "gamma"]


@dataclass(frozen=True)
class FiniteAnswer:
    """A finite-n answer.

    ``ties`` lists the co-optimal vectors other than ``vector`` (argmax
    questions only), in lexicographic order.
    """

    question: str
    vector: OccurrenceVector | tuple[float, ...]
    normalized: tuple[float, ...]
    J: int
    log_score: float | None = None
    ties: list[OccurrenceVector] = field(default_factory=list)


Scorer = Callable[[np.ndarray], np.ndarray]


def _scored_blocks(spec: WorkingSetSpec, scorer: Scorer, threads: int | None):
    blocks = enumerate_working_set(spec).blocks(BLOCK_SIZE)

    def work(block):
        arr = block.to_array()
        return arr, scorer(arr)

    if threads and threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, blocks))
    else:
        results = [work(b) for b in blocks]
    return [(a, s) for a, s in results if len(a)]


def _argmax(question: str, spec: WorkingSetSpec, scorer: Scorer, threads) -> FiniteAnswer:
    results = _scored_blocks(spec, scorer, threads)
    J = sum(len(a) for a, _ in results)
    if J == 0:
        raise EmptyWorkingSet(f"no occurrence vector satisfies the constraints at n={spec.n}")
    best = max(float(s.max()) for _, s in results)
    if best == -math.inf:
        raise AllScoresImpossible(f"every vector in the working set scores -inf at n={spec.n}")
    winners = []
    for arr, scores in results:
        idx = np.flatnonzero(scores >= best - TIE_WINDOW)
        winners.extend(tuple(int(c) for c in arr[i]) for i in idx)
    # blocks are lexicographic and in order, so winners already are
    vectors = [OccurrenceVector(w, spec.n) for w in winners]
    top = vectors[0]
    return FiniteAnswer(
        question=question,
        vector=top,
        normalized=top.normalized,
        J=J,
        log_score=best,
        ties=vectors[1:],
    )


def _expectation(question: str, spec: WorkingSetSpec, scorer: Scorer, threads) -> FiniteAnswer:
    results = _scored_blocks(spec, scorer, threads)
    J = sum(len(a) for a, _ in results)
    if J == 0:
        raise EmptyWorkingSet(f"no occurrence vector satisfies the constraints at n={spec.n}")
    # first pass: global max; second pass: rescaled weights
    top = max(float(s.max()) for _, s in results)
    if top == -math.inf:
        raise AllScoresImpossible(f"every vector in the working set scores -inf at n={spec.n}")
    total = 0.0
    moment = np.zeros(spec.m)
    for arr, scores in results:
        w = np.exp(scores - top)
        total += float(w.sum())
        moment += w @ arr.astype(float)
    mean = moment / total
    vector = tuple(float(v) for v in mean)
    return FiniteAnswer(
        question=question,
        vector=vector,
        normalized=tuple(v / spec.n for v in vector),
        J=J,
    )


def _check(spec: WorkingSetSpec, q) -> Pmf:
    q = _as_generator(q)
    if len(q) != spec.m:
        raise DimensionMismatch(f"generator has {len(q)} cells, working set has {spec.m}")
    return q


def _q1_scorer(spec: WorkingSetSpec, q: Pmf) -> Scorer:
    table = lgamma_table(spec.n)
    return lambda arr: log_multinomial_rows(arr, q, table)


def generated_counts(q: Pmf, n: int, mode: GeneratedCounts = "rounded") -> tuple[float, ...]:
    """The vector ``q n`` that the candidate ``n / n`` must generate.

    ``"rounded"`` rounds each exact rational ``q_i n`` half-to-even to an
    integer occurrence vector; ``"gamma"`` keeps ``q n`` real and relies on the
    Gamma extension of the multinomial.
    """
    if mode == "gamma":
        return tuple(p * n for p in q.probs)
    if mode == "rounded":
        return tuple(float(round(Fraction(r) * n)) for r in q.rational)
    raise ValueError(f"unknown generated-count mode {mode!r}")


def _q4_scorer(spec: WorkingSetSpec, q: Pmf, mode: GeneratedCounts) -> Scorer:
    first = _q1_scorer(spec, q)
    gen = generated_counts(q, spec.n, mode)

    def score(arr):
        return first(arr) + log_gen_multinomial_rows(gen, arr, spec.n)

    return score


def solve_q1(spec: WorkingSetSpec, q, threads: int | None = None) -> FiniteAnswer:
    """Most probable occurrence vector of the working set under ``q``.

    Ties within 1e-12 in log score go to the lexicographically smallest
    vector; the others are listed in ``ties``.
    """
    q = _check(spec, q)
    return _argmax("q1", spec, _q1_scorer(spec, q), threads)


def solve_q2(spec: WorkingSetSpec, q, threads: int | None = None) -> FiniteAnswer:
    """Expected occurrence vector of the working set under ``q``."""
    q = _check(spec, q)
    return _expectation("q2", spec, _q1_scorer(spec, q), threads)


def solve_q4(spec: WorkingSetSpec, q, threads: int | None = None,
             mode: GeneratedCounts = "rounded") -> FiniteAnswer:
    """Vector maximizing pi(n | q) * pi(q n | n / n).

    A vector with a zero cell where ``q n`` is positive cannot generate
    ``q n`` and scores ``-inf``.
    """
    q = _check(spec, q)
    return _argmax("q4", spec, _q4_scorer(spec, q, mode), threads)


def solve_q4_expected(spec: WorkingSetSpec, q, threads: int | None = None,
                      mode: GeneratedCounts = "rounded") -> FiniteAnswer:
    q = _check(spec, q)
    return _expectation("q4_expected", spec, _q4_scorer(spec, q, mode), threads)
