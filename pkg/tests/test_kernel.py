import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from scipy.special import digamma as scipy_digamma

from maxprob import (
    digamma,
    digamma_gap,
    log_gen_multinomial,
    log_multinomial,
    scaled_differential_identity,
)
from maxprob.errors import (
    CountSumMismatch,
    DimensionMismatch,
    DirectionNotAddingToZero,
    NonPositiveArgument,
    NonPositiveCount,
)
from maxprob.kernel import lgamma_table, log_gen_multinomial_rows, log_multinomial_rows

from oracles import compositions, exact_multinomial, mp_log_gen_multinomial

REFERENCE_Q = (0.13, 0.09, 0.42, 0.36)
REFERENCE_Q_EXACT = tuple(Fraction(v) for v in ("0.13", "0.09", "0.42", "0.36"))

# log of 10!/(1! 0! 5! 4!) * 0.13 * 0.42^5 * 0.36^4 = 21945749275359/610351562500000
N10_WINNER_LOG = -3.325461657232571726886305482526165
# 50-digit evaluation of the Gamma-extended formula at the double inputs below
GEN_Q_TIMES_10_LOG = -3.229174922595600742648116727580992


def test_fair_coin_pair():
    assert log_multinomial((1, 1), (0.5, 0.5)) == pytest.approx(math.log(0.5), abs=1e-15)


@pytest.mark.parametrize("n", [1, 7, 100])
def test_single_cell_event(n):
    q = (0.3, 0.5, 0.2)
    assert log_multinomial((n, 0, 0), q) == pytest.approx(n * math.log(0.3), rel=1e-14)


def test_n10_winner_against_exact_factorials():
    exact = exact_multinomial((1, 0, 5, 4), REFERENCE_Q_EXACT)
    assert exact == Fraction(21945749275359, 610351562500000)
    got = log_multinomial((1, 0, 5, 4), REFERENCE_Q)
    assert got == pytest.approx(N10_WINNER_LOG, rel=1e-12)
    assert got == pytest.approx(math.log(exact), rel=1e-12)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        log_multinomial((1, 2), REFERENCE_Q)
    with pytest.raises(DimensionMismatch):
        log_gen_multinomial((1.0, 2.0), REFERENCE_Q)


@pytest.mark.parametrize("m,n", [(m, n) for m in (1, 2, 3) for n in range(1, 9)])
def test_normalization_over_all_compositions(m, n):
    for q in ([1 / m] * m, [0.2, 0.3, 0.5][:m] if m == 3 else [0.7, 0.3][:m] if m == 2 else [1.0]):
        total = math.fsum(math.exp(log_multinomial(c, q)) for c in compositions(n, m))
        assert abs(total - 1.0) <= 1e-12


def test_permutation_invariance():
    rng = np.random.default_rng(3)
    for _ in range(200):
        q = rng.dirichlet(np.ones(4))
        counts = rng.multinomial(25, q)
        perm = rng.permutation(4)
        a = log_multinomial(counts, q)
        b = log_multinomial(counts[perm], q[perm])
        assert a == pytest.approx(b, rel=1e-13, abs=1e-13)


def test_gen_equals_multinomial_on_integers():
    rng = np.random.default_rng(4)
    for _ in range(300):
        m = rng.integers(1, 6)
        q = rng.dirichlet(np.ones(m))
        counts = rng.multinomial(rng.integers(1, 2000), q)
        a = log_multinomial(counts, q)
        b = log_gen_multinomial([float(c) for c in counts], q)
        assert abs(a - b) <= 1e-13 * max(1.0, abs(a))


def test_gen_zero_base_with_positive_count_is_impossible():
    counts = [p * 10 for p in REFERENCE_Q]
    assert log_gen_multinomial(counts, (0.1, 0.0, 0.5, 0.4)) == -math.inf


def test_gen_zero_count_on_zero_base_is_fine():
    assert math.isfinite(log_gen_multinomial((1.5, 0.0, 2.5), (0.5, 0.0, 0.5)))


def test_gen_high_precision_oracle():
    counts = (1.3, 0.9, 4.2, 3.6)
    oracle = mp_log_gen_multinomial(counts, REFERENCE_Q)
    assert float(oracle) == pytest.approx(GEN_Q_TIMES_10_LOG, rel=1e-15)
    assert log_gen_multinomial(counts, REFERENCE_Q) == pytest.approx(float(oracle), rel=1e-13)


def test_gen_count_sum_check():
    with pytest.raises(CountSumMismatch):
        log_gen_multinomial((1.3, 0.9, 4.2, 3.6), REFERENCE_Q, n=11)
    assert math.isfinite(log_gen_multinomial((1.3, 0.9, 4.2, 3.6), REFERENCE_Q, n=10))


def test_row_scorers_match_scalar():
    rng = np.random.default_rng(5)
    q = rng.dirichlet(np.ones(4))
    rows = np.array([rng.multinomial(40, q) for _ in range(50)])
    table = lgamma_table(40)
    got = log_multinomial_rows(rows, q, table)
    for r, g in zip(rows, got):
        assert g == pytest.approx(log_multinomial(r, q), rel=1e-14, abs=1e-14)
    gen = [v * 40 for v in q]
    got = log_gen_multinomial_rows(gen, rows, 40)
    for r, g in zip(rows, got):
        expected = log_gen_multinomial(gen, [c / 40 for c in r])
        assert g == expected or g == pytest.approx(expected, rel=1e-13)


# -- digamma and the gap to the logarithm ------------------------------------------

def test_digamma_against_scipy():
    ts = np.concatenate([np.geomspace(1e-3, 1e7, 400), [0.5, 1, 2, 9.999, 10, 10.001]])
    for t in ts:
        assert digamma(t) == pytest.approx(scipy_digamma(t), rel=1e-13, abs=1e-13)


def test_digamma_gap_at_one():
    assert digamma_gap(1, 0) == pytest.approx(-0.5772156649015329, abs=1e-15)


def test_digamma_gap_large_t():
    assert abs(digamma_gap(1e6, 1)) < 1e-5
    # 1/(2t) < ln t - psi(t) < 1/t
    assert 1 / 2e6 < -digamma_gap(1e6, 0) < 1 / 1e6


@pytest.mark.parametrize("k", [0, 0.5, 1])
def test_digamma_gap_vanishes_monotonically(k):
    gaps = [abs(digamma_gap(10.0**j, k)) for j in range(2, 7)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    with mpmath.workdps(40):
        for j, g in zip(range(2, 7), gaps):
            t = mpmath.mpf(10) ** j
            ref = abs(mpmath.digamma(t) - mpmath.log(t + mpmath.mpf(k)))
            assert g == pytest.approx(float(ref), rel=1e-9)


def test_digamma_rejects_nonpositive():
    with pytest.raises(NonPositiveArgument):
        digamma_gap(0, 1)
    with pytest.raises(NonPositiveArgument):
        digamma(-2.0)


# -- scaling identity --------------------------------------------------------------

def test_zero_direction():
    assert scaled_differential_identity((1, 2, 3, 4), REFERENCE_Q, (0, 0, 0, 0), 3.0) == (0.0, 0.0)


def test_unit_scale_is_identical():
    lhs, rhs = scaled_differential_identity((1.5, 2, 3, 4), REFERENCE_Q, (0.5, -1, 0.25, 0.25), 1.0)
    assert lhs == rhs


def test_scaling_identity_random_draws():
    rng = np.random.default_rng(2000)
    for _ in range(1000):
        m = int(rng.integers(2, 7))
        q = rng.dirichlet(np.ones(m))
        nvec = rng.uniform(0.1, 500, m)
        d = rng.normal(size=m)
        d -= d.mean()
        lhs, rhs = scaled_differential_identity(nvec, q, d, 7.0)
        assert abs(lhs - rhs) <= 1e-12


def test_scaling_identity_errors():
    with pytest.raises(NonPositiveCount):
        scaled_differential_identity((0, 1, 2, 3), REFERENCE_Q, (1, -1, 0, 0), 2)
    with pytest.raises(DirectionNotAddingToZero):
        scaled_differential_identity((1, 1, 2, 3), REFERENCE_Q, (1, 0, 0, 0), 2)
