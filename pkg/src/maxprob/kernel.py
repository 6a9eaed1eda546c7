"""Log-space multinomial scoring and the special-function checks behind it.

Probabilities of occurrence vectors at n ~ 1000 underflow doubles, so every
score here is a natural log. ``-inf`` marks an impossible event.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import (
    CountSumMismatch,
    DimensionMismatch,
    DirectionNotAddingToZero,
    NonPositiveArgument,
    NonPositiveCount,
    ValidationError,
)
from .model import OccurrenceVector, Pmf, validate_pmf

NEG_INF = -math.inf


def _as_generator(q) -> Pmf:
    if isinstance(q, Pmf):
        if any(p <= 0 for p in q.probs):
            raise ValidationError("generator must be strictly positive")
        return q
    return validate_pmf(q, role="generator")


def _log_mult(total: float, counts: Sequence[float], probs: Sequence[float]) -> float:
    # term order is shared by the integer and real-count entry points
    acc = math.lgamma(total + 1.0)
    for c in counts:
        acc -= math.lgamma(c + 1.0)
    for c, p in zip(counts, probs):
        if c == 0:
            continue
        if p == 0:
            return NEG_INF
        acc += c * math.log(p)
    return acc


def log_multinomial(nvec, q) -> float:
    """``ln(n! / prod(n_i!) * prod(q_i ** n_i))`` for integer counts."""
    if not isinstance(nvec, OccurrenceVector):
        nvec = OccurrenceVector.of(nvec)
    q = _as_generator(q)
    if len(nvec) != len(q):
        raise DimensionMismatch(f"{len(nvec)} counts against {len(q)} probabilities")
    return _log_mult(float(nvec.n), [float(c) for c in nvec.counts], q.probs)


def log_gen_multinomial(counts: Sequence[float], base, n: float | None = None) -> float:
    """Gamma-function extension of :func:`log_multinomial` to real counts.

    Factorials become ``Gamma(c + 1)`` and ``0 * ln 0`` is taken as 0. A
    positive count on a zero-probability cell yields ``-inf``. When ``n`` is
    given, the counts must add up to it within 1e-9.
    """
    probs = base.probs if isinstance(base, Pmf) else tuple(float(b) for b in base)
    counts = [float(c) for c in counts]
    if len(counts) != len(probs):
        raise DimensionMismatch(f"{len(counts)} counts against {len(probs)} probabilities")
    if any(c < 0 or not math.isfinite(c) for c in counts):
        raise ValidationError(f"counts must be finite and nonnegative: {counts}")
    if any(p < 0 for p in probs):
        raise ValidationError(f"negative base probability: {probs}")
    total = math.fsum(counts)
    if n is not None:
        if abs(total - n) > 1e-9:
            raise CountSumMismatch(f"counts sum to {total}, expected {n}")
        total = float(n)
    return _log_mult(total, counts, probs)


def lgamma_table(n: int) -> np.ndarray:
    """``ln(k!)`` for k = 0..n."""
    return np.array([math.lgamma(k + 1.0) for k in range(n + 1)], dtype=float)


def log_multinomial_rows(counts: np.ndarray, q, table: np.ndarray | None = None) -> np.ndarray:
    """Row-wise :func:`log_multinomial` for a (J, m) integer array sharing one n."""
    q = _as_generator(q)
    counts = np.asarray(counts, dtype=np.int64)
    if counts.ndim != 2 or counts.shape[1] != len(q):
        raise DimensionMismatch(f"count array of shape {counts.shape} against m={len(q)}")
    if counts.shape[0] == 0:
        return np.zeros(0)
    n = int(counts[0].sum())
    if table is None:
        table = lgamma_table(n)
    acc = np.full(counts.shape[0], math.lgamma(n + 1.0))
    for i in range(counts.shape[1]):
        acc -= table[counts[:, i]]
    for i, p in enumerate(q.probs):
        acc += counts[:, i] * math.log(p)
    return acc


def log_gen_multinomial_rows(gen_counts: Sequence[float], bases: np.ndarray, n: int) -> np.ndarray:
    """Row-wise :func:`log_gen_multinomial` of one fixed real count vector
    against many bases ``bases[j] / n`` (integer rows summing to ``n``)."""
    gen_counts = [float(c) for c in gen_counts]
    bases = np.asarray(bases)
    total = math.fsum(gen_counts)
    const = math.lgamma(total + 1.0)
    for c in gen_counts:
        const -= math.lgamma(c + 1.0)
    acc = np.full(bases.shape[0], const)
    with np.errstate(divide="ignore"):
        for i, c in enumerate(gen_counts):
            if c == 0:
                continue
            acc += c * np.log(bases[:, i] / n)
    return acc


def digamma(t: float) -> float:
    """Digamma function for t > 0 (recurrence up to 10, then asymptotic series)."""
    t = float(t)
    if not t > 0:
        raise NonPositiveArgument(f"digamma needs t > 0, got {t}")
    shift = 0.0
    while t < 10.0:
        shift -= 1.0 / t
        t += 1.0
    return shift + math.log(t) + _asymptotic_tail(t)


def _asymptotic_tail(t: float) -> float:
    inv = 1.0 / t
    inv2 = inv * inv
    series = inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (
        1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 / 12))))))
    return -0.5 * inv - series


def digamma_gap(t: float, k: float = 0.0) -> float:
    """``psi(t) - ln(t + k)``; tends to 0 as t grows, for any fixed k >= 0."""
    t = float(t)
    k = float(k)
    if not t > 0:
        raise NonPositiveArgument(f"digamma_gap needs t > 0, got {t}")
    if k < 0:
        raise ValidationError(f"k must be nonnegative, got {k}")
    if t < 10.0:
        return digamma(t) - math.log(t + k)
    return _asymptotic_tail(t) - math.log1p(k / t)


def scaled_differential_identity(nvec, q, d, k: float) -> tuple[float, float]:
    """Both sides of ``dv(k n) = k dv(n)`` in directional-derivative form.

    With ``g(n)_i = -ln n_i + ln q_i`` this returns
    ``(<g(k n), k d>, k <g(n), d>)``.
    """
    nvec = np.asarray(nvec, dtype=float)
    d = np.asarray(d, dtype=float)
    q = _as_generator(q)
    if nvec.shape != (len(q),) or d.shape != (len(q),):
        raise DimensionMismatch("nvec, q and d must have the same length")
    if np.any(nvec <= 0):
        raise NonPositiveCount("every count must be positive")
    if abs(math.fsum(d)) > 1e-12:
        raise DirectionNotAddingToZero(f"direction sums to {math.fsum(d)}")
    k = float(k)
    if not k > 0:
        raise NonPositiveArgument(f"scale must be positive, got {k}")
    logq = np.log(q.array)
    lhs = math.fsum((-np.log(k * nvec) + logq) * (k * d))
    rhs = k * math.fsum((-np.log(nvec) + logq) * d)
    return lhs, rhs
