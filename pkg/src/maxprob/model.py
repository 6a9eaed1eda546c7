"""Domain types shared by the enumerator, the kernels and the solvers.

All types are frozen dataclasses; build them through the validating
constructors (``validate_pmf``, ``moment_constraints``,
``build_working_set_spec``) rather than directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InfeasibleTarget,
    NegativeEntry,
    NonIntegerTarget,
    NotNormalized,
    ValidationError,
    ZeroEntryInGenerator,
)

NORMALIZATION_TOL = 1e-12

Role = Literal["generator", "solution"]


def parse_rational(value) -> Fraction:
    """Convert ``value`` to an exact rational.

    Strings may be ``"p/q"`` or decimal literals (``"3.2"`` -> 16/5). Floats
    are read through their shortest round-trip decimal, so ``0.13`` becomes
    13/100 rather than the binary expansion of the double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError(f"not a rational: {value!r}")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise ValidationError(f"not a finite number: {value!r}")
        return Fraction(repr(float(value)))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse rational from {value!r}") from exc
    raise ValidationError(f"not a rational: {value!r}")


@dataclass(frozen=True)
class Pmf:
    probs: tuple[float, ...]
    rational: tuple[Fraction, ...] = field(repr=False, compare=False)
    role: Role = field(default="solution", compare=False)

    @property
    def m(self) -> int:
        return len(self.probs)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.probs, dtype=float)

    def __len__(self) -> int:
        return len(self.probs)

    def __iter__(self):
        return iter(self.probs)

    def __getitem__(self, i):
        return self.probs[i]


def validate_pmf(values: Sequence, role: Role = "generator") -> Pmf:
    """Validate a probability vector.

    ``role="generator"`` additionally requires every entry to be strictly
    positive. Valid input is never renormalized.
    """
    if isinstance(values, Pmf):
        values = values.probs
    values = list(values)
    if not values:
        raise ValidationError("a pmf needs at least one entry")
    if role not in ("generator", "solution"):
        raise ValueError(f"unknown role {role!r}")

    probs = []
    rational = []
    for v in values:
        if isinstance(v, (str, Fraction)):
            r = parse_rational(v)
            probs.append(float(r))
            rational.append(r)
        else:
            f = float(v)
            if not math.isfinite(f):
                raise ValidationError(f"non-finite pmf entry {v!r}")
            probs.append(f)
            rational.append(parse_rational(f))

    if any(p < 0 for p in probs):
        raise NegativeEntry(f"negative entry in {probs}")
    total = math.fsum(probs)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"entries sum to {total!r}, not 1")
    if role == "generator" and any(p == 0 for p in probs):
        raise ZeroEntryInGenerator(f"generator has a zero entry: {probs}")
    return Pmf(tuple(probs), tuple(rational), role)


def uniform_pmf(m: int) -> Pmf:
    return validate_pmf([Fraction(1, m)] * m, role="generator")


@dataclass(frozen=True)
class OccurrenceVector:
    counts: tuple[int, ...]
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"sample size must be positive, got {self.n}")
        if any(c < 0 for c in self.counts):
            raise NegativeEntry(f"negative count in {self.counts}")
        if sum(self.counts) != self.n:
            raise ValidationError(
                f"counts {self.counts} sum to {sum(self.counts)}, not {self.n}"
            )

    @classmethod
    def of(cls, counts: Iterable[int]) -> "OccurrenceVector":
        counts = tuple(int(c) for c in counts)
        return cls(counts, sum(counts))

    @property
    def m(self) -> int:
        return len(self.counts)

    @property
    def normalized(self) -> tuple[float, ...]:
        return tuple(c / self.n for c in self.counts)

    def __len__(self) -> int:
        return len(self.counts)

    def __iter__(self):
        return iter(self.counts)


@dataclass(frozen=True)
class MomentConstraintSet:
    """Linear moment constraints ``sum_i p_i * rows[k][i] == targets[k]``."""

    m: int
    rows: tuple[tuple[Fraction, ...], ...] = ()
    targets: tuple[Fraction, ...] = ()

    @property
    def k(self) -> int:
        return len(self.targets)

    @property
    def x(self) -> np.ndarray:
        """Float matrix of shape (k, m)."""
        return np.array([[float(v) for v in row] for row in self.rows], dtype=float).reshape(
            self.k, self.m
        )

    @property
    def a(self) -> np.ndarray:
        return np.array([float(t) for t in self.targets], dtype=float)


def moment_constraints(x=None, targets=(), m: int | None = None) -> MomentConstraintSet:
    """Build a constraint set.

    ``x`` is either one support row shared by every target or one row per
    target. With no targets, only the support size ``m`` (or ``len(x)``) is
    recorded.
    """
    if not isinstance(targets, (list, tuple)):
        targets = [targets]
    targets = tuple(parse_rational(t) for t in targets)

    if x is None:
        if targets:
            raise ValidationError("moment targets given without support values")
        if m is None:
            raise ValidationError("support size unknown")
        return MomentConstraintSet(m)

    x = list(x)
    nested = bool(x) and isinstance(x[0], (list, tuple, np.ndarray))
    rows = [list(r) for r in x] if nested else [x]
    if not targets:
        size = len(rows[0])
        if m is not None and m != size:
            raise DimensionMismatch(f"support has {size} values, expected {m}")
        return MomentConstraintSet(size)
    if not nested:
        rows = rows * len(targets)
    if len(rows) != len(targets):
        raise DimensionMismatch(f"{len(rows)} support rows for {len(targets)} targets")

    size = len(rows[0])
    if size == 0:
        raise ValidationError("empty support")
    if m is not None and m != size:
        raise DimensionMismatch(f"support has {size} values, expected {m}")
    frows = []
    for row, a in zip(rows, targets):
        if len(row) != size:
            raise DimensionMismatch("support rows differ in length")
        row = tuple(parse_rational(v) for v in row)
        if not min(row) < a < max(row):
            raise InfeasibleTarget(
                f"target {a} is not strictly inside ({min(row)}, {max(row)})"
            )
        frows.append(row)
    return MomentConstraintSet(size, tuple(frows), targets)


@dataclass(frozen=True)
class WorkingSetSpec:
    """Intensional description of the occurrence-vector working set.

    ``weights[k]`` and ``int_targets[k]`` are constraint ``k`` cleared of
    denominators: ``sum_i counts[i] * weights[k][i] == int_targets[k]``.
    """

    n: int
    constraints: MomentConstraintSet
    weights: tuple[tuple[int, ...], ...] = ()
    int_targets: tuple[int, ...] = ()

    @property
    def m(self) -> int:
        return self.constraints.m

    def contains(self, counts: Sequence[int]) -> bool:
        if len(counts) != self.m or any(c < 0 for c in counts) or sum(counts) != self.n:
            return False
        return all(
            sum(c * w for c, w in zip(counts, row)) == t
            for row, t in zip(self.weights, self.int_targets)
        )


def build_working_set_spec(n: int, constraints: MomentConstraintSet) -> WorkingSetSpec:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValidationError(f"sample size must be a positive integer, got {n!r}")
    n = int(n)
    weights = []
    int_targets = []
    for row, a in zip(constraints.rows, constraints.targets):
        if not min(row) < a < max(row):
            raise InfeasibleTarget(f"target {a} is not strictly inside ({min(row)}, {max(row)})")
        an = a * n
        if an.denominator != 1:
            raise NonIntegerTarget(f"target {a} times n={n} is {an}, not an integer")
        scale = math.lcm(*(v.denominator for v in row))
        w = tuple(int(v * scale) for v in row)
        t = int(an * scale)
        g = math.gcd(*w, t)
        if g > 1:
            w = tuple(v // g for v in w)
            t //= g
        weights.append(w)
        int_targets.append(t)
    return WorkingSetSpec(n, constraints, tuple(weights), tuple(int_targets))


@dataclass(frozen=True)
class SolverReport:
    """Outcome of a Lagrangean solver.

    ``multipliers[0]`` belongs to the adding-up constraint, the rest to the
    moment constraints in order.
    """

    solution: Pmf
    multipliers: tuple[float, ...]
    residual: float
    stationarity_residual: float
    iterations: int
    method: str = ""
