"""Exact enumeration and counting of the occurrence-vector working set.

The working set for ``spec`` is every vector of nonnegative integers
``(n_1, ..., n_m)`` with ``sum(n_i) == n`` and every cleared moment
constraint ``sum(n_i * w_i) == t`` holding exactly.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .model import OccurrenceVector, WorkingSetSpec

INT64_LIMIT = 2**63 - 1


def _floor_div(a: int, b: int) -> int:
    return a // b


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _count_range(spec: WorkingSetSpec, i: int, remaining: int, sums: list[int],
                 suffix_lo: list[list[int]], suffix_hi: list[list[int]]) -> tuple[int, int]:
    """Feasible values of cell ``i`` given the remaining mass and sums.

    Each constraint must still be reachable by spreading the rest of the mass
    over cells ``i+1..m-1``, i.e. for the remainder ``r = remaining - k`` the
    leftover sum must lie in ``[r * min(w_suffix), r * max(w_suffix)]``.
    """
    lo, hi = 0, remaining
    for c, row in enumerate(spec.weights):
        w = row[i]
        s = sums[c]
        wlo = suffix_lo[c][i + 1]
        whi = suffix_hi[c][i + 1]
        # k * (w - wlo) <= s - remaining * wlo
        for coef, rhs in ((w - wlo, s - remaining * wlo), (whi - w, remaining * whi - s)):
            if coef > 0:
                hi = min(hi, _floor_div(rhs, coef))
            elif coef < 0:
                lo = max(lo, _ceil_div(rhs, coef))
            elif rhs < 0:
                return 1, 0
    return lo, hi


class WorkingSetStream:
    """Lazily enumerates the working set in increasing lexicographic order.

    A stream may be restricted to first-cell values in ``[first_lo, first_hi]``;
    such restrictions are contiguous lexicographic ranges, which is what
    :meth:`split` and :meth:`blocks` hand out for parallel scoring.
    """

    def __init__(self, spec: WorkingSetSpec, first_lo: int = 0, first_hi: int | None = None):
        self.spec = spec
        self.first_lo = first_lo
        self.first_hi = spec.n if first_hi is None else first_hi
        self._len: int | None = None

    def __repr__(self) -> str:
        return (f"WorkingSetStream(n={self.spec.n}, m={self.spec.m}, "
                f"first=[{self.first_lo}, {self.first_hi}])")

    def tuples(self) -> Iterator[tuple[int, ...]]:
        spec = self.spec
        m = spec.m
        suffix_lo = []
        suffix_hi = []
        for row in spec.weights:
            lo = [0] * (m + 1)
            hi = [0] * (m + 1)
            for i in range(m - 1, -1, -1):
                lo[i] = row[i] if i == m - 1 else min(row[i], lo[i + 1])
                hi[i] = row[i] if i == m - 1 else max(row[i], hi[i + 1])
            suffix_lo.append(lo)
            suffix_hi.append(hi)

        prefix = [0] * m
        sums = list(spec.int_targets)

        def rec(i: int, remaining: int) -> Iterator[tuple[int, ...]]:
            if i == m - 1:
                for c, row in enumerate(spec.weights):
                    if sums[c] != remaining * row[i]:
                        return
                prefix[i] = remaining
                yield tuple(prefix)
                return
            lo, hi = _count_range(spec, i, remaining, sums, suffix_lo, suffix_hi)
            if i == 0:
                lo = max(lo, self.first_lo)
                hi = min(hi, self.first_hi)
            for k in range(lo, hi + 1):
                prefix[i] = k
                for c, row in enumerate(spec.weights):
                    sums[c] -= k * row[i]
                yield from rec(i + 1, remaining - k)
                for c, row in enumerate(spec.weights):
                    sums[c] += k * row[i]

        if m == 1:
            if self.first_lo <= spec.n <= self.first_hi:
                yield from rec(0, spec.n)
            return
        yield from rec(0, spec.n)

    def __iter__(self) -> Iterator[OccurrenceVector]:
        n = self.spec.n
        for t in self.tuples():
            yield OccurrenceVector(t, n)

    def to_array(self) -> np.ndarray:
        """All vectors as an int64 array of shape (J, m)."""
        rows = list(self.tuples())
        if not rows:
            return np.zeros((0, self.spec.m), dtype=np.int64)
        return np.array(rows, dtype=np.int64)

    def __len__(self) -> int:
        if self._len is None:
            sizes = first_value_sizes(self.spec)
            self._len = sum(sizes[self.first_lo:self.first_hi + 1])
        return self._len

    def _ranges(self, target: int) -> list["WorkingSetStream"]:
        sizes = first_value_sizes(self.spec)
        last = max((v for v in range(self.first_lo, self.first_hi + 1) if sizes[v]),
                   default=self.first_hi)
        out = []
        start = self.first_lo
        acc = 0
        for v in range(self.first_lo, last):
            acc += sizes[v]
            if acc >= target:
                out.append(WorkingSetStream(self.spec, start, v))
                start = v + 1
                acc = 0
        if start <= self.first_hi:
            out.append(WorkingSetStream(self.spec, start, self.first_hi))
        return out

    def split(self, parts: int) -> list["WorkingSetStream"]:
        """Split into at most ``parts`` contiguous lexicographic ranges of
        roughly equal size. Concatenating the pieces restores the stream."""
        parts = max(1, int(parts))
        total = len(self)
        return self._ranges(max(1, -(-total // parts)))

    def blocks(self, size: int = 16384) -> list["WorkingSetStream"]:
        """Contiguous ranges of about ``size`` vectors each.

        The partition depends only on the spec and ``size``, never on how many
        workers consume it.
        """
        return self._ranges(max(1, size))


def enumerate_working_set(spec: WorkingSetSpec) -> WorkingSetStream:
    return WorkingSetStream(spec)


def _suffix_table(spec: WorkingSetSpec, start: int):
    """Counting table over cells ``start..m-1``.

    Returns ``(table, shifts)`` where ``table[c, s_1, ..., s_K]`` is the number
    of ways to place ``c`` units on those cells with shifted weighted sums
    ``s_k``; weights are shifted by their minimum over the suffix so every
    index is nonnegative. A float64 shadow guards against int64 overflow.
    """
    n = spec.n
    cells = range(start, spec.m)
    shifts = []
    caps = []
    for row, t in zip(spec.weights, spec.int_targets):
        base = min((row[i] for i in range(spec.m)), default=0)
        shifts.append(base)
        caps.append(t - n * base)
    if any(c < 0 for c in caps):
        return None, shifts
    shape = (n + 1, *(c + 1 for c in caps))
    table = np.zeros(shape, dtype=np.int64)
    shadow = np.zeros(shape, dtype=np.float64)
    table[(0,) * len(shape)] = 1
    shadow[(0,) * len(shape)] = 1.0
    for i in cells:
        w = [row[i] - b for row, b in zip(spec.weights, shifts)]
        dst = tuple(slice(wk, None) for wk in w)
        src = tuple(slice(0, cap + 1 - wk) for wk, cap in zip(w, caps))
        if any(wk > cap for wk, cap in zip(w, caps)):
            continue
        # int64 may wrap inside this loop; the shadow check below rejects it
        with np.errstate(over="ignore"):
            for c in range(1, n + 1):
                table[(c, *dst)] += table[(c - 1, *src)]
                shadow[(c, *dst)] += shadow[(c - 1, *src)]
        if shadow.max() > 2.0**62:
            raise OverflowError("working-set count exceeds the 64-bit range")
    return table, shifts


_SIZES_CACHE: dict[WorkingSetSpec, list[int]] = {}


def first_value_sizes(spec: WorkingSetSpec) -> list[int]:
    """Number of working-set vectors for each first-cell value 0..n."""
    cached = _SIZES_CACHE.get(spec)
    if cached is not None:
        return cached
    n = spec.n
    if spec.m == 1:
        sizes = [0] * (n + 1)
        if spec.contains((n,)):
            sizes[n] = 1
    else:
        table, shifts = _suffix_table(spec, 1)
        sizes = [0] * (n + 1)
        if table is not None:
            caps = [t - n * b for t, b in zip(spec.int_targets, shifts)]
            for k in range(n + 1):
                idx = [n - k]
                ok = True
                for row, b, cap in zip(spec.weights, shifts, caps):
                    s = cap - k * (row[0] - b)
                    if s < 0:
                        ok = False
                        break
                    idx.append(s)
                if ok:
                    sizes[k] = int(table[tuple(idx)])
    total = 0
    for s in sizes:
        total += s
        if total > INT64_LIMIT:
            raise OverflowError("working-set count exceeds the 64-bit range")
    if len(_SIZES_CACHE) > 256:
        _SIZES_CACHE.clear()
    _SIZES_CACHE[spec] = sizes
    return sizes


def count(spec: WorkingSetSpec) -> int:
    """Size of the working set, computed without materializing it."""
    return sum(first_value_sizes(spec))
