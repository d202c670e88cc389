"""Finite unions of real intervals with exact endpoint openness.

An :class:`IntervalSet` is kept canonical: sorted, pairwise disjoint and
merged wherever the union of two members is itself an interval. Two sets
are equal as point sets exactly when their canonical tuples are equal.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    @classmethod
    def point(cls, t: float) -> "Interval":
        return cls(t, t, True, True)

    @property
    def empty(self) -> bool:
        return self.lo > self.hi or (self.lo == self.hi and not (self.lo_closed and self.hi_closed))

    @property
    def length(self) -> float:
        return 0.0 if self.empty else self.hi - self.lo

    def contains(self, t: float) -> bool:
        if t < self.lo or t > self.hi:
            return False
        if t == self.lo and not self.lo_closed:
            return False
        if t == self.hi and not self.hi_closed:
            return False
        return True

    def intersect(self, other: "Interval") -> "Interval":
        if self.lo > other.lo:
            lo, lo_closed = self.lo, self.lo_closed
        elif self.lo < other.lo:
            lo, lo_closed = other.lo, other.lo_closed
        else:
            lo, lo_closed = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hi_closed = self.hi, self.hi_closed
        elif self.hi > other.hi:
            hi, hi_closed = other.hi, other.hi_closed
        else:
            hi, hi_closed = self.hi, self.hi_closed and other.hi_closed
        return Interval(lo, hi, lo_closed, hi_closed)

    def shift(self, d: float) -> "Interval":
        return Interval(self.lo + d, self.hi + d, self.lo_closed, self.hi_closed)

    def __str__(self) -> str:
        return f"{'[' if self.lo_closed else '('}{self.lo:g},{self.hi:g}{']' if self.hi_closed else ')'}"


def _touches(a: Interval, b: Interval) -> bool:
    """``a`` ends where ``b`` starts (``a.lo <= b.lo``) and their union is an interval."""
    return b.lo < a.hi or (b.lo == a.hi and (a.hi_closed or b.lo_closed))


class IntervalSet:
    __slots__ = ("intervals", "_index")

    def __init__(self, intervals: Iterable[Interval] = ()):
        self.intervals: tuple[Interval, ...] = _canonical(intervals)
        self._index = None

    def _bounds(self):
        """Sorted lower ends, upper ends and running lengths, built on first use."""
        if self._index is None:
            los = [iv.lo for iv in self.intervals]
            his = [iv.hi for iv in self.intervals]
            cum = [0.0, *itertools.accumulate(iv.hi - iv.lo for iv in self.intervals)]
            self._index = (los, his, cum)
        return self._index

    def overlapping(self, lo: float, hi: float) -> range:
        """Indices of members whose closure meets ``[lo, hi]``."""
        los, his, _ = self._bounds()
        return range(bisect.bisect_left(his, lo), bisect.bisect_right(los, hi))

    @classmethod
    def of(cls, *specs) -> "IntervalSet":
        """Build from ``(lo, hi)`` (closed) or ``(lo, hi, lo_closed, hi_closed)`` tuples."""
        return cls(Interval(*s) if len(s) == 4 else Interval(s[0], s[1]) for s in specs)

    @classmethod
    def full(cls, horizon: float) -> "IntervalSet":
        return cls([Interval(0.0, horizon)])

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    def __hash__(self) -> int:
        return hash(self.intervals)

    def __repr__(self) -> str:
        return "{" + ", ".join(str(iv) for iv in self.intervals) + "}"

    def contains(self, t: float) -> bool:
        k = bisect.bisect_right(self._bounds()[0], t) - 1
        return k >= 0 and self.intervals[k].contains(t)

    @property
    def measure(self) -> float:
        return math.fsum(iv.length for iv in self.intervals)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.intervals + other.intervals)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        a, b = self.intervals, other.intervals
        i = j = 0
        while i < len(a) and j < len(b):
            x = a[i].intersect(b[j])
            if not x.empty:
                out.append(x)
            # drop whichever member finishes first
            if (a[i].hi, a[i].hi_closed) <= (b[j].hi, b[j].hi_closed):
                i += 1
            else:
                j += 1
        return IntervalSet(out)

    def complement(self, lo: float, hi: float) -> "IntervalSet":
        """Complement within the closed domain ``[lo, hi]``."""
        out = []
        cur, cur_closed = lo, True
        for iv in self.intervals:
            out.append(Interval(cur, iv.lo, cur_closed, not iv.lo_closed))
            cur, cur_closed = iv.hi, not iv.hi_closed
        out.append(Interval(cur, hi, cur_closed, True))
        return IntervalSet(out).clip(lo, hi)

    def shift(self, d: float) -> "IntervalSet":
        return IntervalSet(iv.shift(d) for iv in self.intervals)

    def clip(self, lo: float, hi: float) -> "IntervalSet":
        return self.intersect(IntervalSet([Interval(lo, hi)]))

    def measure_in(self, lo: float, hi: float) -> float:
        """Lebesgue measure of the set inside ``[lo, hi]``."""
        idx = self.overlapping(lo, hi)
        if hi <= lo or not idx:
            return 0.0
        first, last = idx[0], idx[-1]

        def part(k):
            iv = self.intervals[k]
            return max(min(iv.hi, hi) - max(iv.lo, lo), 0.0)

        if first == last:
            return part(first)
        # members strictly between the two ends lie inside the window
        cum = self._bounds()[2]
        return part(first) + (cum[last] - cum[first + 1]) + part(last)

    def points_in(self, window: Interval) -> int:
        """Number of members meeting ``window``; a count of points when the overlap has measure zero."""
        return sum(1 for k in self.overlapping(window.lo, window.hi)
                   if not self.intervals[k].intersect(window).empty)


def _canonical(intervals: Iterable[Interval]) -> tuple[Interval, ...]:
    items = sorted((iv for iv in intervals if not iv.empty), key=lambda iv: (iv.lo, not iv.lo_closed))
    out: list[Interval] = []
    for iv in items:
        if out and _touches(out[-1], iv):
            last = out[-1]
            if iv.hi > last.hi:
                hi, hi_closed = iv.hi, iv.hi_closed
            elif iv.hi < last.hi:
                hi, hi_closed = last.hi, last.hi_closed
            else:
                hi, hi_closed = last.hi, last.hi_closed or iv.hi_closed
            out[-1] = Interval(last.lo, hi, last.lo_closed, hi_closed)
        else:
            out.append(iv)
    return tuple(out)


def measure_window(s: IntervalSet, window: Interval, t: float) -> float:
    """Measure of ``s`` inside ``window + t``."""
    if window.empty:
        return 0.0
    return s.measure_in(window.lo + t, window.hi + t)
