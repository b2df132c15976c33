"""Half-open arcs of the circle [0,1) with exact rational endpoints.

A :class:`CircleInterval` is one arc ``[start, start+length)`` read mod 1; it
may wrap through 0.  An :class:`IntervalSet` is a finite disjoint union of
non-wrapping pieces ``[a, b)`` with ``0 <= a < b <= 1``, kept sorted and
merged, so equal sets compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Iterator, List, Tuple

from sturmian_targets.models.errors import DomainError

Piece = Tuple[Fraction, Fraction]

ZERO = Fraction(0)
ONE = Fraction(1)


def frac_part(value: Fraction) -> Fraction:
    """{value}, the representative in [0,1)."""
    return value - (value.numerator // value.denominator)


@dataclass(frozen=True)
class CircleInterval:
    start: Fraction
    length: Fraction

    def __post_init__(self):
        if not (ZERO <= self.start < ONE):
            raise DomainError(f"arc start {self.start} outside [0,1)")
        if not (ZERO <= self.length <= ONE):
            raise DomainError(f"arc length {self.length} outside [0,1]")

    @classmethod
    def between(cls, left: Fraction, right: Fraction) -> "CircleInterval":
        """The arc from ``left`` counter-clockwise to ``right`` (both taken mod 1), [left, right)."""
        start = frac_part(Fraction(left))
        length = frac_part(Fraction(right) - start)
        return cls(start, length)

    @classmethod
    def full(cls, start: Fraction = ZERO) -> "CircleInterval":
        return cls(frac_part(Fraction(start)), ONE)

    @property
    def end(self) -> Fraction:
        return frac_part(self.start + self.length)

    @property
    def wraps(self) -> bool:
        return self.start + self.length > ONE

    def contains(self, x: Fraction) -> bool:
        return frac_part(x - self.start) < self.length

    def rotate(self, shift: Fraction) -> "CircleInterval":
        return CircleInterval(frac_part(self.start + shift), self.length)

    def pieces(self) -> List[Piece]:
        if self.length == ZERO:
            return []
        if self.length == ONE:
            return [(ZERO, ONE)]
        stop = self.start + self.length
        if stop <= ONE:
            return [(self.start, stop)]
        return [(ZERO, stop - ONE), (self.start, ONE)]

    def to_set(self) -> "IntervalSet":
        return IntervalSet(self.pieces())

    def midpoint(self) -> Fraction:
        return frac_part(self.start + self.length / 2)


class IntervalSet:
    """Sorted disjoint union of half-open pieces of [0,1)."""

    __slots__ = ("_pieces",)

    def __init__(self, pieces: Iterable[Piece] = ()):
        self._pieces: Tuple[Piece, ...] = tuple(self._merge(pieces))

    @staticmethod
    def _merge(pieces: Iterable[Piece]) -> List[Piece]:
        merged: List[Piece] = []
        for a, b in sorted((Fraction(a), Fraction(b)) for a, b in pieces if a < b):
            if merged and a <= merged[-1][1]:
                if b > merged[-1][1]:
                    merged[-1] = (merged[-1][0], b)
            else:
                merged.append((a, b))
        return merged

    @classmethod
    def from_arcs(cls, arcs: Iterable[CircleInterval]) -> "IntervalSet":
        return cls(piece for arc in arcs for piece in arc.pieces())

    @classmethod
    def _wrap(cls, pieces: List[Piece]) -> "IntervalSet":
        # pieces already sorted and disjoint
        out = cls()
        out._pieces = tuple(pieces)
        return out

    def __iter__(self) -> Iterator[Piece]:
        return iter(self._pieces)

    def __len__(self) -> int:
        return len(self._pieces)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self._pieces == other._pieces

    def __hash__(self):
        return hash(self._pieces)

    def __repr__(self) -> str:
        body = ", ".join(f"[{a}, {b})" for a, b in self._pieces)
        return f"IntervalSet({body})"

    @property
    def pieces(self) -> Tuple[Piece, ...]:
        return self._pieces

    def is_empty(self) -> bool:
        return not self._pieces

    def measure(self) -> Fraction:
        return sum((b - a for a, b in self._pieces), ZERO)

    def contains(self, x: Fraction) -> bool:
        lo, hi = 0, len(self._pieces)
        while lo < hi:
            mid = (lo + hi) // 2
            if self._pieces[mid][1] <= x:
                lo = mid + 1
            else:
                hi = mid
        return lo < len(self._pieces) and self._pieces[lo][0] <= x

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self._pieces + other._pieces)

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        out: List[Piece] = []
        mine, theirs = self._pieces, other._pieces
        i = k = 0
        while i < len(mine) and k < len(theirs):
            a = max(mine[i][0], theirs[k][0])
            b = min(mine[i][1], theirs[k][1])
            if a < b:
                out.append((a, b))
            if mine[i][1] < theirs[k][1]:
                i += 1
            else:
                k += 1
        return IntervalSet._wrap(out)

    def complement(self) -> "IntervalSet":
        out: List[Piece] = []
        cursor = ZERO
        for a, b in self._pieces:
            if cursor < a:
                out.append((cursor, a))
            cursor = b
        if cursor < ONE:
            out.append((cursor, ONE))
        return IntervalSet._wrap(out)

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        return self.intersection(other.complement())

    def is_subset(self, other: "IntervalSet") -> bool:
        return self.difference(other).is_empty()

    def is_disjoint(self, other: "IntervalSet") -> bool:
        return self.intersection(other).is_empty()


def floor_sum(n: int, m: int, a: int, b: int) -> int:
    """Sum of floor((a*i + b) / m) for 0 <= i < n, with n >= 0, m >= 1, a, b >= 0.

    Euclid-style reduction on (a, m), the same descent that produces
    continued-fraction elements, so the cost is logarithmic in m.
    """
    total = 0
    while True:
        if a >= m:
            total += n * (n - 1) // 2 * (a // m)
            a %= m
        if b >= m:
            total += n * (b // m)
            b %= m
        y_max = a * n + b
        if y_max < m:
            return total
        n, b = divmod(y_max, m)
        m, a = a, m


def count_progression_hits(start: Fraction, step: Fraction, n: int, arc: CircleInterval) -> int:
    """#{0 <= k < n : {start + k*step} in arc}, exactly, without iterating over k."""
    if n <= 0 or arc.length == ZERO:
        return 0
    if arc.length == ONE:
        return n
    den = lcm(start.denominator, step.denominator, arc.start.denominator, arc.length.denominator)
    c = int((start - arc.start) * den) % den
    a = int(step * den) % den
    h = int(arc.length * den)
    # [y mod den < h] = floor(y/den) - floor((y - h + den)/den) + 1
    return floor_sum(n, den, a, c) - floor_sum(n, den, a, c - h + den) + n
