"""Disjoint ball collections covering a digit-defined compact.

At a finite place the balls of radius p**-m are the depth-m digit cylinders,
which partition the compact.  At the real place centers are chosen greedily
along each coordinate, consecutive centers at least 2r apart, so the open
r-balls are disjoint and their 3x enlargements cover the compact.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from ..errors import DomainError
from ..exactnum import ppow, snap_exponent
from ..places import Place, RationalPoint
from .balls import SBall, radius_schedule

MAX_REAL_CENTERS = 10**7


@dataclass(frozen=True)
class PlacePoint:
    """A point of Q_S given by (possibly different) rational coordinates at each place."""

    by_place: tuple  # ((Place, RationalPoint), ...)

    def at(self, place: Place) -> RationalPoint:
        for v, x in self.by_place:
            if v == place:
                return x
        raise KeyError(str(place))

    @property
    def d(self) -> int:
        return self.by_place[0][1].d

    def __str__(self) -> str:
        return "[" + "; ".join(f"{v}:{x}" for v, x in self.by_place) + "]"


def next_in_support(comp, coord: int, t: Fraction) -> Optional[Fraction]:
    """Least point of the real digit compact that is >= t, or None if there is none in [t, 1)."""
    b, D = comp.base, comp.digits[coord]
    if t <= 0:
        return comp.tail_value(coord, ())
    if t >= 1:
        return None
    # digits of t up to the first repeat of the remainder
    digits, seen, r = [], {}, t
    while r != 0 and r not in seen:
        seen[r] = len(digits)
        s = r * b
        a = s.numerator // s.denominator
        digits.append(a)
        r = s - a
    if r == 0 and all(a in D for a in digits):
        return t
    if r != 0 and all(a in D for a in digits):
        return t  # the repeating expansion stays in the alphabet
    if r == 0 and digits:
        # t = 0.t1..tk also equals 0.t1..(tk - 1)(b-1)(b-1)...
        alt = digits[:-1] + [digits[-1] - 1]
        if digits[-1] > 0 and all(a in D for a in alt) and (b - 1) in D:
            return t
    bad = next(i for i, a in enumerate(digits) if a not in D)
    for i in range(bad, -1, -1):
        bigger = [a for a in D if a > digits[i]]
        if bigger:
            return comp.tail_value(coord, tuple(digits[:i]) + (bigger[0],))
    return None


def real_centers(comp, coord: int, r: Fraction) -> list:
    out = []
    c = next_in_support(comp, coord, Fraction(0))
    while c is not None and c < 1:
        out.append(c)
        if len(out) > MAX_REAL_CENTERS:
            raise DomainError(f"real cover needs more than {MAX_REAL_CENTERS} centers")
        c = next_in_support(comp, coord, c + 2 * r)
    return out


class Cover(Sequence):
    """Lazy list of the SBalls of the level-n cover; index order is mixed radix over places."""

    def __init__(self, measure, n: int, radius: Optional[Fraction] = None):
        self.measure = measure
        self.places = measure.places
        self.n = n
        self.d = measure.d
        if radius is None:
            radius = radius_schedule(n, self.d, self.places.l).value
        self.radius = Fraction(radius)
        self._axes = []  # per place: (place, per-place radius, digit depth m, real centers per coordinate)
        for comp in measure.components:
            v = comp.place
            if v.is_infinite:
                centers = [real_centers(comp, c, self.radius) for c in range(self.d)]
                self._axes.append((v, self.radius, None, centers))
            else:
                m = max(snap_exponent(self.radius, v.prime), 0)
                self._axes.append((v, ppow(v.prime, -m), m, None))
        self._counts = []  # per place, per coordinate number of choices
        for v, _, m, centers in self._axes:
            comp = measure.component(v)
            if centers is None:
                self._counts.append([len(comp.digits[c]) ** m for c in range(self.d)])
            else:
                self._counts.append([len(cs) for cs in centers])
        self._sizes = [math.prod(c) for c in self._counts]

    def __len__(self) -> int:
        return math.prod(self._sizes)

    def place_size(self, place: Place) -> int:
        for (v, _, _, _), size in zip(self._axes, self._sizes):
            if v == place:
                return size
        raise KeyError(str(place))

    def _split(self, i: int) -> list:
        """Per place, the per-coordinate indices of ball i."""
        out = []
        for counts, size in zip(reversed(self._counts), reversed(self._sizes)):
            i, j = divmod(i, size)
            idx = []
            for c in reversed(counts):
                j, k = divmod(j, c)
                idx.append(k)
            out.append(idx[::-1])
        return out[::-1]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        by_place, radii = [], []
        for (v, rho, m, centers), idx in zip(self._axes, self._split(i)):
            comp = self.measure.component(v)
            if centers is not None:
                pt = RationalPoint(tuple(centers[c][k] for c, k in enumerate(idx)))
            else:
                pt = RationalPoint(tuple(comp.tail_value(c, _prefix(comp.digits[c], m, k)) for c, k in enumerate(idx)))
            by_place.append((v, pt))
            radii.append((v, rho))
        return SBall(PlacePoint(tuple(by_place)), self.radius, self.places, tuple(radii))

    def locate(self, point) -> Optional[int]:
        """Index of a ball holding ``point`` (3x enlarged at the real place), or None."""
        index = 0
        for (v, rho, m, centers), counts, size in zip(self._axes, self._counts, self._sizes):
            comp = self.measure.component(v)
            x = point.at(v)
            j = 0
            for c in range(self.d):
                xc = x.coords[c]
                if centers is not None:
                    cs = centers[c]
                    k = bisect_right(cs, xc) - 1
                    near = [t for t in (k, k + 1) if 0 <= t < len(cs) and abs(xc - cs[t]) < 3 * self.radius]
                    if not near:
                        return None
                    k = near[0]
                else:
                    pre = comp.coordinate_prefix(xc, m)
                    if pre is None or any(a not in comp.digits[c] for a in pre):
                        return None
                    k = 0
                    for a in pre:
                        k = k * len(comp.digits[c]) + comp.digits[c].index(a)
                j = j * counts[c] + k
            index = index * size + j
        return index


def _prefix(digits: tuple, m: int, k: int) -> tuple:
    """The k-th length-m digit string in lexicographic order."""
    out = []
    for _ in range(m):
        k, r = divmod(k, len(digits))
        out.append(digits[r])
    return tuple(out[::-1])


def cover_compact(measure, n: int, radius: Optional[Fraction] = None) -> Cover:
    """Level-n cover of the measure's support with radius r_n (or an explicit radius)."""
    if n < 0:
        raise DomainError("cover level n must be >= 0")
    return Cover(measure, n, radius)
