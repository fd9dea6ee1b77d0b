"""Separation of rationals of comparable height in Q_S (one-dimensional simplex lemma).

For a height class k the lemma says two distinct rationals m/n, m'/n' satisfy

    |m/n - m'/n'|_S ** l  >  2**-(2k+4)   (no real place in S, 2**k <= ||(m, n)|| < 2**(k+1))
    |m/n - m'/n'|_S ** l  >  2**-(2k+2)   (real place in S,    2**k <= |n|       < 2**(k+1))

:func:`min_separation_bruteforce` finds the exact minimum over a class.  The
default ``"bucket"`` method groups the class into p-adic balls level by level
instead of visiting every pair; ``"pairs"`` is the plain O(N^2) scan and serves
as its oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import DegeneratePairError, DomainError, EmptyWindowError
from .exactnum import as_rational, ball_key, pow2, ppow, snap_exponent
from .places import PlaceSet, snorm

MAX_K = 8


@dataclass(frozen=True)
class HeightClass:
    k: int
    mode: str  # "all-finite" | "with-infinity"

    def __post_init__(self):
        if self.k < 0:
            raise DomainError("height class needs k >= 0")

    def contains(self, x: Fraction) -> bool:
        lo, hi = 1 << self.k, 1 << (self.k + 1)
        if self.mode == "with-infinity":
            return lo <= x.denominator < hi
        return lo <= max(abs(x.numerator), x.denominator) < hi


def separation_lower_bound(k: int, S: PlaceSet) -> Fraction:
    return pow2(-(2 * k + 2)) if S.contains_infinity else pow2(-(2 * k + 4))


def separation(a: Fraction, b: Fraction, S: PlaceSet) -> Fraction:
    return snorm(a - b, S) ** S.l


@dataclass(frozen=True)
class PairVerdict:
    a: Fraction
    b: Fraction
    k: int
    mode: str
    a_in_class: bool
    b_in_class: bool
    value: Fraction
    bound: Fraction

    @property
    def hypotheses_hold(self) -> bool:
        return self.a_in_class and self.b_in_class

    @property
    def exceeds(self) -> bool:
        return self.value > self.bound

    @property
    def holds(self) -> bool:
        """Lemma conclusion holds, or the lemma does not apply."""
        return not self.hypotheses_hold or self.exceeds


def check_pair(a, b, k: int, S: PlaceSet) -> PairVerdict:
    a, b = as_rational(a), as_rational(b)
    if a == b:
        raise DegeneratePairError(f"pair is degenerate: {a} = {b}")
    cls = HeightClass(k, S.mode)
    return PairVerdict(
        a=a,
        b=b,
        k=k,
        mode=S.mode,
        a_in_class=cls.contains(a),
        b_in_class=cls.contains(b),
        value=separation(a, b, S),
        bound=separation_lower_bound(k, S),
    )


def class_members(k: int, S: PlaceSet, numerator_bound: Optional[int] = None) -> list:
    """Every reduced rational in height class k, ascending."""
    hi = 1 << (k + 1)
    B = default_numerator_bound(k) if numerator_bound is None else numerator_bound
    cls = HeightClass(k, S.mode)
    if S.contains_infinity:
        dens = range(1 << k, hi)
        nums = range(-B, B + 1)
    else:
        dens = range(1, hi)
        nums = range(-min(B, hi - 1), min(B, hi - 1) + 1)
    out = [Fraction(m, n) for n in dens for m in nums if math.gcd(m, n) == 1]
    out = [x for x in out if cls.contains(x)]
    out.sort()
    return out


def default_numerator_bound(k: int) -> int:
    return 4 * (1 << (k + 1))


@dataclass(frozen=True)
class SeparationResult:
    k: int
    places: str
    value: Fraction
    pair: tuple
    bound: Fraction
    members: int

    @property
    def exceeds(self) -> bool:
        return self.value > self.bound


def min_separation_bruteforce(
    k: int,
    S: PlaceSet,
    numerator_bound: Optional[int] = None,
    method: str = "bucket",
) -> SeparationResult:
    if k > MAX_K:
        raise DomainError(f"k={k} exceeds the exhaustive-search guard k <= {MAX_K}")
    B = default_numerator_bound(k) if numerator_bound is None else numerator_bound
    if B < (1 << (k + 1)):
        raise DomainError(f"numerator_bound must be >= 2**(k+1) = {1 << (k + 1)}")
    members = class_members(k, S, B)
    if len(members) < 2:
        raise EmptyWindowError(f"height class k={k} holds fewer than two rationals")
    if method == "pairs":
        value, pair = _min_pairs(members, S)
    elif method == "bucket":
        value, pair = _min_bucket(members, S, B, 1 << (k + 1))
    else:
        raise ValueError(f"unknown method {method!r}")
    return SeparationResult(
        k=k,
        places=str(S),
        value=value,
        pair=pair,
        bound=separation_lower_bound(k, S),
        members=len(members),
    )


def _min_pairs(members: list, S: PlaceSet):
    best, pair = None, None
    for i, a in enumerate(members):
        for b in members[i + 1:]:
            v = separation(a, b, S)
            if best is None or v < best:
                best, pair = v, (a, b)
    return best, pair


def _levels(primes, num_bound: int, den_bound: int) -> list:
    """Candidate thresholds for max_p |a-b|_p, as (threshold, {p: e}) ascending.

    Differences of class members have numerator <= 2*num_bound*den_bound and
    denominator <= den_bound**2, which brackets every valuation that can occur.
    """
    diff_num = 2 * num_bound * den_bound
    diff_den = den_bound * den_bound
    thresholds = set()
    for p in primes:
        e_lo = -int(math.log(diff_den, p)) - 2
        e_hi = int(math.log(diff_num, p)) + 2
        thresholds.update(ppow(p, -e) for e in range(e_lo, e_hi + 1))
    return [(t, {p: snap_exponent(t, p) for p in primes}) for t in sorted(thresholds)]


def _buckets(members: list, exps: dict) -> dict:
    groups: dict = {}
    for x in members:
        key = tuple(ball_key(x, p, e) for p, e in exps.items())
        groups.setdefault(key, []).append(x)
    return groups


def _min_bucket(members: list, S: PlaceSet, num_bound: int, den_bound: int):
    primes = S.finite_primes
    if not S.contains_infinity:
        levels = _levels(primes, num_bound, den_bound)
        lo, hi = 0, len(levels) - 1
        # the coarsest level puts everything in one ball, so some level succeeds
        while lo < hi:
            mid = (lo + hi) // 2
            if any(len(g) > 1 for g in _buckets(members, levels[mid][1]).values()):
                hi = mid
            else:
                lo = mid + 1
        group = next(g for g in _buckets(members, levels[lo][1]).values() if len(g) > 1)
        pair = (group[0], group[1])
        return separation(*pair, S), pair

    levels = _levels(primes, num_bound, den_bound) if primes else [(None, {})]
    best, pair = None, None
    for t, exps in levels:
        if best is not None and t is not None and t >= best:
            break  # every later candidate is at least t
        gap, gpair = None, None
        for g in _buckets(members, exps).values():
            for a, b in zip(g, g[1:]):  # members arrive sorted, buckets stay sorted
                if gap is None or b - a < gap:
                    gap, gpair = b - a, (a, b)
        if gpair is None:
            continue
        candidate = gap if t is None else max(t, gap)
        if best is None or candidate < best:
            best, pair = candidate, gpair
    return separation(*pair, S), pair
