"""Places of Q, place sets S, S-norms and content.

Rational points are stored once and evaluated at each place on demand (the
diagonal embedding), so ``RationalPoint`` carries no per-place data.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Iterator, Optional

from .errors import DimensionError, DomainError, InvalidPlaceError
from .exactnum import _SMALL_PRIME_LIMIT, as_rational, check_prime, format_rational, is_prime, padic_abs, parse_rational


@dataclass(frozen=True, order=False)
class Place:
    """A finite place (``prime`` set) or the real place (``prime is None``)."""

    prime: Optional[int] = None

    def __post_init__(self):
        if self.prime is not None:
            check_prime(self.prime)

    @classmethod
    def infinite(cls) -> "Place":
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.prime is None

    def sort_key(self):
        return (1, 0) if self.prime is None else (0, self.prime)

    def abs(self, x) -> Fraction:
        x = as_rational(x)
        if self.prime is None:
            return abs(x)
        return padic_abs(x, self.prime)

    def __str__(self) -> str:
        return "inf" if self.prime is None else str(self.prime)


INFINITY = Place.infinite()


@dataclass(frozen=True)
class PlaceSet:
    """Distinct places, primes ascending with the real place last."""

    places: tuple

    def __post_init__(self):
        places = tuple(p if isinstance(p, Place) else _coerce_place(p) for p in self.places)
        if not places:
            raise InvalidPlaceError("a place set needs at least one place")
        if len(set(places)) != len(places):
            raise InvalidPlaceError(f"repeated place in {[str(p) for p in places]}")
        object.__setattr__(self, "places", tuple(sorted(places, key=Place.sort_key)))

    @classmethod
    def of(cls, *items) -> "PlaceSet":
        """``PlaceSet.of(2, 3, "inf")``"""
        return cls(tuple(_coerce_place(i) for i in items))

    @classmethod
    def parse(cls, text: str) -> "PlaceSet":
        parts = [t.strip() for t in text.split(",") if t.strip()]
        return cls.of(*parts)

    @property
    def l(self) -> int:
        return len(self.places)

    @property
    def contains_infinity(self) -> bool:
        return self.places[-1].is_infinite

    @property
    def finite_primes(self) -> tuple:
        return tuple(p.prime for p in self.places if not p.is_infinite)

    @property
    def mode(self) -> str:
        return "with-infinity" if self.contains_infinity else "all-finite"

    def with_infinity(self) -> "PlaceSet":
        """S together with the real place (S union {inf})."""
        if self.contains_infinity:
            return self
        return PlaceSet(self.places + (INFINITY,))

    def __iter__(self) -> Iterator[Place]:
        return iter(self.places)

    def __len__(self) -> int:
        return len(self.places)

    def __str__(self) -> str:
        return ",".join(str(p) for p in self.places)


def _coerce_place(item) -> Place:
    if isinstance(item, Place):
        return item
    if item is None:
        return INFINITY
    if isinstance(item, str):
        s = item.strip().lower()
        if s in ("inf", "infinity", "oo", "∞"):
            return INFINITY
        try:
            item = int(s)
        except ValueError:
            raise InvalidPlaceError(f"cannot parse place {item!r}") from None
    return Place(item)


@dataclass(frozen=True)
class RationalPoint:
    coords: tuple

    def __post_init__(self):
        coords = tuple(as_rational(c) for c in self.coords)
        if not coords:
            raise DimensionError("points need dimension d >= 1")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, *coords) -> "RationalPoint":
        return cls(tuple(coords))

    @classmethod
    def parse(cls, text: str) -> "RationalPoint":
        return cls(tuple(parse_rational(t) for t in text.strip("() ").split(",")))

    @property
    def d(self) -> int:
        return len(self.coords)

    def _check(self, other: "RationalPoint"):
        if other.d != self.d:
            raise DimensionError(f"dimension mismatch {self.d} vs {other.d}")

    def __sub__(self, other: "RationalPoint") -> "RationalPoint":
        self._check(other)
        return RationalPoint(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __add__(self, other: "RationalPoint") -> "RationalPoint":
        self._check(other)
        return RationalPoint(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def at(self, place) -> "RationalPoint":
        """Coordinates at a place; a rational point is the same everywhere."""
        return self

    def scale(self, c) -> "RationalPoint":
        return RationalPoint(tuple(c * a for a in self.coords))

    def __iter__(self):
        return iter(self.coords)

    def __str__(self) -> str:
        return "(" + ",".join(format_rational(c) for c in self.coords) + ")"


def as_point(x) -> RationalPoint:
    if isinstance(x, RationalPoint):
        return x
    if isinstance(x, (list, tuple)):
        return RationalPoint(tuple(x))
    return RationalPoint((x,))


def place_norm(x, place: Place) -> Fraction:
    """Sup norm of the point at one place."""
    return max(place.abs(c) for c in as_point(x).coords)


def snorm(x, S: PlaceSet) -> Fraction:
    x = as_point(x)
    return max(place_norm(x, v) for v in S)


def content(x, P: Iterable) -> Fraction:
    x = as_rational(x)
    places = P.places if isinstance(P, PlaceSet) else tuple(_coerce_place(p) for p in P)
    return reduce(lambda acc, v: acc * v.abs(x), places, Fraction(1))


def _prime_support(n: int) -> list:
    n = abs(n)
    out, f = [], 2
    while f * f <= n:
        if n >= _SMALL_PRIME_LIMIT and is_prime(n):
            break
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def product_formula_check(x) -> bool:
    x = as_rational(x)
    if x == 0:
        raise DomainError("the product formula needs x != 0")
    primes = sorted(set(_prime_support(x.numerator)) | set(_prime_support(x.denominator)))
    return content(x, [None, *primes]) == 1

