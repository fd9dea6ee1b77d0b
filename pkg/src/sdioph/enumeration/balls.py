"""S-adic balls and the level-n radius schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from ..errors import DimensionError, DomainError
from ..exactnum import as_rational, ppow, snap_exponent
from ..places import Place, PlaceSet, RationalPoint, as_point, place_norm

# the real factor is enlarged 3x in the covering and 6x in the simplex region
COVER_SCALE = 3
REGION_SCALE = 6


@dataclass(frozen=True)
class RadiusSchedule:
    value: Fraction
    exponent: Fraction  # value would be 2**-exponent / 6 without rounding
    rounded: bool


def radius_schedule(n: int, d: int, l: int) -> RadiusSchedule:
    """r_n = (1/6) 2**(-(d+2)/(dl)) 2**(-(d+1)(n+1)/(dl)), rounded down to (1/6) 2**-m."""
    if n < 0 or d < 1 or l < 1:
        raise DomainError(f"radius_schedule needs n >= 0, d >= 1, l >= 1 (got {n}, {d}, {l})")
    exponent = Fraction((d + 2) + (d + 1) * (n + 1), d * l)
    m = math.ceil(exponent)
    return RadiusSchedule(Fraction(1, 6 * 2**m), exponent, m != exponent)


def snap_radius(r, p: int) -> Fraction:
    """Largest p**-m not exceeding r."""
    return ppow(p, -snap_exponent(r, p))


@dataclass(frozen=True)
class SBall:
    """Product of per-place balls.  ``center`` is a RationalPoint or a DigitPoint."""

    center: object
    nominal_radius: Fraction
    places: PlaceSet
    per_place_radius: tuple  # ((Place, radius), ...) in place order

    @classmethod
    def around(cls, center, radius, S: PlaceSet) -> "SBall":
        if not hasattr(center, "at"):
            center = as_point(center)
        radius = as_rational(radius)
        if radius <= 0:
            raise DomainError(f"ball radius must be positive, got {radius}")
        radii = tuple(
            (v, radius if v.is_infinite else snap_radius(radius, v.prime)) for v in S
        )
        return cls(center, radius, S, radii)

    @property
    def d(self) -> int:
        return self.center.d

    def center_at(self, place: Place) -> RationalPoint:
        return self.center.at(place)

    def radius_at(self, place: Place) -> Fraction:
        for v, r in self.per_place_radius:
            if v == place:
                return r
        raise KeyError(str(place))

    def exponent_at(self, p: int) -> int:
        """m with radius p**-m at the finite place p."""
        return snap_exponent(self.radius_at(Place(p)), p)

    def __str__(self) -> str:
        return f"B({self.center}, {self.nominal_radius})"


def in_ball(x, ball: SBall, S: Optional[PlaceSet] = None, infinity_scale=1) -> bool:
    """Closed at finite places, open at the real place (radius scaled by ``infinity_scale``).

    A DigitPoint is tested through its exact representative at each place.
    """
    if not hasattr(x, "at"):
        x = as_point(x)
    if x.d != ball.d:
        raise DimensionError(f"point of dimension {x.d} vs ball of dimension {ball.d}")
    S = ball.places if S is None else S
    for v in S:
        dist = place_norm(x.at(v) - ball.center_at(v), v)
        if v.is_infinite:
            if not dist < infinity_scale * ball.nominal_radius:
                return False
        elif dist > ball.radius_at(v):
            return False
    return True
