"""Exact rationals with p-adic valuations and absolute values.

Rationals are :class:`fractions.Fraction`, which already keeps every value in
lowest terms with a positive denominator.  Valuations live in the extended
integers: an ``int`` or :data:`INF` (``math.inf``), which absorbs addition and
compares totally against ints.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Sequence, Union

from .errors import DimensionError, DomainError, InvalidPlaceError

Rational = Fraction
ExtendedInt = Union[int, float]
INF = math.inf

_SMALL_PRIME_LIMIT = 1 << 20
# Deterministic for n < 3.3e24, which covers every place anyone will type.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)

_RATIONAL_RE = re.compile(r"^([+-]?\d+)(?:/(\d+))?$")


def is_prime(p: int) -> bool:
    """Trial division below 2**20, fixed-base strong probable prime test above."""
    if p < 2:
        return False
    if p < _SMALL_PRIME_LIMIT:
        if p % 2 == 0:
            return p == 2
        for f in range(3, math.isqrt(p) + 1, 2):
            if p % f == 0:
                return False
        return True
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


def check_prime(p) -> int:
    if isinstance(p, bool) or not isinstance(p, int) or not is_prime(p):
        raise InvalidPlaceError(f"{p!r} is not a prime")
    return p


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"cannot treat {type(x).__name__} as an exact rational")


def int_valuation(n: int, p: int) -> ExtendedInt:
    """Exponent of p in the integer n, by repeated exact division."""
    if n == 0:
        return INF
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def padic_valuation(x, p: int) -> ExtendedInt:
    check_prime(p)
    x = as_rational(x)
    if x == 0:
        return INF
    return int_valuation(x.numerator, p) - int_valuation(x.denominator, p)


def padic_abs(x, p: int) -> Fraction:
    """|x|_p = p**(-v_p(x)) as an exact rational, with |0|_p = 0."""
    v = padic_valuation(x, p)
    if v == INF:
        return Fraction(0)
    return Fraction(1, p**v) if v >= 0 else Fraction(p ** (-v))


def height_inf(v: Sequence[int]) -> int:
    if len(v) == 0:
        raise DimensionError("height of an empty vector")
    return max(abs(int(c)) for c in v)


def parse_rational(text: str) -> Fraction:
    """Parse the strict ``a/b`` or ``a`` form (sign only on the numerator)."""
    m = _RATIONAL_RE.match(text.strip())
    if m is None:
        raise DomainError(f"not a rational literal: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise DomainError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_rational(x) -> str:
    x = as_rational(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def pow2(e: int) -> Fraction:
    """2**e for any integer e, exactly."""
    return Fraction(1 << e) if e >= 0 else Fraction(1, 1 << -e)


def residue_mod(x: Fraction, p: int, k: int) -> int:
    """Representative in [0, p**k) of x modulo p**k Z_p; x must lie in Z_p."""
    if k <= 0:
        return 0
    if x.denominator % p == 0:
        raise DomainError(f"{x} is not a {p}-adic integer")
    mod = p**k
    return x.numerator * pow(x.denominator, -1, mod) % mod


def ball_key(x: Fraction, p: int, e: int) -> tuple:
    """Label of the p-adic ball x + p**e Z_p; two rationals share it iff |x - y|_p <= p**-e."""
    s = int_valuation(x.denominator, p)
    if e + s <= 0:
        return (0, 0)
    mod = p ** (e + s)
    unit = x.denominator // p**s
    return (x.numerator * pow(unit, -1, mod) % mod, s)


def ppow(p: int, e: int) -> Fraction:
    """p**e for any integer e, exactly."""
    return Fraction(p**e) if e >= 0 else Fraction(1, p ** (-e))


def snap_exponent(r, p: int) -> int:
    """The integer m with p**-m <= r < p**(1-m)."""
    r = as_rational(r)
    if r <= 0:
        raise DomainError(f"radius must be positive, got {r}")
    m = -int(math.floor(math.log(r.numerator, p) - math.log(r.denominator, p)))
    while ppow(p, -m) > r:
        m += 1
    while ppow(p, 1 - m) <= r:
        m -= 1
    return m
