import math
from fractions import Fraction

import pytest
from conftest import primes, rationals
from hypothesis import given
from hypothesis import strategies as st

import oracles
from sdioph.errors import DimensionError, DomainError, InvalidPlaceError
from sdioph.exactnum import (
    INF,
    ball_key,
    format_rational,
    height_inf,
    is_prime,
    padic_abs,
    padic_valuation,
    parse_rational,
    pow2,
    ppow,
    residue_mod,
    snap_exponent,
)


@pytest.mark.parametrize(
    "x, p, v",
    [(12, 2, 2), (0, 5, INF), (Fraction(1, 6), 3, -1), (Fraction(-50, 27), 5, 2), (Fraction(-50, 27), 3, -3)],
)
def test_valuation_examples(x, p, v):
    assert padic_valuation(x, p) == v


@pytest.mark.parametrize("x, p, a", [(12, 2, Fraction(1, 4)), (0, 7, 0), (Fraction(1, 6), 2, 2)])
def test_abs_examples(x, p, a):
    assert padic_abs(x, p) == a


@pytest.mark.parametrize("v, h", [((1, 2), 2), ((-9, 3, 0), 9), ((0, 0), 0)])
def test_height_examples(v, h):
    assert height_inf(v) == h


def test_height_empty():
    with pytest.raises(DimensionError):
        height_inf(())


@pytest.mark.parametrize("p", [1, 0, -3, 4, 91, 2**20 + 1, "3"])
def test_non_prime_place(p):
    with pytest.raises(InvalidPlaceError):
        padic_valuation(Fraction(1, 2), p)


def test_primality_against_sieve():
    N = 5000
    sieve = [True] * N
    sieve[0] = sieve[1] = False
    for i in range(2, int(N**0.5) + 1):
        if sieve[i]:
            sieve[i * i::i] = [False] * len(sieve[i * i::i])
    assert [n for n in range(N) if is_prime(n)] == [n for n in range(N) if sieve[n]]
    # above the trial division limit
    assert is_prime(2**31 - 1) and is_prime(1_000_003) and not is_prime((2**31 - 1) * 3)


@given(rationals(), primes)
def test_abs_matches_oracle(x, p):
    assert padic_abs(x, p) == oracles.abs_p(x, p)


@given(rationals(), rationals(), primes)
def test_multiplicative(x, y, p):
    assert padic_abs(x * y, p) == padic_abs(x, p) * padic_abs(y, p)


@given(rationals(), rationals(), primes)
def test_ultrametric(x, y, p):
    a, b, s = padic_abs(x, p), padic_abs(y, p), padic_abs(x + y, p)
    assert s <= max(a, b)
    if a != b:
        assert s == max(a, b)


@given(rationals(), primes)
def test_abs_is_zero_or_power(x, p):
    a = padic_abs(x, p)
    if x == 0:
        assert a == 0
    else:
        v = padic_valuation(x, p)
        assert a == ppow(p, -v)


@given(rationals(max_num=10**30, max_den=10**30))
def test_rational_roundtrip(x):
    s = format_rational(x)
    assert parse_rational(s) == x
    assert format_rational(parse_rational(s)) == s


@pytest.mark.parametrize("bad", ["1/0", "1.5", "+-3", "a/b", "3/-4", ""])
def test_parse_rejects(bad):
    with pytest.raises(DomainError):
        parse_rational(bad)


@given(st.integers(-200, 200))
def test_pow2(e):
    assert pow2(e) == Fraction(2) ** e


@given(rationals(max_num=10**9, max_den=10**9).filter(lambda r: r > 0), primes)
def test_snap_exponent(r, p):
    m = snap_exponent(r, p)
    assert ppow(p, -m) <= r < ppow(p, 1 - m)


@given(rationals(max_den=10**4), primes, st.integers(1, 12))
def test_residue_mod(x, p, k):
    if x.denominator % p == 0:
        with pytest.raises(DomainError):
            residue_mod(x, p, k)
        return
    r = residue_mod(x, p, k)
    assert 0 <= r < p**k
    assert padic_valuation(x - r, p) >= k


@given(rationals(max_den=10**4), rationals(max_den=10**4), primes, st.integers(-5, 8))
def test_ball_key(x, y, p, e):
    same = padic_abs(x - y, p) <= ppow(p, -e)
    assert (ball_key(x, p, e) == ball_key(y, p, e)) == same


def test_inf_absorbs():
    assert INF + 5 == INF and 10**100 < INF and math.isinf(padic_valuation(0, 2))
