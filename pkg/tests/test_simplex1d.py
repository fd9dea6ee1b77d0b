from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sdioph.errors import DegeneratePairError, DomainError
from sdioph.places import PlaceSet
from sdioph.simplex1d import HeightClass, check_pair, class_members, min_separation_bruteforce, separation_lower_bound


@pytest.mark.parametrize(
    "k, S, bound",
    [(1, "2,3", Fraction(1, 64)), (0, "inf,2", Fraction(1, 4)), (3, "5", Fraction(1, 1024))],
)
def test_bound_examples(k, S, bound):
    assert separation_lower_bound(k, PlaceSet.parse(S)) == bound


def test_check_pair_examples():
    v = check_pair(Fraction(1, 2), Fraction(1, 3), 1, PlaceSet.parse("2,3"))
    assert v.hypotheses_hold and v.value == 9 and v.exceeds
    v = check_pair(Fraction(1, 2), Fraction(1, 3), 1, PlaceSet.parse("inf,2"))
    assert v.hypotheses_hold and v.value == 4 and v.bound == Fraction(1, 16) and v.exceeds
    v = check_pair(Fraction(1, 2), Fraction(3, 2), 0, PlaceSet.parse("2"))
    assert v.a_in_class is False and v.b_in_class is False and not v.hypotheses_hold and v.holds


def test_degenerate_pair():
    with pytest.raises(DegeneratePairError):
        check_pair(Fraction(2, 4), Fraction(1, 2), 0, PlaceSet.parse("2"))


@pytest.mark.parametrize("k, S, bound", [(1, "2,3", 4), (0, "inf,2", 4), (2, "2", 8)])
def test_bruteforce_examples(k, S, bound):
    S = PlaceSet.parse(S)
    res = min_separation_bruteforce(k, S, bound)
    assert res.value > separation_lower_bound(k, S)
    a, b = res.pair
    assert check_pair(a, b, k, S).value == res.value


def test_bruteforce_matches_frozen_oracle(frozen):
    for key, value in frozen["min_separation"].items():
        places, k = key.split("|")
        res = min_separation_bruteforce(int(k), PlaceSet.parse(places))
        assert res.value == Fraction(value), key


@pytest.mark.parametrize("S", ["2", "3", "2,3", "2,inf", "3,5,inf"])
@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_bucket_matches_pairs(S, k):
    S = PlaceSet.parse(S)
    fast = min_separation_bruteforce(k, S, method="bucket")
    slow = min_separation_bruteforce(k, S, method="pairs")
    assert fast.value == slow.value


def test_guards():
    S = PlaceSet.parse("2")
    with pytest.raises(DomainError):
        min_separation_bruteforce(9, S)
    with pytest.raises(DomainError):
        min_separation_bruteforce(3, S, numerator_bound=8)
    with pytest.raises(DomainError):
        HeightClass(-1, "all-finite")


@pytest.mark.parametrize("S", ["2,inf", "3,inf"])
def test_numerator_bound_monotone(S):
    S = PlaceSet.parse(S)
    values = [min_separation_bruteforce(2, S, B).value for B in (8, 12, 16, 32)]
    assert values == sorted(values, reverse=True)


@given(
    st.sampled_from(["2", "3", "2,3", "2,inf", "3,inf", "2,5,inf"]),
    st.integers(0, 5),
    st.data(),
)
def test_pairs_in_class_exceed_bound(S, k, data):
    S = PlaceSet.parse(S)
    members = class_members(k, S)
    a, b = data.draw(st.lists(st.sampled_from(members), min_size=2, max_size=2, unique=True))
    v = check_pair(a, b, k, S)
    w = check_pair(b, a, k, S)
    assert v.hypotheses_hold and v.exceeds
    assert (v.value, v.hypotheses_hold) == (w.value, w.hypotheses_hold)


def test_members_respect_class():
    for S in (PlaceSet.parse("2"), PlaceSet.parse("2,inf")):
        cls = HeightClass(3, S.mode)
        assert all(cls.contains(x) for x in class_members(3, S))
