import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdioph.enumeration import (
    PsiHitTable,
    SBall,
    count_candidates,
    cover_compact,
    dirichlet_witness,
    dirichlet_witnesses,
    enumerate_rationals,
    enumerate_rationals_naive,
    in_ball,
    psi_witnesses,
    radius_schedule,
    simplex_campaign,
    snap_radius,
    verify_simplex_lemma,
    witnesses_to_jsonl,
)
from sdioph.errors import DomainError, SearchTooLargeError
from sdioph.lattice import HeightWindow
from sdioph.measures import DigitMeasure, ProductMeasure, cylinder_measure, haar, parse_measure, sample
from sdioph.places import INFINITY, Place, PlaceSet, RationalPoint, snorm
from sdioph.psi import PsiFunction

F = Fraction
S3 = PlaceSet.parse("3")


def pairs(found):
    return [[a.q0, list(a.q)] for a in found]


@pytest.mark.parametrize(
    "n, d, l, value, rounded",
    [(1, 1, 1, F(1, 768), False), (0, 2, 1, F(1, 96), True), (2, 1, 2, F(1, 192), True)],
)
def test_radius_schedule_examples(n, d, l, value, rounded):
    r = radius_schedule(n, d, l)
    assert r.value == value and r.rounded == rounded


@given(st.integers(0, 12), st.integers(1, 3), st.integers(1, 3))
def test_radius_schedule_rounds_down(n, d, l):
    r = radius_schedule(n, d, l)
    # 6 r = 2**-m with m >= exponent
    m = (1 / (6 * r.value)).numerator.bit_length() - 1
    assert m >= r.exponent and m - r.exponent < 1


@pytest.mark.parametrize("r, p, s", [(F(1, 768), 3, F(1, 2187)), (1, 5, 1), (F(1, 4), 2, F(1, 4))])
def test_snap_examples(r, p, s):
    assert snap_radius(r, p) == s


@given(st.fractions(min_value=F(1, 10**9), max_value=100), st.sampled_from([2, 3, 5, 7]))
def test_snap_property(r, p):
    s = snap_radius(r, p)
    assert s <= r < p * s


def test_snap_rejects():
    with pytest.raises(DomainError):
        snap_radius(0, 3)


def test_in_ball_examples():
    ball = SBall.around(RationalPoint.of(0), F(1, 9), S3)
    assert in_ball(RationalPoint.of(9), ball)
    assert not in_ball(RationalPoint.of(F(1, 3)), ball)
    assert in_ball(RationalPoint.of(0), ball)
    real = SBall.around(RationalPoint.of(0), F(1, 2), PlaceSet.parse("inf"))
    assert not in_ball(RationalPoint.of(F(1, 2)), real)
    assert in_ball(RationalPoint.of(F(1, 2)), real, infinity_scale=3)


def test_cover_examples():
    z3 = haar(S3)
    cov = cover_compact(z3, 0, radius=F(1, 9))
    assert len(cov) == 9
    assert sorted(b.center_at(Place(3)).coords[0] for b in cov) == list(range(9))
    cantor = parse_measure("p:3 digits:0,2 d:1")
    cov = cover_compact(cantor, 0, radius=F(1, 9))
    assert len(cov) == 4
    assert sorted(b.center_at(Place(3)).coords[0] for b in cov) == [0, 2, 6, 8]
    r = F(1, 100)
    lebesgue = haar(PlaceSet.parse("inf"))
    cov = cover_compact(lebesgue, 0, radius=r)
    assert len(cov) == 50  # ceil(1 / (2r))


@pytest.mark.parametrize("spec", ["p:3 digits:0,2 d:1", "p:2 digits:0,1 d:2", "p:5 digits:0,1|1,3,4 d:2"])
@pytest.mark.parametrize("k", [1, 3])
def test_cover_partitions_finite_compact(spec, k):
    m = parse_measure(spec)
    comp = m.components[0]
    cov = cover_compact(m, 0, radius=F(1, comp.base**k))
    total = sum(cylinder_measure(comp, b.center_at(comp.place), b.radius_at(comp.place)) for b in cov)
    assert total == 1
    for pt in sample(m, 3, 50, 30):
        hits = [i for i, b in enumerate(cov) if in_ball(pt.at(comp.place), b)]
        assert hits == [cov.locate(pt)]


def test_cover_real_place_covers_with_triple_balls():
    m = parse_measure("p:inf base:3 digits:0,2 d:1")
    cov = cover_compact(m, 0, radius=F(1, 50))
    centers = [b.center_at(INFINITY).coords[0] for b in cov]
    assert all(b - a >= F(2, 50) for a, b in zip(centers, centers[1:]))
    for pt in sample(m, 1, 200, 30):
        x = pt.at(INFINITY)
        assert any(in_ball(x, b, infinity_scale=3) for b in cov)


def test_enumerate_examples(frozen):
    ball = SBall.around(RationalPoint.of(0), F(1, 9), S3)
    found = enumerate_rationals(ball, 2)
    assert pairs(found) == frozen["window_rationals"]["3|0|m2|n2"]
    assert {a.point for a in found} == {RationalPoint.of(0)}
    assert [a.q0 for a in found] == [4, 5, 6, 7, 8]
    ball = SBall.around(RationalPoint.of(0), 1, S3)
    assert pairs(enumerate_rationals(ball, 0)) == frozen["window_rationals"]["3|0|m0|n0"]
    S = PlaceSet.parse("2,inf")
    ball = SBall.around(RationalPoint.of(F(1, 3)), F(1, 2), S)
    ball = SBall(ball.center, F(1, 4), S, ((Place(2), F(1, 2)), (INFINITY, F(1, 4))))
    assert pairs(enumerate_rationals(ball, 2)) == frozen["window_rationals"]["2,inf|1/3|m1|n2"]


def test_enumerate_empty_window():
    S = PlaceSet.parse("inf")
    ball = SBall.around(RationalPoint.of(F(1, 3) + F(1, 10**6)), F(1, 10**9), S)
    assert enumerate_rationals(ball, 3) == []


def test_enumerate_guard():
    ball = SBall.around(RationalPoint.of(0, 0), 1, S3)
    with pytest.raises(SearchTooLargeError):
        enumerate_rationals(ball, 8, guard=1000)
    # q0 in 1..4, q in [-4, 4]**2, and 3 | q when 3 | q0
    assert count_candidates(ball, HeightWindow(1, "all-finite")) == 3 * 9 * 9 + 3 * 3


balls = st.builds(
    lambda S, d, cs, r: SBall.around(RationalPoint(tuple(cs[:d])), r, PlaceSet.parse(S)),
    st.sampled_from(["2", "3", "2,3", "inf", "2,inf", "3,5,inf"]),
    st.integers(1, 2),
    st.lists(st.fractions(min_value=-1, max_value=1, max_denominator=30), min_size=2, max_size=2),
    st.sampled_from([F(1), F(1, 3), F(1, 8), F(1, 40)]),
)


@given(balls, st.integers(0, 4), st.sampled_from([1, 6]))
def test_pruned_matches_naive(ball, n, scale):
    assert enumerate_rationals(ball, n, infinity_scale=scale) == enumerate_rationals_naive(ball, n, infinity_scale=scale)


@settings(max_examples=25)
@given(balls, st.integers(2, 4))
def test_threads_do_not_change_output(ball, n):
    assert enumerate_rationals(ball, n, threads=3) == enumerate_rationals(ball, n)


def test_verify_examples():
    ball = SBall.around(RationalPoint.of(0), F(1, 9), S3)
    v = verify_simplex_lemma(ball, 2)
    assert v.passed and v.hyperplane.coefficients == (1, 0)
    # radius 1 is far above r_0: three independent rationals sit in the ball
    big = SBall.around(RationalPoint.of(0), 1, S3)
    v = verify_simplex_lemma(big, 0)
    assert v.status == "FAIL" and len(v.certificate) == 2


@pytest.mark.parametrize("n", [2, 3, 4])
def test_simplex_campaign_z3_squared(n):
    rep = simplex_campaign(haar(S3, 2), n)
    assert rep.status == "PASS"
    assert rep.balls == len(cover_compact(haar(S3, 2), n))


def test_campaign_groups_match_per_ball_enumeration():
    m = haar(PlaceSet.parse("2,inf"), 1)
    rep = simplex_campaign(m, 2)
    assert rep.status == "PASS"
    cov = cover_compact(m, 2)
    rng = random.Random(3)
    for i in rng.sample(sorted(rep.counts), min(20, len(rep.counts))):
        found = {a.point for a in enumerate_rationals(cov[i], 2, infinity_scale=6)}
        assert len(found) == rep.counts[i]


def test_dirichlet_examples():
    w = dirichlet_witness(RationalPoint.of(0), 1, PlaceSet.parse("5"))
    assert (w.q, w.q0, w.lhs) == ((0,), 1, 0)
    inf = PlaceSet.parse("inf")
    ws = list(dirichlet_witnesses(RationalPoint.of(F(1, 3)), 3, inf))
    assert any(w.q == (-1,) and w.q0 == 3 and w.lhs == 0 for w in ws)
    w = dirichlet_witness(RationalPoint.of(F(1, 2)), 4, S3)
    assert w is not None and max(w.q0, abs(w.q[0])) <= 4


@given(st.fractions(min_value=-1, max_value=1, max_denominator=500), st.sampled_from(["inf", "3", "2,inf", "2,3"]))
def test_dirichlet_witness_is_valid(x, S):
    S = PlaceSet.parse(S)
    x = RationalPoint.of(x)
    if snorm(x, S) > 1:
        return
    w = dirichlet_witness(x, 256, S, min_height=4)
    assert w is not None
    val = snorm(RationalPoint(tuple(w.q0 * a + b for a, b in zip(x.coords, w.q))), S) ** S.l
    assert val == w.lhs
    h = max(w.q0, *(abs(a) for a in w.q))
    if S.contains_infinity:
        assert val**1 <= F(1, w.q0) or val == 0
    else:
        assert val**1 * h**2 <= 1


def test_dirichlet_classical_exponent_is_stricter():
    x = RationalPoint.of(F(5, 7))
    S = PlaceSet.parse("inf")
    a = dirichlet_witness(x, 64, S, 8, "inverse-d")
    b = dirichlet_witness(x, 64, S, 8, "classical")
    assert a is not None and b is not None and a.lhs <= F(1, a.q0) and b.lhs * b.q0**2 <= 1


def test_dirichlet_rejects_outside_unit_ball():
    with pytest.raises(DomainError):
        dirichlet_witness(RationalPoint.of(F(1, 3)), 4, S3)


def test_psi_examples(frozen):
    psi = PsiFunction.power(1, 3)
    ws = psi_witnesses(RationalPoint.of(0), psi, 0, S3)
    assert any(w.q == (0,) and w.q0 == 1 and w.lhs == 0 for w in ws)
    for key, count in frozen["psi_witness_count"].items():
        x, n = key.split("|")
        assert len(psi_witnesses(RationalPoint.of(F(x)), psi, int(n), S3)) == count, key
    zero = PsiFunction.power(0, 0)
    assert psi_witnesses(RationalPoint.of(F(1, 17)), zero, 2, S3) == []
    # an exact hit survives psi = 0
    hits = psi_witnesses(RationalPoint.of(F(-1, 5)), zero, 2, S3)
    assert [(w.q, w.q0) for w in hits] == [((1,), 5)]


def test_psi_witness_sign_convention():
    psi = PsiFunction.power(1, 3)
    S = PlaceSet.parse("inf")
    ws = psi_witnesses(RationalPoint.of(F(1, 3)), psi, 1, S)
    # x + q/q0 = 0 at q = -1, q0 = 3
    assert any(w.q == (-1,) and w.q0 == 3 and w.lhs == 0 for w in ws)


@pytest.mark.parametrize("spec", ["p:3 digits:0,1,2 d:1", "p:3 digits:0,2 d:1", "p:2 digits:0,1 d:2"])
@pytest.mark.parametrize("n", [1, 3])
def test_hit_table_matches_direct_search(spec, n):
    m = parse_measure(spec)
    psi = PsiFunction.power(1, 3)
    table = PsiHitTable(psi, n, m.places, m.d)
    for x in sample(m, 5, 30, 16):
        assert table.count(x) == len(psi_witnesses(x, psi, n, m.places))


def test_digit_point_witnesses_record_precision():
    m = ProductMeasure((DigitMeasure.build(Place(3), [0, 1, 2]), DigitMeasure.build(INFINITY, [0, 1], base=2)))
    psi = PsiFunction.power(1, 3)
    for x in sample(m, 0, 10, 8):
        for w in psi_witnesses(x, psi, 2, m.places):
            assert w.precision is not None and w.precision >= 8


def test_witness_jsonl():
    ws = psi_witnesses(RationalPoint.of(0), PsiFunction.power(1, 3), 1, S3)
    lines = witnesses_to_jsonl(ws).splitlines()
    doc = json.loads(lines[0])
    assert set(doc) == {"q", "q0", "n", "lhs", "rhs"} and isinstance(doc["lhs"], str)
