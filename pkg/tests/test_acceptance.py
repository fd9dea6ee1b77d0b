"""Acceptance criteria 1-10, each at its stated tolerance.

Run ``pytest tests/test_acceptance.py`` to get one PASS/FAIL line per criterion
in the terminal summary.
"""

import itertools
import math
import random
import time
from fractions import Fraction

import pytest

import oracles

from sdioph.enumeration import cover_compact, enumerate_rationals, enumerate_rationals_naive, simplex_campaign, verify_simplex_lemma
from sdioph.enumeration.search import dirichlet_bound, dirichlet_witness
from sdioph.harness import ExperimentConfig, bc_sum, random_unit_point, run_campaign
from sdioph.cli import main
from sdioph.lattice import check_det_lower_bound, random_window_tuple, volume_bounds
from sdioph.measures import cylinder_measure, estimate_alpha, haar, parse_measure, sample
from sdioph.places import PlaceSet, snorm
from sdioph.psi import PsiFunction
from sdioph.simplex1d import min_separation_bruteforce

F = Fraction


@pytest.mark.acceptance(1, "1-d simplex lemma, all-finite, k = 0..6")
def test_criterion_1():
    start = time.perf_counter()
    for S in ("2", "3", "2,3"):
        S = PlaceSet.parse(S)
        for k in range(7):
            res = min_separation_bruteforce(k, S)
            assert res.bound == F(1, 2 ** (2 * k + 4))
            assert res.value > res.bound, (str(S), k, res)
    assert time.perf_counter() - start < 60


@pytest.mark.acceptance(2, "1-d simplex lemma, with infinity, k = 0..6")
def test_criterion_2():
    start = time.perf_counter()
    for S in ("inf,2", "inf,3"):
        S = PlaceSet.parse(S)
        for k in range(7):
            res = min_separation_bruteforce(k, S, numerator_bound=4 * 2 ** (k + 1))
            assert res.bound == F(1, 2 ** (2 * k + 2))
            assert res.value > res.bound, (str(S), k, res)
    assert time.perf_counter() - start < 60


@pytest.mark.acceptance(3, "determinant lower bound on 10^4 random tuples")
def test_criterion_3():
    sets = [PlaceSet.parse(s) for s in ("2", "3", "2,3", "2,3,5", "inf", "2,inf", "3,5,inf")]
    rng = random.Random(0)
    failures, modes = [], set()
    for i in range(10**4):
        S = sets[i % len(sets)]
        d, n = rng.randint(1, 3), rng.randint(1, 6)
        data = random_window_tuple(rng, d, n, S)
        v = check_det_lower_bound(data, n, S)
        modes.add(v.mode)
        assert v.hypotheses_hold
        if v.status != "confirmed":
            failures.append((str(S), n, data, v.quantity, v.bound))
    assert modes == {"all-finite", "with-infinity"}
    assert failures == []


@pytest.mark.acceptance(4, "volume contradiction for d <= 3, n <= 10, l <= 3")
def test_criterion_4():
    sets = [PlaceSet.parse(s) for s in ("2", "3", "2,3", "2,3,5", "inf", "2,inf", "3,inf", "2,3,inf")]
    assert {S.l for S in sets} == {1, 2, 3}
    for S, d, n in itertools.product(sets, (1, 2, 3), range(11)):
        cert = volume_bounds(d, n, S)
        assert cert.lower == F(1, 2 ** ((d + 1) * (n + 1)))
        assert cert.lower > cert.upper, cert.to_json()


@pytest.mark.acceptance(5, "empirical simplex lemma on every cover ball, d in {1,2}, n = 2..6")
def test_criterion_5():
    start = time.perf_counter()
    cells = []
    for d, S, n in itertools.product((1, 2), ("3", "2", "2,3"), range(2, 7)):
        m = haar(PlaceSet.parse(S), d)
        rep = simplex_campaign(m, n)
        assert rep.status == "PASS", (d, S, n, rep.failures[:1])
        assert rep.balls == len(cover_compact(m, n))
        cells.append((m, n, rep))
    # 100 random balls: pruned enumeration, the naive scan and the campaign grouping agree
    rng = random.Random(0)
    for _ in range(100):
        m, n, rep = rng.choice(cells)
        cover = cover_compact(m, n)
        i = rng.randrange(len(cover))
        ball = cover[i]
        fast = enumerate_rationals(ball, n)
        assert fast == enumerate_rationals_naive(ball, n)
        found = {a.point for a in fast}
        assert len(found) == rep.counts.get(i, len(found)) and (i in rep.counts or len(found) <= 1)
        assert verify_simplex_lemma(ball, n).passed
    assert time.perf_counter() - start < 600


@pytest.mark.acceptance(6, "Dirichlet witnesses of height <= 2^10 for 100 random points")
def test_criterion_6():
    for S in ("inf", "3", "inf,2"):
        S = PlaceSet.parse(S)
        rng = random.Random(0)
        found = 0
        for _ in range(100):
            x = random_unit_point(rng, S, 1)
            assert snorm(x, S) <= 1
            w = dirichlet_witness(x, 2**10, S, min_height=32)
            if w is not None:
                h = max(w.q0, *map(abs, w.q))
                # recheck ||q0 x + q||_S^l against the bound with the naive S-norm
                val = oracles.snorm([w.q0 * x.coords[0] + w.q[0]], [v.prime for v in S]) ** S.l
                assert h <= 2**10 and val == w.lhs and dirichlet_bound(1, S, h, w.q0).cmp(val) <= 0
                found += 1
        assert found == 100, str(S)


def _prefix_cylinders(comp, k):
    return [pre for pre in itertools.product(comp.digits[0], repeat=k)]


@pytest.mark.acceptance(7, "cylinder sums are exactly 1; 10^5 samples within 3 sigma")
def test_criterion_7():
    specs = [
        "p:3 digits:0,2 d:1",
        "p:3 digits:0,1,2 d:1",
        "p:2 digits:0,1 d:1",
        "p:inf base:3 digits:0,2 d:1",
        "p:5 digits:0,1,4 d:1 weights:1/2,1/4,1/4",
    ]
    for spec in specs:
        comp = parse_measure(spec).components[0]
        for k in range(1, 9):
            total = sum(
                cylinder_measure(comp, comp.tail_value(0, pre), F(1, comp.base**k)) for pre in _prefix_cylinders(comp, k)
            )
            assert total == 1, (spec, k)
    # sampled frequencies of depth-2 cylinders against their exact measures
    m = parse_measure("p:5 digits:0,1,4 d:1 weights:1/2,1/4,1/4")
    comp = m.components[0]
    v = comp.place
    N = 10**5
    counts = {}
    for x in sample(m, 2024, N, 2):
        pre = x.prefix(v, 0)[:2]
        counts[pre] = counts.get(pre, 0) + 1
    for pre in _prefix_cylinders(comp, 2):
        p = float(cylinder_measure(comp, comp.tail_value(0, pre), F(1, 25)))
        assert abs(counts.get(pre, 0) / N - p) <= 3 * math.sqrt(p * (1 - p) / N), pre


@pytest.mark.acceptance(8, "fitted decay exponents: Cantor-Z_3 0.6309, Lebesgue-like 1")
def test_criterion_8():
    cantor = estimate_alpha(parse_measure("p:3 digits:0,2 d:1"))
    assert abs(cantor.alpha - 0.6309) <= 0.05
    for spec in ("p:3 digits:0,1,2 d:1", "p:inf base:2 digits:0,1 d:1"):
        assert abs(estimate_alpha(parse_measure(spec)).alpha - 1) <= 0.05, spec


@pytest.mark.acceptance(9, "convergence-sum classification on 50 triples")
def test_criterion_9():
    taus = (F(1, 2), F(1), F(4, 3), F(3, 2), F(2), F(5, 2), F(3), F(4))
    triples = list(itertools.islice(itertools.product((1, 2, 3), taus, (F(1, 2), F(1), F(2))), 50))
    assert len(triples) == 50
    boundary_seen = 0
    for d, tau, alpha in triples:
        res = bc_sum(PsiFunction.power(1, tau), alpha, d, 16)
        crit = F(d + 1, d)
        assert res.classification == ("convergent" if tau > crit else "divergent")
        assert res.empirical_classification(1) == res.classification
        if tau == crit:
            boundary_seen += 1
            assert res.boundary and res.classification == "divergent"
        if res.classification == "convergent":
            rho = res.terms[1] / res.terms[0]
            assert res.partial_sums[-1] < res.terms[0] / (1 - rho)
    assert boundary_seen >= 3


@pytest.mark.acceptance(10, "survey: mass below 10x envelope, non-increasing, byte-identical")
def test_criterion_10(tmp_path):
    args = ["survey", "--primes", "3", "--d", "1", "--psi", "pow:1,3", "--n-max", "8", "--samples", "1000", "--seed", "42"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    cfg = ExperimentConfig(primes="3", d=1, psi=PsiFunction.power(1, 3), n_max=8, sample_count=1000, seed=42)
    rows = run_campaign("survey", cfg).rows
    assert [r["n"] for r in rows] == list(range(1, 9))
    masses = []
    for r in rows:
        assert not r["truncated"]
        assert r["envelope"] == F(1, 2 ** r["n"])  # (2^{2n} psi(2^n))^alpha with alpha = 1
        assert r["empirical_mass"] < 10 * float(r["envelope"])
        if not r["below_n0"]:
            masses.append(r["empirical_mass"])
    assert all(b <= a for a, b in zip(masses, masses[1:]))
