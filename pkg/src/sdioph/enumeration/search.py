"""Rational points of bounded height in S-adic balls, and the searches built on them.

Pairs (q, q0) are always reported with q0 > 0; (q, q0) and (-q, -q0) give the
same rational point and the same approximation quality.

At a finite place p, membership |q/q0 - c|_p <= p**-m is the congruence
v_p(q - q0*c) >= m + v_p(q0), so for fixed q0 the admissible q_i form one
residue class modulo a power of p; classes for different primes are merged by
the Chinese remainder theorem.  At the real place q_i ranges over an interval.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from ..errors import DomainError, PrecisionExhaustedError, SearchTooLargeError
from ..exactnum import format_rational, padic_valuation, ppow, residue_mod
from ..lattice import HeightWindow, Hyperplane, affine_hull_hyperplane, affine_rank
from ..places import INFINITY, Place, PlaceSet, RationalPoint, as_point, snorm
from .balls import REGION_SCALE, SBall
from .cover import cover_compact

GUARD = 10**9


@dataclass(frozen=True, order=True)
class Approximant:
    q0: int
    q: tuple

    @property
    def point(self) -> RationalPoint:
        return RationalPoint(tuple(Fraction(a, self.q0) for a in self.q))

    @property
    def height(self) -> int:
        return max(self.q0, *(abs(a) for a in self.q))

    def __str__(self) -> str:
        return f"({','.join(map(str, self.q))};{self.q0})"


def _congruence(y: Fraction, p: int, e: int):
    """Integers q with v_p(q - y) >= e: None for all, False for none, else (residue, modulus)."""
    if y.denominator % p == 0:
        # v_p(q - y) = v_p(y) < 0 for every integer q
        return None if padic_valuation(y, p) >= e else False
    if e <= 0:
        return None
    return residue_mod(y, p, e), p**e


def _crt(conds) -> object:
    res, mod = 0, 1
    for c in conds:
        if c is False:
            return False
        if c is None:
            continue
        r, m = c
        # mod and m are powers of distinct primes
        t = (r - res) * pow(mod, -1, m) % m
        res, mod = res + mod * t, mod * m
    return (res % mod, mod)


def _progression(cond, L: int, U: int) -> range:
    if cond is False or U < L:
        return range(0)
    res, mod = cond
    return range(L + (res - L) % mod, U + 1, mod)


def _as_window(window, S: PlaceSet) -> HeightWindow:
    if isinstance(window, int):
        return HeightWindow(window, S.mode)
    if window.mode != S.mode:
        raise DomainError(f"window mode {window.mode} does not match place set mode {S.mode}")
    return window


def _q0_range(win: HeightWindow) -> range:
    return range(win.lo if win.mode == "with-infinity" else 1, win.hi + 1)


def _real_bounds(ball: SBall, scale) -> list:
    c = ball.center_at(INFINITY)
    R = ball.radius_at(INFINITY) * scale
    return [(ci - R, ci + R) for ci in c.coords]


def _coord_ranges(ball: SBall, S: PlaceSet, win: HeightWindow, q0: int, scale) -> list:
    """Per coordinate, the q_i (ascending) meeting every place condition for this q0."""
    d = ball.d
    out = []
    real = _real_bounds(ball, scale) if S.contains_infinity else None
    for i in range(d):
        conds = []
        for v in S:
            if v.is_infinite:
                continue
            y = q0 * ball.center_at(v).coords[i]
            conds.append(_congruence(y, v.prime, ball.exponent_at(v.prime) + padic_valuation(q0, v.prime)))
        cond = _crt(conds)
        if real is not None:
            lo, hi = real[i]
            L, U = math.floor(q0 * lo) + 1, math.ceil(q0 * hi) - 1  # open real ball
        else:
            L, U = -win.hi, win.hi
        out.append(_progression(cond, L, U))
    return out


def _shard(ball, S, win, q0s, scale, guard) -> list:
    out = []
    for q0 in q0s:
        ranges = _coord_ranges(ball, S, win, q0, scale)
        if math.prod(len(r) for r in ranges) > guard:
            raise SearchTooLargeError(f"more than {guard} candidates at q0={q0}")
        for q in itertools.product(*ranges):
            if win.contains(q, q0):
                out.append(Approximant(q0, q))
    return out


def count_candidates(ball: SBall, window, S: Optional[PlaceSet] = None, infinity_scale=1) -> int:
    """Size of the pruned search space, before the height filter."""
    S = ball.places if S is None else S
    win = _as_window(window, S)
    return sum(math.prod(len(r) for r in _coord_ranges(ball, S, win, q0, infinity_scale)) for q0 in _q0_range(win))


def enumerate_rationals(
    ball: SBall,
    window,
    S: Optional[PlaceSet] = None,
    infinity_scale=1,
    guard: int = GUARD,
    threads: int = 1,
) -> list:
    """Every (q, q0), q0 > 0, in the height window with q/q0 in the ball, sorted by (q0, q).

    ``window`` is a HeightWindow or the level n.  The real ball is open and
    enlarged by ``infinity_scale``; finite balls are closed.
    """
    S = ball.places if S is None else S
    win = _as_window(window, S)
    total = count_candidates(ball, win, S, infinity_scale)
    if total > guard:
        raise SearchTooLargeError(f"pruned search space has {total} candidates (guard {guard})")
    q0s = list(_q0_range(win))
    if threads <= 1 or len(q0s) < 2 * threads:
        return _shard(ball, S, win, q0s, infinity_scale, guard)
    step = -(-len(q0s) // threads)
    shards = [q0s[i:i + step] for i in range(0, len(q0s), step)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(lambda qs: _shard(ball, S, win, qs, infinity_scale, guard), shards)
    return sorted(itertools.chain.from_iterable(parts))


def enumerate_rationals_naive(
    ball: SBall,
    window,
    S: Optional[PlaceSet] = None,
    infinity_scale=1,
    limit: int = 10**9,
) -> list:
    """Oracle: test every grid point against each place's distance condition directly.

    Sup-norm balls are products, so each coordinate of the grid is tested
    separately (vectorised) and the survivors are combined.  The grid is
    [-2**(n+1), 2**(n+1)]**d without a real place, or the box spanned by the
    real ball for every q0 in the window.
    """
    S = ball.places if S is None else S
    win = _as_window(window, S)
    d = ball.d
    if S.contains_infinity:
        real = _real_bounds(ball, infinity_scale)
        boxes = [
            (math.floor(min(win.lo * a, win.hi * a)) - 1, math.ceil(max(win.lo * b, win.hi * b)) + 1) for a, b in real
        ]
    else:
        boxes = [(-win.hi, win.hi)] * d
    grid = math.prod(U - L + 1 for L, U in boxes) * len(_q0_range(win))
    if grid > limit:
        raise SearchTooLargeError(f"naive grid has {grid} points (limit {limit})")
    out = []
    for q0 in _q0_range(win):
        keep = []
        for i, (L, U) in enumerate(boxes):
            qs = np.arange(L, U + 1, dtype=object)
            mask = np.ones(len(qs), dtype=bool)
            for v in S:
                c = ball.center_at(v).coords[i]
                N = qs * c.denominator - c.numerator * q0  # (q/q0 - c) * q0 * den(c)
                if v.is_infinite:
                    R = ball.radius_at(v) * infinity_scale
                    mask &= np.abs(N) * R.denominator < R.numerator * q0 * c.denominator
                else:
                    p = v.prime
                    t = ball.exponent_at(p) + padic_valuation(q0 * c.denominator, p)
                    if t > 0:
                        mask &= (N % p**t) == 0
            keep.append([int(a) for a in qs[mask]])
        for q in itertools.product(*keep):
            if win.contains(q, q0):
                out.append(Approximant(q0, q))
    return out


@dataclass(frozen=True)
class SimplexVerdict:
    status: str  # "PASS" | "FAIL"
    n: int
    pairs: int
    points: tuple  # distinct rational points, sorted
    hyperplane: Optional[Hyperplane]
    certificate: tuple = ()  # d+1 affinely independent points when FAIL

    @property
    def passed(self) -> bool:
        return self.status == "PASS"


def _independent_subset(points: list, d: int) -> tuple:
    chosen = [points[0]]
    for x in points[1:]:
        if affine_rank(chosen + [x]) > affine_rank(chosen):
            chosen.append(x)
            if len(chosen) == d + 1:
                break
    return tuple(chosen)


def simplex_verdict(points, d: int, n: int, pairs: int = 0) -> SimplexVerdict:
    pts = sorted(set(as_point(x) for x in points), key=lambda x: x.coords)
    if not pts:
        return SimplexVerdict("PASS", n, pairs, (), None)
    h = affine_hull_hyperplane(pts)
    if h is not None:
        return SimplexVerdict("PASS", n, pairs, tuple(pts), h)
    return SimplexVerdict("FAIL", n, pairs, tuple(pts), None, _independent_subset(pts, d))


def verify_simplex_lemma(
    ball: SBall,
    window,
    S: Optional[PlaceSet] = None,
    infinity_scale=REGION_SCALE,
    guard: int = GUARD,
) -> SimplexVerdict:
    """PASS when every window rational in the ball lies on one rational hyperplane.

    With a real place the region is the ball enlarged 6x there, as in the
    lemma being checked.
    """
    S = ball.places if S is None else S
    win = _as_window(window, S)
    found = enumerate_rationals(ball, win, S, infinity_scale, guard)
    return simplex_verdict([a.point for a in found], ball.d, win.n, len(found))


# -- campaign over a whole cover ------------------------------------------------------


@dataclass
class CampaignReport:
    n: int
    d: int
    places: str
    radius: Fraction
    balls: int
    points: int  # distinct window rationals inside the union of the regions
    nonempty: int
    max_points: int
    groups_checked: int  # balls holding more than d points
    failures: list = field(default_factory=list)  # (ball index, SimplexVerdict)
    counts: dict = field(default_factory=dict, repr=False)  # ball index -> number of points

    @property
    def status(self) -> str:
        return "FAIL" if self.failures else "PASS"


def _primitive_grid(b: int, d: int, boxes: list) -> np.ndarray:
    axes = [np.arange(L, U + 1, dtype=np.int64) for L, U in boxes]
    grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    g = np.gcd.reduce(np.concatenate([grid, np.full((len(grid), 1), b, dtype=np.int64)], axis=1), axis=1)
    return grid[g == 1]


def simplex_campaign(measure, n: int, radius=None, infinity_scale=REGION_SCALE, guard: int = GUARD) -> CampaignReport:
    """Run the simplex check on every ball of the level-n cover at once.

    Every reduced rational of denominator (and, without a real place,
    numerators) at most 2**(n+1) is a multiple-free representative of some
    pair in the window, and conversely.  Each is assigned to the cover balls
    whose region holds it and balls are then checked group by group; balls
    holding at most d points pass trivially.
    """
    cover = cover_compact(measure, n, radius)
    S, d = measure.places, measure.d
    win = HeightWindow(n, S.mode)
    hi = win.hi
    if len(cover) >= 2**62:
        raise SearchTooLargeError("cover too large to index")
    finite = [(v, cover._axes[i], cover._counts[i], cover._sizes[i]) for i, v in enumerate(S) if not v.is_infinite]
    real_axis = next(((cover._axes[i], cover._sizes[i], i) for i, v in enumerate(S) if v.is_infinite), None)
    if real_axis is not None:
        R = cover.radius * infinity_scale
        centers = real_axis[0][3]
        boxes_of = lambda b: [(math.floor(b * (cs[0] - R)), math.ceil(b * (cs[-1] + R))) for cs in centers]
    else:
        boxes_of = lambda b: [(-hi, hi)] * d
    total = sum(math.prod(U - L + 1 for L, U in boxes_of(b)) for b in range(1, hi + 1))
    if total > guard:
        raise SearchTooLargeError(f"campaign grid has {total} points (guard {guard})")
    place_mult = []  # cover index = sum over places of place_index * multiplier
    mult = 1
    for size in reversed(cover._sizes):
        place_mult.append(mult)
        mult *= size
    place_mult = place_mult[::-1]
    keys, rows = [], []
    for b in range(1, hi + 1):
        if any(b % v.prime == 0 for v, *_ in finite):
            continue  # some coordinate leaves Z_p
        grid = _primitive_grid(b, d, boxes_of(b))
        if not len(grid):
            continue
        key = np.zeros(len(grid), dtype=np.int64)
        ok = np.ones(len(grid), dtype=bool)
        for v, (_, _, m, _), counts, _ in finite:
            p = v.prime
            comp = measure.component(v)
            mod = p**m
            inv = pow(b, -1, mod) if m > 0 else 0
            j = np.zeros(len(grid), dtype=np.int64)
            for c in range(d):
                res = (grid[:, c] % mod) * inv % mod if m > 0 else np.zeros(len(grid), dtype=np.int64)
                lookup = np.full(p, -1, dtype=np.int64)
                lookup[list(comp.digits[c])] = np.arange(len(comp.digits[c]))
                k = np.zeros(len(grid), dtype=np.int64)
                for _ in range(m):
                    digit = lookup[res % p]
                    ok &= digit >= 0
                    k = k * len(comp.digits[c]) + np.maximum(digit, 0)
                    res //= p
                j = j * counts[c] + k
            key += j * place_mult[list(S).index(v)]
        keys.append(key[ok])
        rows.append(np.concatenate([grid[ok], np.full((int(ok.sum()), 1), b, dtype=np.int64)], axis=1))
    keys = np.concatenate(keys) if keys else np.zeros(0, dtype=np.int64)
    rows = np.concatenate(rows) if rows else np.zeros((0, d + 1), dtype=np.int64)
    n_points = len(rows)
    if real_axis is not None:
        keys, rows = _attach_real(keys, rows, real_axis, cover.radius * infinity_scale, place_mult, d)
    uniq, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
    report = CampaignReport(
        n=n,
        d=d,
        places=str(S),
        radius=cover.radius,
        balls=len(cover),
        points=n_points,
        nonempty=len(uniq),
        max_points=int(counts.max()) if len(counts) else 0,
        groups_checked=int((counts > d).sum()),
        counts={int(k): int(c) for k, c in zip(uniq, counts) if c > 1},
    )
    big = np.nonzero(counts > d)[0]
    if len(big):
        order = np.argsort(inverse, kind="stable")
        starts = np.concatenate([[0], np.cumsum(counts)])
        for g in big:
            members = rows[order[starts[g]:starts[g + 1]]]
            pts = [RationalPoint(tuple(Fraction(int(a), int(r[-1])) for a in r[:-1])) for r in members]
            verdict = simplex_verdict(pts, d, n, len(pts))
            if not verdict.passed:
                report.failures.append((int(uniq[g]), verdict))
    return report


def _attach_real(keys, rows, real_axis, R, place_mult, d):
    """Duplicate each point once per real-place ball whose enlarged region holds it."""
    (_, _, _, centers), _, pos = real_axis
    counts = [len(cs) for cs in centers]
    floats = [np.array([float(c) for c in cs]) for cs in centers]
    new_keys, new_rows = [], []
    for key, row in zip(keys.tolist(), rows.tolist()):
        b = row[-1]
        per_coord = []
        for c in range(d):
            x = Fraction(row[c], b)
            xf = float(x)
            lo = int(np.searchsorted(floats[c], xf - float(R))) - 1
            hi = int(np.searchsorted(floats[c], xf + float(R))) + 1
            per_coord.append([k for k in range(max(lo, 0), min(hi, counts[c])) if abs(x - centers[c][k]) < R])
        for combo in itertools.product(*per_coord):
            j = 0
            for c, k in enumerate(combo):
                j = j * counts[c] + k
            new_keys.append(key + j * place_mult[pos])
            new_rows.append(row)
    return np.array(new_keys, dtype=np.int64), np.array(new_rows, dtype=np.int64).reshape(-1, d + 1)


# -- witnesses ------------------------------------------------------------------------


@dataclass(frozen=True)
class Power:
    """base ** exponent for a positive integer base and rational exponent, compared exactly."""

    base: int
    exponent: Fraction

    def cmp(self, v: Fraction) -> int:
        """Sign of v - base**exponent."""
        if v <= 0:
            return -1  # the bound is positive
        a, b = self.exponent.numerator, self.exponent.denominator
        lhs = v**b * (self.base ** (-a) if a < 0 else 1)
        rhs = self.base**a if a >= 0 else 1
        return (lhs > rhs) - (lhs < rhs)

    def __str__(self) -> str:
        a, b = self.exponent.numerator, self.exponent.denominator
        root = round(self.base ** (1 / b))
        if root**b == self.base:
            return format_rational(Fraction(root) ** a)
        return f"{self.base}^({format_rational(self.exponent)})"


@dataclass(frozen=True)
class Witness:
    q: tuple
    q0: int
    n: int
    lhs: Fraction  # exact value, or a certified upper bound when precision is set
    rhs: str  # exact text of the bound
    precision: Optional[int] = None

    def to_json(self) -> dict:
        out = {"q": list(self.q), "q0": self.q0, "n": self.n, "lhs": format_rational(self.lhs), "rhs": self.rhs}
        if self.precision is not None:
            out["precision"] = self.precision
        return out


def witnesses_to_jsonl(witnesses) -> str:
    return "".join(json.dumps(w.to_json()) + "\n" for w in witnesses)


def _level(h: int) -> int:
    return max(h.bit_length() - 1, 0)


def _finite_exponent(cmp, p: int, l: int, floor: int) -> Optional[int]:
    """Least e >= floor with cmp(p**(-e*l)) <= 0, i.e. |.|_p <= p**-e suffices; None if none below 4096."""
    e = floor
    while cmp(ppow(p, -e * l)) > 0:
        e += 1
        if e > 4096:
            return None
    return e


def _root_upper(cmp, l: int, guess: float) -> Fraction:
    """A rational rho with cmp(rho**l) >= 0, starting from a float guess of the root."""
    rho = Fraction(max(guess, 2.0**-1000)) * (1 + Fraction(1, 2**40))
    while cmp(rho**l) < 0:
        rho *= 2
    return rho


def dirichlet_bound(d: int, S: PlaceSet, h: int, q0: int, exponent: str = "inverse-d") -> Power:
    """Right-hand side of the S-arithmetic Dirichlet inequality for (q, q0)."""
    if not S.contains_infinity:
        return Power(h, Fraction(-(d + 1), d))
    if exponent == "inverse-d":
        return Power(q0, Fraction(-1, d))
    if exponent == "classical":
        return Power(q0, Fraction(-(d + 1), d))
    raise DomainError(f"unknown Dirichlet exponent convention {exponent!r}")


def dirichlet_witnesses(
    x,
    T: int,
    S: PlaceSet,
    min_height: int = 1,
    exponent: str = "inverse-d",
) -> Iterator[Witness]:
    """All (q, q0), q0 >= 1, with ||q0 x + q||_S**l <= bound, heights min_height..T.

    Order: height, then q0, then q by its sup norm and lexicographically, so
    the smallest correction comes first.
    """
    x = as_point(x)
    d, l = x.d, S.l
    if snorm(x, S) > 1:
        raise DomainError(f"{x} lies outside the unit ball of Q_S")
    if T < 1:
        raise DomainError("T must be >= 1")
    params: dict = {}
    for h in range(max(min_height, 1), T + 1):
        for q0 in range(1, h + 1):
            bound = dirichlet_bound(d, S, h, q0, exponent)
            if bound not in params:
                params[bound] = _bound_params(bound, S)
            exps, rho = params[bound]
            ranges = _witness_ranges(x, q0, S, exps, rho, (-h, h))
            cands = sorted(itertools.product(*ranges), key=lambda q: (max(abs(a) for a in q), q))
            for q in cands:
                if q0 < h and max(abs(a) for a in q) != h:
                    continue
                val = snorm(RationalPoint(tuple(q0 * a + b for a, b in zip(x.coords, q))), S) ** l
                if bound.cmp(val) <= 0:
                    yield Witness(q, q0, _level(h), val, str(bound))


def _bound_params(bound: Power, S: PlaceSet) -> tuple:
    """Per-place pruning data for |q0 x + q|_v**l <= bound: finite exponents and a real radius."""
    l = S.l
    # q0 x + q lies in Z_p, so exponents below 0 never bind
    exps = {p: _finite_exponent(bound.cmp, p, l, floor=0) for p in S.finite_primes}
    rho = None
    if S.contains_infinity:
        rho = _root_upper(bound.cmp, l, (float(bound.base) ** float(bound.exponent)) ** (1.0 / l))
    return exps, rho


def _witness_ranges(x: RationalPoint, q0: int, S: PlaceSet, exps: dict, rho, box: tuple) -> list:
    """Per coordinate, the q_i with |q0 x_i + q_i|_v**l within the bound at each place."""
    out = []
    for xi in x.coords:
        y = -q0 * xi
        L, U = box
        if rho is not None:
            L, U = max(L, math.ceil(y - rho)), min(U, math.floor(y + rho))
        conds = [False if e is None else _congruence(y, p, e) for p, e in exps.items()]
        out.append(_progression(_crt(conds), L, U))
    return out


def dirichlet_witness(x, T: int, S: PlaceSet, min_height: int = 1, exponent: str = "inverse-d") -> Optional[Witness]:
    return next(dirichlet_witnesses(x, T, S, min_height, exponent), None)


def _place_interval(x, v: Place, q: tuple, q0: int) -> tuple:
    """Bounds (lo, hi) on max_i |x_i + q_i/q0|_v, exact for rational points."""
    if isinstance(x, RationalPoint):
        val = max(v.abs(a + Fraction(b, q0)) for a, b in zip(x.coords, q))
        return val, val
    lo = hi = Fraction(0)
    if v.is_infinite:
        for i, b in enumerate(q):
            a0, a1 = x.real_enclosure(i)
            t0, t1 = a0 + Fraction(b, q0), a1 + Fraction(b, q0)
            low = Fraction(0) if t0 <= 0 <= t1 else min(abs(t0), abs(t1))
            lo, hi = max(lo, low), max(hi, abs(t0), abs(t1))
        return lo, hi
    N = x.precision
    cap = ppow(v.prime, -N)
    for a, b in zip(x.at(v).coords, q):
        z = v.abs(a + Fraction(b, q0))
        # x agrees with its representative to N digits
        if z > cap:
            lo, hi = max(lo, z), max(hi, z)
        else:
            hi = max(hi, cap)
    return lo, hi


def psi_witnesses(
    x,
    psi,
    n: int,
    S: PlaceSet,
    max_precision: int = 1024,
    guard: int = GUARD,
) -> list:
    """All (q, q0) in B_n, q0 > 0, with ||x + q/q0||_S**l <= psi(height).

    ``x`` is a RationalPoint or a DigitPoint.  A DigitPoint is deepened until
    every comparison is decided; each witness records the precision used.
    """
    digit = not isinstance(x, RationalPoint)
    if not digit:
        x = as_point(x)
    d, l = x.d, S.l
    win = HeightWindow(n, S.mode)

    def cmp_lo(v):
        return psi.cmp(v, win.lo)

    exps = {}
    for v in S:
        if not v.is_infinite:
            e = _finite_exponent(cmp_lo, v.prime, l, floor=-(win.hi.bit_length() + 1))
            exps[v.prime] = e
    if any(e is None for e in exps.values()):
        # psi(2**n) is 0 (or below every p-adic value): only exact hits x = -q/q0 count
        return [] if digit else _exact_hits(x, psi, n, S, win)
    if digit:
        need = max([e + 1 for e in exps.values()] + [x.precision])
        if need > max_precision:
            raise PrecisionExhaustedError(f"pruning needs {need} digits (cap {max_precision})")
        x = x.deepen(need)
    rho = psi.root_upper(win.lo, l) if S.contains_infinity else None
    found = []
    total = 0
    for q0 in _q0_range(win):
        ranges = []
        for i in range(d):
            conds = []
            for p, e in exps.items():
                y = -q0 * x.at(Place(p)).coords[i]
                conds.append(_congruence(y, p, e + padic_valuation(q0, p)))
            if rho is not None:
                if digit:
                    a0, a1 = x.real_enclosure(i)
                else:
                    a0 = a1 = x.coords[i]
                L, U = math.ceil(q0 * (-a1 - rho)), math.floor(q0 * (-a0 + rho))
            else:
                L, U = -win.hi, win.hi
            ranges.append(_progression(_crt(conds), L, U))
        total += math.prod(len(r) for r in ranges)
        if total > guard:
            raise SearchTooLargeError(f"witness search exceeded {guard} candidates")
        for q in itertools.product(*ranges):
            if not win.contains(q, q0):
                continue
            h = q0 if S.contains_infinity else max(q0, *(abs(a) for a in q))
            while True:
                bounds = [_place_interval(x, v, q, q0) for v in S]
                lo = max(b[0] for b in bounds) ** l
                hi = max(b[1] for b in bounds) ** l
                if psi.cmp(hi, h) <= 0:
                    found.append(Witness(q, q0, n, hi, psi.describe(h), x.precision if digit else None))
                    break
                if psi.cmp(lo, h) > 0:
                    break
                if not digit or x.precision * 2 > max_precision:
                    raise PrecisionExhaustedError(f"cannot decide ({q};{q0}) at precision {getattr(x, 'precision', None)}")
                x = x.deepen(x.precision * 2)
    return found


def _exact_hits(x: RationalPoint, psi, n: int, S: PlaceSet, win: HeightWindow) -> list:
    out = []
    for q0 in _q0_range(win):
        q = tuple(-q0 * a for a in x.coords)
        if any(a.denominator != 1 for a in q):
            continue
        q = tuple(int(a) for a in q)
        if win.contains(q, q0):
            h = q0 if S.contains_infinity else max(q0, *(abs(a) for a in q))
            if psi.cmp(0, h) <= 0:
                out.append(Witness(q, q0, n, Fraction(0), psi.describe(h)))
    return out


class PsiHitTable:
    """All psi-witnesses of B_n at once, for place sets without the real place.

    When psi(2**n) < 1 every witness has x + q/q0 in Z_p with
    |x + q/q0|_p <= p**-e_p(h), a congruence x = -q/q0 mod p**e_p(h).  The
    table maps each exponent vector (e_p) to a multiset of residue keys, so
    counting the witnesses of a point is one lookup per exponent vector.
    """

    def __init__(self, psi, n: int, S: PlaceSet, d: int, guard: int = GUARD):
        if S.contains_infinity:
            raise DomainError("the residue table needs a place set without the real place")
        self.n, self.S, self.d = n, S, d
        win = HeightWindow(n, S.mode)
        if (2 * win.hi + 1) ** d * win.hi > guard:
            raise SearchTooLargeError(f"window B_{n} in dimension {d} exceeds the guard {guard}")
        primes = S.finite_primes
        exps_of = {}
        for h in range(win.lo, win.hi + 1):
            es = tuple(_finite_exponent(lambda v: psi.cmp(v, h), p, S.l, floor=-(win.hi.bit_length() + 1)) for p in primes)
            if any(e is not None and e < 1 for e in es):
                raise DomainError(f"psi({h}) is too large for the residue table")
            exps_of[h] = es
        self.tables: dict = {}
        span = range(-win.hi, win.hi + 1)
        for q0 in range(1, win.hi + 1):
            for q in itertools.product(span, repeat=d):
                h = max(q0, *(abs(a) for a in q))
                if h < win.lo:
                    continue
                es = exps_of[h]
                if any(e is None for e in es):
                    continue  # psi(h) = 0: only exact hits, none for sampled points
                key = []
                for p, e in zip(primes, es):
                    for a in q:
                        y = Fraction(-a, q0)
                        if y.denominator % p == 0:
                            break
                        key.append(residue_mod(y, p, e))
                    else:
                        continue
                    break
                else:
                    bucket = self.tables.setdefault(es, {})
                    bucket[tuple(key)] = bucket.get(tuple(key), 0) + 1
        self.precision = max((max(es) for es in self.tables), default=1)

    def count(self, x) -> int:
        """Number of (q, q0) in B_n with ||x + q/q0||_S**l <= psi(height)."""
        if not isinstance(x, RationalPoint):
            x = x.deepen(self.precision)
        total = 0
        for es, bucket in self.tables.items():
            key = []
            for p, e in zip(self.S.finite_primes, es):
                xs = x.at(Place(p)).coords
                key.extend(residue_mod(a, p, e) for a in xs)
            total += bucket.get(tuple(key), 0)
        return total
