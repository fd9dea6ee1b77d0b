"""The affine matrix of d+1 rational points and what its determinant says.

For points r_1..r_{d+1} in Q^d the matrix A has rows (1, r_i).  A Z_S^{d+1}
is a lattice exactly when det A != 0, and its covolume is the content of
det A over S together with the real place.  Heights of the points bound that
content from below, while a small ball containing all the points bounds it
from above; :func:`volume_contradiction` puts the two exact numbers side by
side.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .enumeration.balls import REGION_SCALE, SBall, in_ball, radius_schedule, snap_radius
from .errors import DimensionError, HypothesisError, NotALatticeError
from .exactnum import format_rational, pow2
from .places import PlaceSet, RationalPoint, as_point, content


@dataclass(frozen=True)
class AffineMatrix:
    entries: tuple
    source_points: tuple

    @property
    def size(self) -> int:
        return len(self.entries)

    def __str__(self) -> str:
        return "[" + ", ".join(
            "[" + ", ".join(format_rational(x) for x in row) + "]" for row in self.entries
        ) + "]"


@dataclass(frozen=True)
class HeightWindow:
    """The closed dyadic window B_n on (q, q0)."""

    n: int
    mode: str  # "all-finite" | "with-infinity"

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("window level n must be >= 0")

    @property
    def lo(self) -> int:
        return 1 << self.n

    @property
    def hi(self) -> int:
        return 1 << (self.n + 1)

    def contains(self, q: Sequence[int], q0: int) -> bool:
        h = abs(q0) if self.mode == "with-infinity" else max(abs(q0), *(abs(c) for c in q))
        return self.lo <= h <= self.hi


@dataclass(frozen=True)
class Hyperplane:
    """c_1 x_1 + ... + c_d x_d = b with a primitive integer vector (c, b)."""

    coefficients: tuple

    @property
    def normal(self) -> tuple:
        return self.coefficients[:-1]

    @property
    def offset(self) -> int:
        return self.coefficients[-1]

    def contains(self, x) -> bool:
        x = as_point(x)
        return sum(c * xi for c, xi in zip(self.normal, x.coords)) == self.offset

    def __str__(self) -> str:
        return " + ".join(f"{c}*x{i + 1}" for i, c in enumerate(self.normal)) + f" = {self.offset}"


def build_A(points) -> AffineMatrix:
    points = tuple(as_point(p) for p in points)
    if not points:
        raise DimensionError("build_A needs at least one point")
    d = points[0].d
    if any(p.d != d for p in points):
        raise DimensionError("points of mixed dimension")
    return AffineMatrix(tuple((Fraction(1),) + p.coords for p in points), points)


def _bareiss(rows: list) -> int:
    m = [list(r) for r in rows]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def det_exact(A) -> Fraction:
    """Determinant by fraction-free elimination after clearing row denominators."""
    rows = A.entries if isinstance(A, AffineMatrix) else A
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise DimensionError("determinant of a non-square matrix")
    scale = 1
    int_rows = []
    for r in rows:
        lcm = math.lcm(*(Fraction(x).denominator for x in r))
        scale *= lcm
        int_rows.append([int(Fraction(x) * lcm) for x in r])
    return Fraction(_bareiss(int_rows), scale)


def affine_independent(points) -> bool:
    points = [as_point(p) for p in points]
    d = points[0].d if points else 0
    if len(points) != d + 1:
        raise DimensionError(f"need exactly d+1 = {d + 1} points, got {len(points)}")
    return det_exact(build_A(points)) != 0


def covolume(A: AffineMatrix, S: PlaceSet) -> Fraction:
    det = det_exact(A)
    if det == 0:
        raise NotALatticeError("singular matrix: A Z_S^{d+1} is not a lattice")
    return content(det, S.with_infinity())


def det_bound(d: int, n: int) -> Fraction:
    return pow2(-(d + 1) * (n + 1))


def _lemma_window(p: Sequence[int], q: int, n: int, mode: str) -> bool:
    if mode == "with-infinity":
        return (1 << n) < abs(q) < (1 << (n + 1))
    return 0 < max(abs(q), *(abs(c) for c in p)) < (1 << (n + 1))


@dataclass(frozen=True)
class DetBoundVerdict:
    n: int
    mode: str
    quantity: Fraction
    bound: Fraction
    lemma_window: tuple  # per point: inside the lemma's strict height window
    closed_window: tuple  # per point: inside the closed window B_n

    @property
    def hypotheses_hold(self) -> bool:
        return all(self.lemma_window)

    @property
    def exceeds(self) -> bool:
        return self.quantity > self.bound

    @property
    def status(self) -> str:
        if not self.hypotheses_hold:
            return "hypothesis-failure"
        return "confirmed" if self.exceeds else "violated"


def _split_data(data) -> tuple:
    pts, raw = [], []
    for p, q in data:
        p = tuple(int(c) for c in (p if isinstance(p, (list, tuple)) else (p,)))
        q = int(q)
        if q == 0:
            raise HypothesisError("point with zero denominator")
        raw.append((p, q))
        pts.append(RationalPoint(tuple(Fraction(c, q) for c in p)))
    return pts, raw


def check_det_lower_bound(data, n: int, S: PlaceSet) -> DetBoundVerdict:
    """``data`` is a list of (p_i, q_i) with integer vector p_i and q_i != 0.

    All-finite S: the product of |det A|_v over v in S must exceed 2**-(d+1)(n+1).
    With the real place: the full covolume must exceed the same bound.
    """
    pts, raw = _split_data(data)
    A = build_A(pts)
    det = det_exact(A)
    if det == 0:
        raise NotALatticeError("points lie on a hyperplane; A Z_S^{d+1} is not a lattice")
    d = pts[0].d
    if len(pts) != d + 1:
        raise DimensionError(f"need exactly d+1 = {d + 1} points")
    window = HeightWindow(n, S.mode)
    return DetBoundVerdict(
        n=n,
        mode=S.mode,
        quantity=content(det, S),
        bound=det_bound(d, n),
        lemma_window=tuple(_lemma_window(p, q, n, S.mode) for p, q in raw),
        closed_window=tuple(window.contains(p, q) for p, q in raw),
    )


def random_window_tuple(rng: random.Random, d: int, n: int, S: PlaceSet) -> list:
    """d+1 affinely independent (p_i, q_i) inside the lemma's strict height window."""
    hi = 1 << (n + 1)
    if S.contains_infinity and n == 0:
        raise HypothesisError("the strict window 1 < |q| < 2 is empty")
    while True:
        data = []
        for _ in range(d + 1):
            if S.contains_infinity:
                q = rng.choice((-1, 1)) * rng.randrange((1 << n) + 1, hi)
                p = [rng.randint(-4 * hi, 4 * hi) for _ in range(d)]
            else:
                q = rng.choice((-1, 1)) * rng.randrange(1, hi)
                p = [rng.randint(-hi + 1, hi - 1) for _ in range(d)]
            data.append((p, q))
        pts, _ = _split_data(data)
        if det_exact(build_A(pts)) != 0:
            return data


@dataclass(frozen=True)
class VolumeCertificate:
    """Covolume lower bound against the Haar volume of the box holding the fundamental domain.

    In the all-finite case both numbers are divided by |det A|_inf, which is
    common to the two sides.
    """

    d: int
    n: int
    places: str
    mode: str
    lower: Fraction
    upper: Fraction
    observed: Optional[Fraction] = None
    radii: tuple = field(default=())

    @property
    def holds(self) -> bool:
        return self.lower > self.upper

    @property
    def implementation_bug(self) -> bool:
        return not self.holds

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "n": self.n,
            "places": self.places,
            "mode": self.mode,
            "lower": format_rational(self.lower),
            "upper": format_rational(self.upper),
            "observed": None if self.observed is None else format_rational(self.observed),
            "radii": {str(v): format_rational(r) for v, r in self.radii},
            "holds": self.holds,
        }


def _box_volume(d: int, S: PlaceSet, radii: dict) -> Fraction:
    vol = Fraction(1)
    for v in S:
        r = radii[v]
        # a real ball of radius R in sup norm is a cube of side 2R
        vol *= (2 * REGION_SCALE * r) ** d if v.is_infinite else r**d
    return vol


def volume_bounds(d: int, n: int, S: PlaceSet) -> VolumeCertificate:
    """The point-free comparison for balls of the scheduled radius r_n."""
    r = radius_schedule(n, d, S.l).value
    radii = {v: (r if v.is_infinite else snap_radius(r, v.prime)) for v in S}
    return VolumeCertificate(
        d=d,
        n=n,
        places=str(S),
        mode=S.mode,
        lower=det_bound(d, n),
        upper=_box_volume(d, S, radii),
        radii=tuple(radii.items()),
    )


def volume_contradiction(data, n: int, S: PlaceSet, ball: SBall) -> VolumeCertificate:
    """Certificate for d+1 points of ``ball`` (real factor 6x) with heights in B_n.

    Raises :class:`HypothesisError` when the points or the ball fall outside the
    lemma's hypotheses.
    """
    pts, raw = _split_data(data)
    d = ball.d
    if len(pts) != d + 1 or any(p.d != d for p in pts):
        raise HypothesisError(f"need d+1 = {d + 1} points of dimension {d}")
    scheduled = radius_schedule(n, d, S.l).value
    if ball.nominal_radius > scheduled:
        raise HypothesisError(f"ball radius {ball.nominal_radius} exceeds r_n = {scheduled}")
    window = HeightWindow(n, S.mode)
    for (p, q), x in zip(raw, pts):
        if not window.contains(p, q):
            raise HypothesisError(f"height of ({p}, {q}) is outside B_{n}")
        if not in_ball(x, ball, S, infinity_scale=REGION_SCALE):
            raise HypothesisError(f"point {x} lies outside the region of {ball}")
    det = det_exact(build_A(pts))
    if det == 0:
        raise HypothesisError("points are affinely dependent")
    radii = {v: ball.radius_at(v) for v in S}
    return VolumeCertificate(
        d=d,
        n=n,
        places=str(S),
        mode=S.mode,
        lower=det_bound(d, n),
        upper=_box_volume(d, S, radii),
        observed=content(det, S),
        radii=tuple(radii.items()),
    )


def _rref(rows: list) -> tuple:
    m = [list(r) for r in rows]
    ncols = len(m[0]) if m else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        lead = m[r][c]
        m[r] = [x / lead for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def affine_rank(points) -> int:
    """Rank of the rows (1, x_i): one more than the dimension of the affine hull."""
    rows = [[Fraction(1), *as_point(p).coords] for p in points]
    return len(_rref(rows)[1]) if rows else 0


def affine_hull_hyperplane(points) -> Optional[Hyperplane]:
    """A canonical primitive integer hyperplane through all points, or None if they span Q^d.

    Rows (x_i, -1) are reduced to echelon form; the kernel vector of the first
    free column is cleared to integers and made primitive with its first
    nonzero normal coefficient positive.  The echelon form depends only on the
    row space, so permuting the points does not change the answer.
    """
    points = [as_point(p) for p in points]
    if not points:
        return None
    d = points[0].d
    if any(p.d != d for p in points):
        raise DimensionError("points of mixed dimension")
    rows = [[*p.coords, Fraction(-1)] for p in points]
    red, pivots = _rref(rows)
    free = [c for c in range(d + 1) if c not in pivots]
    if not free:
        return None
    f = free[0]
    vec = [Fraction(0)] * (d + 1)
    vec[f] = Fraction(1)
    for row, c in zip(red, pivots):
        vec[c] = -row[f]
    lcm = math.lcm(*(x.denominator for x in vec))
    ints = [int(x * lcm) for x in vec]
    g = math.gcd(*ints)
    ints = [x // g for x in ints]
    lead = next(x for x in ints[:d] if x != 0)
    if lead < 0:
        ints = [-x for x in ints]
    return Hyperplane(tuple(ints))
