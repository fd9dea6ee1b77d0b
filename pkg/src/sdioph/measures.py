"""Self-similar digit measures on Z_p^d and [0,1)^d.

A :class:`DigitMeasure` picks the digits of each coordinate independently
from an allowed alphabet with rational weights: base-p digits (lowest first)
at a finite place, base-b digits after the radix point at the real place.
Every ball measure is then an exact rational.  A :class:`ProductMeasure`
holds one component per place of S.

Spec grammar for :func:`parse_measure`, components separated by ``;``::

    p:3 digits:0,2 d:1
    p:inf base:3 digits:0,2 d:2 weights:1/4,3/4
    p:5 digits:0,1|0,1,2,3,4 d:2        # per-coordinate alphabets split by |
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .enumeration.balls import SBall
from .errors import ConfigError, DomainError, EmptyBallError, FitError, RadiusError
from .exactnum import as_rational, format_rational, parse_rational, ppow, snap_exponent
from .places import INFINITY, Place, PlaceSet, RationalPoint, as_point, _coerce_place

_BLOCK = 64


@dataclass(frozen=True)
class DigitMeasure:
    place: Place
    base: int
    digits: tuple  # per coordinate, sorted allowed digits
    weights: tuple  # per coordinate, Fractions aligned with ``digits``

    def __post_init__(self):
        if not self.place.is_infinite and self.base != self.place.prime:
            raise DomainError(f"base {self.base} must equal the prime {self.place.prime}")
        if self.base < 2:
            raise DomainError("digit base must be >= 2")
        if not self.digits:
            raise DomainError("a digit measure needs dimension d >= 1")
        for ds, ws in zip(self.digits, self.weights):
            if not ds:
                raise DomainError("empty digit set")
            if len(set(ds)) != len(ds) or any(not 0 <= a < self.base for a in ds):
                raise DomainError(f"digits {ds} must be distinct and lie in 0..{self.base - 1}")
            if len(ws) != len(ds) or any(w <= 0 for w in ws) or sum(ws) != 1:
                raise DomainError(f"weights {ws} must be positive and sum to 1")
            if len(ds) == 1:
                raise DomainError("a single allowed digit gives an atomic measure")

    @classmethod
    def build(cls, place, digits, d: int = 1, base: Optional[int] = None, weights=None):
        place = _coerce_place(place)
        if base is None:
            if place.is_infinite:
                raise DomainError("the real place needs an explicit base")
            base = place.prime
        if digits and isinstance(digits[0], (list, tuple)):
            per = [tuple(ds) for ds in digits]
            if len(per) != d:
                raise DomainError(f"{len(per)} digit sets for dimension {d}")
        else:
            per = [tuple(digits)] * d
        if weights is None:
            ws = [tuple(Fraction(1, len(ds)) for _ in ds) for ds in per]
        elif weights and isinstance(weights[0], (list, tuple)):
            ws = [tuple(as_rational(w) for w in wt) for wt in weights]
        else:
            ws = [tuple(as_rational(w) for w in weights)] * d
        if len(ws) != len(per) or any(len(a) != len(b) for a, b in zip(per, ws)):
            raise DomainError("each digit needs exactly one weight")
        # sort digits, carrying their weights along
        pairs = [sorted(zip(ds, wt)) for ds, wt in zip(per, ws)]
        return cls(place, base, tuple(tuple(a for a, _ in ps) for ps in pairs), tuple(tuple(w for _, w in ps) for ps in pairs))

    @property
    def d(self) -> int:
        return len(self.digits)

    def weight(self, coord: int, digit: int) -> Fraction:
        try:
            return self.weights[coord][self.digits[coord].index(digit)]
        except ValueError:
            return Fraction(0)

    def weight_below(self, coord: int, digit: int) -> Fraction:
        return sum((w for a, w in zip(self.digits[coord], self.weights[coord]) if a < digit), Fraction(0))

    def prefix_weight(self, coord: int, prefix: Sequence[int]) -> Fraction:
        out = Fraction(1)
        for a in prefix:
            out *= self.weight(coord, a)
            if out == 0:
                break
        return out

    def decay_exponents(self) -> tuple:
        """Per coordinate: -log(max weight) / log(base); log|digits|/log(base) when uniform."""
        return tuple(-math.log(max(ws)) / math.log(self.base) for ws in self.weights)

    @property
    def alpha(self) -> float:
        return min(self.decay_exponents())

    def cdf(self, coord: int, t) -> Fraction:
        """mu([0, t)) for the real-place coordinate measure, exact for rational t."""
        t = as_rational(t)
        if t <= 0:
            return Fraction(0)
        if t >= 1:
            return Fraction(1)
        b = self.base
        seen: dict = {}
        terms = []  # (prefix product before digit, weight_below(digit), weight(digit))
        while t not in seen:
            seen[t] = len(terms)
            scaled = t * b
            a = scaled.numerator // scaled.denominator
            terms.append((self.weight_below(coord, a), self.weight(coord, a)))
            t = scaled - a
            if t == 0:
                break
        start = seen.get(t) if t != 0 else None
        total, prod = Fraction(0), Fraction(1)
        head = terms if start is None else terms[:start]
        for below, w in head:
            total += prod * below
            prod *= w
        if start is None:
            return total
        cyc_sum, cyc_prod = Fraction(0), Fraction(1)
        for below, w in terms[start:]:
            cyc_sum += cyc_prod * below
            cyc_prod *= w
        # cyc_prod < 1 because no coordinate measure is atomic
        return total + prod * cyc_sum / (1 - cyc_prod)

    def interval_measure(self, coord: int, lo, hi) -> Fraction:
        lo, hi = as_rational(lo), as_rational(hi)
        if hi <= lo:
            return Fraction(0)
        return self.cdf(coord, hi) - self.cdf(coord, lo)

    def coordinate_prefix(self, x: Fraction, k: int) -> Optional[tuple]:
        """First k digits of one coordinate, or None when x lies outside Z_p / [0,1)."""
        if k <= 0:
            return ()
        if self.place.is_infinite:
            if not 0 <= x < 1:
                return None
            n = math.floor(x * self.base**k)
            return tuple((n // self.base ** (k - 1 - i)) % self.base for i in range(k))
        if x.denominator % self.base == 0:
            return None
        mod = self.base**k
        n = x.numerator * pow(x.denominator, -1, mod) % mod
        return tuple((n // self.base**i) % self.base for i in range(k))

    def tail_value(self, coord: int, prefix: Sequence[int]) -> Fraction:
        """The support point with this prefix followed by the smallest allowed digit forever."""
        b, dmin = self.base, self.digits[coord][0]
        N = len(prefix)
        if self.place.is_infinite:
            head = sum((Fraction(a, b ** (i + 1)) for i, a in enumerate(prefix)), Fraction(0))
            return head + Fraction(dmin, b**N * (b - 1))
        head = sum(a * b**i for i, a in enumerate(prefix))
        # sum_{j >= N} dmin p**j converges p-adically to dmin p**N / (1 - p)
        return Fraction(head) + Fraction(dmin * b**N, 1 - b)

    def spec(self) -> str:
        parts = [f"p:{self.place}"]
        if self.place.is_infinite:
            parts.append(f"base:{self.base}")
        parts.append("digits:" + "|".join(",".join(map(str, ds)) for ds in _collapse(self.digits)))
        parts.append(f"d:{self.d}")
        uniform = all(len(set(ws)) == 1 for ws in self.weights)
        if not uniform:
            parts.append("weights:" + "|".join(",".join(format_rational(w) for w in ws) for ws in _collapse(self.weights)))
        return " ".join(parts)


def _collapse(per: tuple) -> tuple:
    return per[:1] if len(set(per)) == 1 else per


@dataclass(frozen=True)
class ProductMeasure:
    components: tuple

    def __post_init__(self):
        comps = tuple(sorted(self.components, key=lambda c: c.place.sort_key()))
        if not comps:
            raise DomainError("a product measure needs at least one component")
        if len({c.d for c in comps}) != 1:
            raise DomainError("all components must share the dimension d")
        PlaceSet(tuple(c.place for c in comps))  # distinct places
        object.__setattr__(self, "components", comps)

    @property
    def places(self) -> PlaceSet:
        return PlaceSet(tuple(c.place for c in self.components))

    @property
    def d(self) -> int:
        return self.components[0].d

    @property
    def alpha(self) -> float:
        return min(c.alpha for c in self.components)

    def component(self, place: Place) -> DigitMeasure:
        for c in self.components:
            if c.place == place:
                return c
        raise KeyError(str(place))

    def spec(self) -> str:
        return "; ".join(c.spec() for c in self.components)


def haar(S: PlaceSet, d: int = 1, real_base: int = 2) -> ProductMeasure:
    """Full-digit measures: Haar on Z_p^d, Lebesgue on [0,1)^d."""
    comps = []
    for v in S:
        base = real_base if v.is_infinite else v.prime
        comps.append(DigitMeasure.build(v, list(range(base)), d=d, base=base))
    return ProductMeasure(tuple(comps))


def parse_measure(text: str) -> ProductMeasure:
    comps = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        fields = {}
        for tok in chunk.split():
            if ":" not in tok:
                raise ConfigError("measure", f"token {tok!r} is not key:value")
            k, v = tok.split(":", 1)
            if k not in ("p", "base", "digits", "d", "weights"):
                raise ConfigError("measure", f"unknown field {k!r}")
            fields[k] = v
        if "p" not in fields or "digits" not in fields:
            raise ConfigError("measure", f"component {chunk!r} needs p: and digits:")
        try:
            place = _coerce_place(fields["p"])
            d = int(fields.get("d", 1))
            base = int(fields["base"]) if "base" in fields else None
            digit_sets = [[int(a) for a in part.split(",")] for part in fields["digits"].split("|")]
            digits = digit_sets if len(digit_sets) > 1 else digit_sets[0]
            weights = None
            if "weights" in fields:
                wsets = [[parse_rational(w) for w in part.split(",")] for part in fields["weights"].split("|")]
                weights = wsets if len(wsets) > 1 else wsets[0]
            comps.append(DigitMeasure.build(place, digits, d=d, base=base, weights=weights))
        except ConfigError:
            raise
        except (ValueError, DomainError) as exc:
            raise ConfigError("measure", str(exc)) from None
    if not comps:
        raise ConfigError("measure", "empty measure spec")
    return ProductMeasure(tuple(comps))


def _digit_block(m: DigitMeasure, seed: int, index: int, place_i: int, coord: int, block: int) -> tuple:
    rng = np.random.default_rng([seed, index, place_i, coord, block])
    probs = np.array([float(w) for w in m.weights[coord]])
    picks = rng.choice(len(m.digits[coord]), size=_BLOCK, p=probs / probs.sum())
    return tuple(m.digits[coord][i] for i in picks)


@dataclass(frozen=True)
class DigitPoint:
    """A sampled point of supp(mu), known to ``precision`` digits per place and coordinate.

    Digit j of (place i, coordinate c) depends only on (seed, index, i, c, j),
    so deepening a point never changes the digits already drawn.
    """

    measure: ProductMeasure
    seed: int
    index: int
    digits: tuple  # [place][coord] -> tuple of digits

    @property
    def precision(self) -> int:
        return len(self.digits[0][0])

    @property
    def d(self) -> int:
        return self.measure.d

    def deepen(self, N: int) -> "DigitPoint":
        if N <= self.precision:
            return self
        return _make_point(self.measure, self.seed, self.index, N)

    def prefix(self, place: Place, coord: int) -> tuple:
        return self.digits[self.measure.places.places.index(place)][coord]

    def at(self, place: Place) -> RationalPoint:
        """Exact representative in the support: known digits, then the least digit forever."""
        comp = self.measure.component(place)
        return RationalPoint(tuple(comp.tail_value(c, self.prefix(place, c)) for c in range(self.d)))

    def truncation(self, place: Place) -> RationalPoint:
        comp = self.measure.component(place)
        b = comp.base
        coords = []
        for c in range(self.d):
            pre = self.prefix(place, c)
            if place.is_infinite:
                coords.append(sum((Fraction(a, b ** (i + 1)) for i, a in enumerate(pre)), Fraction(0)))
            else:
                coords.append(Fraction(sum(a * b**i for i, a in enumerate(pre))))
        return RationalPoint(tuple(coords))

    def real_enclosure(self, coord: int) -> tuple:
        """Closed interval containing the real coordinate."""
        comp = self.measure.component(INFINITY)
        pre = self.prefix(INFINITY, coord)
        b, N = comp.base, len(pre)
        lo = sum((Fraction(a, b ** (i + 1)) for i, a in enumerate(pre)), Fraction(0))
        scale = Fraction(1, b**N * (b - 1))
        return lo + comp.digits[coord][0] * scale, lo + comp.digits[coord][-1] * scale

    def __str__(self) -> str:
        return f"DigitPoint(seed={self.seed}, index={self.index}, N={self.precision})"


def _make_point(m: ProductMeasure, seed: int, index: int, N: int) -> DigitPoint:
    blocks = -(-N // _BLOCK)
    per_place = []
    for i, comp in enumerate(m.components):
        coords = []
        for c in range(comp.d):
            ds = ()
            for b in range(blocks):
                ds += _digit_block(comp, seed, index, i, c, b)
            coords.append(ds[:N])
        per_place.append(tuple(coords))
    return DigitPoint(m, seed, index, tuple(per_place))


def sample_point(m: ProductMeasure, seed: int, index: int, precision: int) -> DigitPoint:
    if precision < 1:
        raise DomainError("precision must be >= 1")
    return _make_point(m, seed, index, precision)


def sample(m: ProductMeasure, seed: int, count: int, precision: int, start: int = 0) -> list:
    """Points ``start .. start+count-1`` of the stream fixed by ``seed``."""
    if precision < 1:
        raise DomainError("precision must be >= 1")
    return [_make_point(m, seed, i, precision) for i in range(start, start + count)]


def _radius_exponent(m: DigitMeasure, radius) -> int:
    radius = as_rational(radius)
    k = snap_exponent(radius, m.base)
    if ppow(m.base, -k) != radius:
        raise RadiusError(f"radius {radius} is not a power of {m.base}")
    return k


def _center_coords(center, place: Place) -> tuple:
    if hasattr(center, "at"):
        return center.at(place).coords
    return as_point(center).coords


def cylinder_measure(m: DigitMeasure, ball, radius=None) -> Fraction:
    """Exact mass of the depth-k cylinder (a ball at finite places) about the center.

    ``ball`` is an :class:`SBall` or a center point, with ``radius = base**-k``.
    At the real place the cylinder is the base-adic cell of side base**-k
    holding the center.
    """
    if isinstance(ball, SBall):
        center, radius = ball.center, ball.radius_at(m.place)
    else:
        center = ball
    k = _radius_exponent(m, radius)
    coords = _center_coords(center, m.place)
    out = Fraction(1)
    for c, x in enumerate(coords):
        if k <= 0:
            if m.place.is_infinite:
                inside = 0 <= x < 1
            else:
                inside = m.place.abs(x) <= ppow(m.base, -k)
            if not inside:
                return Fraction(0)
            continue
        pre = m.coordinate_prefix(x, k)
        if pre is None:
            return Fraction(0)
        out *= m.prefix_weight(c, pre)
    return out


def _coord_ball(m: DigitMeasure, c: int, x: Fraction, radius: Fraction, closed: bool) -> Fraction:
    """Mass of one coordinate's ball; p-adic balls closed or open, real balls open."""
    if m.place.is_infinite:
        return m.interval_measure(c, x - radius, x + radius)
    k = snap_exponent(radius, m.base)
    if not closed and ppow(m.base, -k) == radius:
        k += 1
    if k <= 0:
        return Fraction(1) if m.place.abs(x) <= ppow(m.base, -k) else Fraction(0)
    pre = m.coordinate_prefix(x, k)
    return Fraction(0) if pre is None else m.prefix_weight(c, pre)


def ball_measure(m: DigitMeasure, center, radius) -> Fraction:
    """mu(B(center, radius)) with sup-norm balls, closed at finite places and open at the real one."""
    radius = as_rational(radius)
    coords = _center_coords(center, m.place)
    out = Fraction(1)
    for c, x in enumerate(coords):
        out *= _coord_ball(m, c, x, radius, closed=True)
    return out


def _slab_ratio(
    m: DigitMeasure, center: RationalPoint, radius: Fraction, coord: int, beta: Fraction, eps: Fraction, closed: bool = False
) -> Fraction:
    """mu(B ∩ {|x_coord - beta| < eps}) / mu(B), or <= eps when closed; other coordinates cancel."""
    x = center.coords[coord]
    whole = _coord_ball(m, coord, x, radius, closed=True)
    if whole == 0:
        raise EmptyBallError(f"ball about {center} has zero mass at {m.place}")
    if m.place.is_infinite:
        lo, hi = max(x - radius, beta - eps), min(x + radius, beta + eps)
        return m.interval_measure(coord, lo, hi) / whole
    R = ppow(m.base, -snap_exponent(radius, m.base))
    k = snap_exponent(eps, m.base)
    if not closed and ppow(m.base, -k) == eps:
        k += 1
    rho = ppow(m.base, -k)
    if m.place.abs(x - beta) > max(R, rho):
        return Fraction(0)
    if rho >= R:
        return Fraction(1)
    return _coord_ball(m, coord, beta, rho, closed=True) / whole


@dataclass(frozen=True)
class DecayResult:
    ratio: object  # Fraction when exact, float estimate otherwise
    exact: bool
    stderr: float
    per_place: tuple  # ((place, ratio), ...)
    samples: int = 0

    def bound_exponent(self, eps, r, l: int) -> tuple:
        """(eps/r)**(alpha*l) companions are left to the caller; this reports log(ratio)/log(eps/r)."""
        x = math.log(float(as_rational(eps) / as_rational(r)))
        joint = math.log(float(self.ratio)) / x if self.ratio else math.inf
        per = tuple((str(v), math.log(float(q)) / x if q else math.inf) for v, q in self.per_place)
        return joint, per


def decay_ratio(
    m: ProductMeasure,
    ball: SBall,
    hyperplane,
    eps,
    monte_carlo: bool = False,
    samples: int = 4000,
    seed: int = 0,
    precision: int = 40,
    closed: bool = False,
) -> DecayResult:
    """mu(B ∩ L^eps) / mu(B) for a rational hyperplane L, the same at every place.

    L^eps is the open neighbourhood {dist < eps}; ``closed`` switches to
    dist <= eps.  Exact when d = 1 or L is axis-aligned; Monte Carlo with a
    binomial standard error otherwise (or when ``monte_carlo`` is set).
    """
    eps = as_rational(eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    normal, offset = hyperplane.normal, hyperplane.offset
    nonzero = [i for i, c in enumerate(normal) if c != 0]
    if not monte_carlo and len(nonzero) == 1:
        j = nonzero[0]
        beta = Fraction(offset, normal[j])
        per, joint = [], Fraction(1)
        for comp in m.components:
            q = _slab_ratio(comp, ball.center_at(comp.place), ball.radius_at(comp.place), j, beta, eps, closed)
            per.append((comp.place, q))
            joint *= q
        return DecayResult(joint, True, 0.0, tuple(per))
    for comp in m.components:
        if ball_measure(comp, ball.center_at(comp.place), ball.radius_at(comp.place)) == 0:
            raise EmptyBallError(f"ball has zero mass at {comp.place}")
    hits = 0
    place_hits = [0] * len(m.components)
    for i in range(samples):
        x = _sample_in_ball(m, ball, seed, i, precision)
        inside = True
        for pi, comp in enumerate(m.components):
            dist = _place_distance(x[pi], normal, offset, comp.place)
            if dist < eps or (closed and dist == eps):
                place_hits[pi] += 1
            else:
                inside = False
        hits += inside
    p = hits / samples
    per = tuple((comp.place, place_hits[i] / samples) for i, comp in enumerate(m.components))
    return DecayResult(p, False, math.sqrt(max(p * (1 - p), 1e-300) / samples), per, samples)


def _place_distance(x: RationalPoint, normal, offset, place: Place) -> Fraction:
    val = sum((c * xi for c, xi in zip(normal, x.coords)), Fraction(0)) - offset
    if place.is_infinite:
        return abs(val) / sum(abs(c) for c in normal)
    return place.abs(val) / max(place.abs(c) for c in normal)


def _sample_in_ball(m: ProductMeasure, ball: SBall, seed: int, index: int, precision: int) -> list:
    """One point of mu conditioned on the ball, per place, as exact rationals."""
    rng = np.random.default_rng([seed, index, 7919])
    out = []
    for comp in m.components:
        center = ball.center_at(comp.place)
        radius = ball.radius_at(comp.place)
        coords = []
        for c in range(comp.d):
            probs = np.array([float(w) for w in comp.weights[c]])
            probs /= probs.sum()
            if comp.place.is_infinite:
                coords.append(_real_coordinate_in(comp, c, center.coords[c], radius, rng, probs, precision))
            else:
                k = max(snap_exponent(radius, comp.base), 0)
                pre = comp.coordinate_prefix(center.coords[c], k) if k else ()
                rest = [comp.digits[c][i] for i in rng.choice(len(probs), size=precision, p=probs)]
                coords.append(comp.tail_value(c, tuple(pre) + tuple(rest)))
        out.append(RationalPoint(tuple(coords)))
    return out


def _real_coordinate_in(comp, c, x, radius, rng, probs, precision):
    lo, hi = x - radius, x + radius
    b = comp.base
    k = 0
    while Fraction(1, b ** (k + 1)) >= 2 * radius:
        k += 1
    # the open interval meets at most two level-k cells
    first = max(math.floor(lo * b**k), 0)
    cells = [j for j in (first, first + 1) if j < b**k and Fraction(j, b**k) < hi]
    masses = [comp.interval_measure(c, Fraction(j, b**k), Fraction(j + 1, b**k)) for j in cells]
    total = sum(masses)
    cell_probs = np.array([float(w / total) for w in masses])
    while True:
        j = cells[rng.choice(len(cells), p=cell_probs)]
        pre = tuple((j // b ** (k - 1 - i)) % b for i in range(k))
        rest = tuple(comp.digits[c][i] for i in rng.choice(len(probs), size=precision, p=probs))
        val = comp.tail_value(c, pre + rest)
        if lo < val < hi:
            return val


@dataclass(frozen=True)
class AlphaFit:
    alpha: float
    stderr: float
    joint_slope: float
    per_place: tuple  # ((place, slope), ...)
    analytic: float
    points: tuple  # ((r, eps, joint sup ratio, log(eps/r), log(ratio)), ...)

    def brackets(self, target: float, tol: float) -> bool:
        return abs(self.alpha - target) <= tol


def _fit(xs, ys):
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    if len(xs) < 3 or np.ptp(xs) == 0:
        raise FitError("need at least three grid cells with distinct eps/r")
    xm = xs.mean()
    sxx = ((xs - xm) ** 2).sum()
    slope = float(((xs - xm) * (ys - ys.mean())).sum() / sxx)
    resid = ys - ys.mean() - slope * (xs - xm)
    se = float(math.sqrt((resid**2).sum() / (len(xs) - 2) / sxx))
    return slope, se


def default_grid(m: ProductMeasure, depth: Optional[int] = None) -> list:
    """r = b**-3, b**-4 (below the default r_0 = b**-2) and eps = r * b**-j, j = 1..depth.

    The default depth spans eps/r down to about 3**-12 whatever the base, long
    enough that edge effects of balls near the boundary of [0,1) only move the
    intercept of the fit.
    """
    b = min(c.base for c in m.components)
    if depth is None:
        depth = math.ceil(12 * math.log(3) / math.log(b))
    return [(Fraction(1, b**k), Fraction(1, b ** (k + j))) for k in (3, 4) for j in range(1, depth + 1)]


def estimate_alpha(m: ProductMeasure, grid=None, centers: int = 4, seed: int = 0) -> AlphaFit:
    """Least-squares slope of log(sup ratio) against log(eps/r).

    The sup runs over sampled centers in the support and the axis hyperplanes
    through them, per place; the joint ratio is the product over places, so
    its slope estimates alpha*l.
    """
    grid = default_grid(m) if grid is None else grid
    pts = sample(m, seed, centers, 24)
    xs, ys, rows = [], [], []
    per_xy = {comp.place: [] for comp in m.components}
    for r, eps in grid:
        r, eps = as_rational(r), as_rational(eps)
        if not 0 < eps < r:
            continue
        joint = 1.0
        for comp in m.components:
            best = Fraction(0)
            for x in pts:
                center = x.at(comp.place)
                for j in range(m.d):
                    q = _slab_ratio(comp, center, r, j, center.coords[j], eps)
                    best = max(best, q)
            per_xy[comp.place].append((math.log(eps / r), math.log(best)))
            joint *= float(best)
        xs.append(math.log(eps / r))
        ys.append(math.log(joint))
        rows.append((r, eps, joint, xs[-1], ys[-1]))
    slope, se = _fit(xs, ys)
    per = tuple((str(v), _fit(*zip(*xy))[0]) for v, xy in per_xy.items())
    l = len(m.components)
    return AlphaFit(slope / l, se / l, slope, per, m.alpha, tuple(rows))


def doubling_ratio(m_real: DigitMeasure, x, r, r0=None) -> Fraction:
    """mu(B(x, 2r)) / mu(B(x, r)) at the real place, exactly."""
    if not m_real.place.is_infinite:
        raise DomainError("doubling is a property of the real component")
    r = as_rational(r)
    r0 = Fraction(1, m_real.base**2) if r0 is None else as_rational(r0)
    if not 0 < r < r0:
        raise DomainError(f"need 0 < r < r0 = {r0}")
    small = ball_measure(m_real, x, r)
    if small == 0:
        raise EmptyBallError(f"B({x}, {r}) has zero mass")
    return ball_measure(m_real, x, 2 * r) / small
