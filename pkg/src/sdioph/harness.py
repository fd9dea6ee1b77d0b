"""Experiment orchestration: the convergence sum, the approximability survey and campaigns.

Every campaign returns a :class:`Report` whose rows use the frozen column
lists in :data:`COLUMNS`; rationals are written as "a/b" and floats with 12
significant digits, so reports with the same config and seed are
byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

import mpmath

from .errors import ConfigError, DomainError, EmptyWindowError, FitError, PrecisionExhaustedError, SdiophError, SearchTooLargeError
from .exactnum import format_rational, pow2
from .measures import ProductMeasure, estimate_alpha, haar, parse_measure, sample
from .places import PlaceSet, RationalPoint
from .psi import FLOAT_DPS, PsiFunction
from .simplex1d import min_separation_bruteforce

log = logging.getLogger("sdioph")

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2

COLUMNS = {
    "simplex1d": ["k", "places", "mode", "members", "min_separation", "bound", "pair_a", "pair_b", "status"],
    "simplex": ["n", "d", "places", "radius", "balls", "points", "nonempty_balls", "max_points", "groups_checked", "failures", "status"],
    "dirichlet": ["index", "x", "places", "T", "min_height", "q", "q0", "height", "lhs", "rhs", "status"],
    "bcsum": ["n", "term", "partial_sum", "classification", "boundary", "exact"],
    "decay": ["place", "r", "eps", "sup_ratio", "log_eps_over_r", "log_sup_ratio", "alpha_fit", "alpha_analytic"],
    "survey": ["n", "samples", "hits", "empirical_mass", "envelope", "ratio", "witness_count", "below_n0", "truncated"],
}
KINDS = tuple(COLUMNS)


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, float) or isinstance(value, mpmath.mpf):
        return format(float(value), ".12g")
    return str(value)


# -- the convergence sum ----------------------------------------------------------------


@dataclass(frozen=True)
class BCResult:
    d: int
    alpha: object  # Fraction, or float when derived from a measure
    psi: str
    terms: tuple  # exact Fraction or mpf per n = 1..N
    partial_sums: tuple
    classification: str  # "convergent" | "divergent"
    boundary: bool
    exact: bool

    def strictly_decreasing_from(self, n0: int) -> bool:
        ts = self.terms[n0 - 1:]
        return all(b < a for a, b in zip(ts, ts[1:]))

    def empirical_classification(self, n0: int = 1) -> str:
        """Read the class off the computed terms: convergent when they decay from n0 on.

        Sound for geometric terms (power-law psi), where the terms either decay
        geometrically, stay constant or grow.  Log factors at the boundary need
        the closed form.
        """
        if len(self.terms) - n0 < 2:
            raise DomainError("need at least three terms beyond n0")
        return "convergent" if self.strictly_decreasing_from(n0) else "divergent"


def _term(psi: PsiFunction, alpha, d: int, n: int):
    """(2**(n(d+1)/d) psi(2**n))**alpha, exactly when it is a rational power of 2."""
    if psi.family != "table" and psi.c == 0:
        return Fraction(0), True
    if psi.family == "pow" and isinstance(alpha, Fraction) and psi.c > 0:
        k = _log2_exact(psi.c)
        if k is not None:
            e = alpha * (k + n * (Fraction(d + 1, d) - psi.tau))
            if e.denominator == 1:
                return pow2(int(e)), True
            with mpmath.workdps(FLOAT_DPS):
                return mpmath.power(2, mpmath.mpf(e.numerator) / e.denominator), False
    if psi.family == "table" and isinstance(alpha, Fraction) and alpha.denominator == 1 and (d + 1) % d == 0:
        return (pow2(n * (d + 1) // d) * psi.exact_value(2**n)) ** int(alpha), True
    with mpmath.workdps(FLOAT_DPS):
        a = _mpq(alpha) if isinstance(alpha, Fraction) else mpmath.mpf(alpha)
        val = psi.exact_value(2**n)
        if val is not None:
            base = _mpq(val)
        else:
            base = psi._mp(2**n) if psi.family == "powlog" else _mpq(psi.c) * mpmath.power(2, -n * _mpq(psi.tau))
        return mpmath.power(mpmath.power(2, mpmath.mpf(n * (d + 1)) / d) * base, a), False


def _mpq(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


def _log2_exact(c: Fraction) -> Optional[int]:
    if c.numerator == 1 and c.denominator & (c.denominator - 1) == 0:
        return -(c.denominator.bit_length() - 1)
    if c.denominator == 1 and c.numerator & (c.numerator - 1) == 0:
        return c.numerator.bit_length() - 1
    return None


def classify(psi: PsiFunction, alpha, d: int) -> tuple:
    """Closed-form (classification, boundary) for the sum over n of (2**(n(d+1)/d) psi(2**n))**alpha."""
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    crit = Fraction(d + 1, d)
    if psi.family == "table":
        last = psi.table[-1][1]
        # beyond the table psi is constant, so the terms grow unless it is 0
        return ("convergent" if last == 0 else "divergent"), False
    if psi.c == 0:
        return "convergent", False
    if psi.tau > crit:
        return "convergent", False
    if psi.tau < crit:
        return "divergent", False
    if psi.family == "powlog":
        return ("convergent" if psi.kappa * Fraction(alpha) > 1 else "divergent"), True
    return "divergent", True


def bc_sum(psi: PsiFunction, alpha, d: int, N: int) -> BCResult:
    if N < 1:
        raise DomainError("N must be >= 1")
    if d < 1:
        raise DomainError("d must be >= 1")
    psi.check_monotone(N)
    terms, exact = [], True
    for n in range(1, N + 1):
        t, ok = _term(psi, alpha, d, n)
        terms.append(t)
        exact &= ok
    if not exact:
        with mpmath.workdps(FLOAT_DPS):
            terms = [t if isinstance(t, mpmath.mpf) else _mpq(t) for t in terms]
    sums, acc = [], 0
    for t in terms:
        acc = acc + t
        sums.append(acc)
    cls, boundary = classify(psi, alpha, d)
    return BCResult(d, alpha, str(psi), tuple(terms), tuple(sums), cls, boundary, exact)


# -- configuration ----------------------------------------------------------------------


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_alpha(text: str):
    t = text.strip()
    if t == "auto":
        return "auto"
    return Fraction(t)  # "a/b" or a decimal, both exact


# key -> (attribute, parser)
CONFIG_KEYS = {
    "primes": ("primes", lambda s: s.strip()),
    "infty": ("infty", _parse_bool),
    "d": ("d", int),
    "n_min": ("n_min", int),
    "n_max": ("n_max", int),
    "n0": ("n0", int),
    "psi": ("psi", PsiFunction.parse),
    "alpha": ("alpha", _parse_alpha),
    "measure": ("measure", parse_measure),
    "samples": ("sample_count", int),
    "sample_count": ("sample_count", int),
    "seed": ("seed", int),
    "precision": ("precision", int),
    "format": ("format", lambda s: s.strip()),
    "out": ("out", lambda s: s.strip()),
    "T": ("T", int),
    "min_height": ("min_height", int),
    "points": ("points", int),
    "threads": ("threads", int),
    "dirichlet_exponent": ("dirichlet_exponent", lambda s: s.strip()),
}


@dataclass(frozen=True)
class ExperimentConfig:
    primes: str = ""
    infty: bool = False
    d: int = 1
    n_min: int = 1
    n_max: int = 4
    n0: int = 1
    psi: PsiFunction = field(default_factory=lambda: PsiFunction.power(1, 3))
    alpha: object = "auto"
    measure: Optional[ProductMeasure] = None
    sample_count: int = 1000
    seed: int = 0
    precision: int = 24
    format: str = "csv"
    out: str = "-"
    T: int = 1024
    min_height: int = 1
    points: int = 100
    threads: int = 1
    dirichlet_exponent: str = "inverse-d"

    @property
    def places(self) -> PlaceSet:
        if self.measure is not None and not self.primes and not self.infty:
            return self.measure.places
        items = [p for p in self.primes.split(",") if p.strip()]
        if self.infty and not any(p.strip().lower() in ("inf", "infinity") for p in items):
            items.append("inf")
        if not items:
            raise ConfigError("primes", "no places given (use --primes and/or --infty)")
        try:
            return PlaceSet.of(*items)
        except SdiophError as exc:
            raise ConfigError("primes", str(exc)) from None

    @property
    def product_measure(self) -> ProductMeasure:
        if self.measure is None:
            return haar(self.places, self.d)
        return self.measure

    @property
    def effective_threads(self) -> int:
        cap = os.environ.get("SDIOPH_THREADS")
        threads = self.threads
        if cap:
            try:
                threads = min(threads, max(int(cap), 1))
            except ValueError:
                raise ConfigError("SDIOPH_THREADS", f"not an integer: {cap!r}") from None
        return max(threads, 1)

    def resolved_alpha(self):
        if self.alpha != "auto":
            return self.alpha
        if self.measure is None:
            return Fraction(1)  # the default Haar/Lebesgue measure
        m = self.measure
        if all(max(ws) == Fraction(1, c.base) for c in m.components for ws in c.weights):
            return Fraction(1)  # every component is Haar or Lebesgue
        return m.alpha

    @property
    def has_places(self) -> bool:
        return bool(self.primes.strip() or self.infty or self.measure is not None)

    def validate(self, needs_places: bool = True) -> "ExperimentConfig":
        if self.d < 1:
            raise ConfigError("d", "d must be >= 1")
        if self.n_max < 1:
            raise ConfigError("n_max", "n_max must be >= 1")
        if self.n_min < 0 or self.n_min > self.n_max:
            raise ConfigError("n_min", "need 0 <= n_min <= n_max")
        if self.sample_count < 0:
            raise ConfigError("samples", "sample count must be >= 0")
        if self.format not in ("csv", "json"):
            raise ConfigError("format", "format must be csv or json")
        if self.T < 1:
            raise ConfigError("T", "T must be >= 1")
        if self.dirichlet_exponent not in ("inverse-d", "classical"):
            raise ConfigError("dirichlet_exponent", "use inverse-d or classical")
        if self.alpha != "auto" and self.alpha <= 0:
            raise ConfigError("alpha", "alpha must be positive")
        if not needs_places and not self.has_places:
            return self
        S = self.places
        if self.measure is not None:
            if self.measure.places != S:
                raise ConfigError("measure", f"measure places {self.measure.places} differ from {S}")
            if self.measure.d != self.d:
                raise ConfigError("measure", f"measure dimension {self.measure.d} differs from d = {self.d}")
        return self

    def with_values(self, values: dict) -> "ExperimentConfig":
        """Apply string values keyed by config-file key names."""
        changes = {}
        for key, raw in values.items():
            if key not in CONFIG_KEYS:
                raise ConfigError(key, f"unknown config key {key!r}")
            attr, parser = CONFIG_KEYS[key]
            try:
                changes[attr] = parser(raw)
            except ConfigError as exc:
                raise ConfigError(key, str(exc)) from None
            except (ValueError, SdiophError) as exc:
                raise ConfigError(key, f"bad value {raw!r}: {exc}") from None
        return replace(self, **changes)

    def describe(self) -> dict:
        if not self.has_places:
            return {"d": self.d, "n_max": self.n_max, "psi": str(self.psi), "alpha": fmt(self.resolved_alpha())}
        return {
            "places": str(self.places),
            "d": self.d,
            "n_min": self.n_min,
            "n_max": self.n_max,
            "n0": self.n0,
            "psi": str(self.psi),
            "alpha": fmt(self.resolved_alpha()),
            "measure": self.product_measure.spec(),
            "samples": self.sample_count,
            "seed": self.seed,
        }


def read_config_file(path: str) -> dict:
    """``key = value`` lines; blank lines and ``#`` comments are skipped."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
            key, value = (t.strip() for t in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise ConfigError(key, f"unknown config key {key!r} on line {lineno}")
            values[key] = value
    return values


# -- the survey -------------------------------------------------------------------------


@dataclass(frozen=True)
class SurveyRow:
    n: int
    samples: int
    hits: int
    empirical_mass: Optional[float]
    envelope: object  # Fraction or mpf
    witness_count: int
    below_n0: bool
    truncated: bool
    runtime: float = field(default=0.0, compare=False)

    @property
    def ratio(self) -> Optional[float]:
        if self.empirical_mass is None or self.envelope == 0:
            return None
        return self.empirical_mass / float(self.envelope)

    def as_row(self) -> dict:
        return {
            "n": self.n,
            "samples": self.samples,
            "hits": self.hits,
            "empirical_mass": self.empirical_mass,
            "envelope": self.envelope,
            "ratio": self.ratio,
            "witness_count": self.witness_count,
            "below_n0": self.below_n0,
            "truncated": self.truncated,
        }


def survey_warnings(config: ExperimentConfig) -> list:
    out = []
    alpha = config.resolved_alpha()
    cls, _ = classify(config.psi, alpha, config.d)
    if cls != "convergent":
        out.append(f"the sum for {config.psi} with alpha={fmt(alpha)} diverges; the envelope bound does not apply")
    # psi(2**n) < 2**(-n(d+1)/d) should hold for large n
    n = config.n_max
    bound = pow2(-(n * (config.d + 1)) // config.d)
    if config.psi.cmp(bound, 2**n) < 0:
        out.append(f"psi(2**{n}) is not below 2**(-n(d+1)/d); the level-n balls are not small yet")
    return out


def approx_survey(config: ExperimentConfig) -> list:
    """Empirical mu(A_n) from sampled points, next to the envelope (2**(n(d+1)/d) psi(2**n))**alpha.

    The same sampled points are used at every level.
    """
    from .enumeration.search import PsiHitTable, psi_witnesses

    config.validate()
    for w in survey_warnings(config):
        log.warning(w)
    S, d = config.places, config.d
    m = config.product_measure
    alpha = config.resolved_alpha()
    pts = sample(m, config.seed, config.sample_count, config.precision) if config.sample_count else []
    rows = []
    for n in range(max(config.n_min, 1), config.n_max + 1):
        start = time.perf_counter()
        envelope, _ = _term(config.psi, alpha, d, n)
        hits = count = 0
        truncated = False
        if pts:
            try:
                table = None
                if not S.contains_infinity:
                    try:
                        table = PsiHitTable(config.psi, n, S, d)
                    except DomainError:
                        table = None

                def one(x):
                    return table.count(x) if table is not None else len(psi_witnesses(x, config.psi, n, S))

                # executor.map keeps input order, so the row does not depend on the thread count
                with ThreadPoolExecutor(config.effective_threads) as pool:
                    for k in pool.map(one, pts):
                        count += k
                        hits += k > 0
            except (SearchTooLargeError, PrecisionExhaustedError) as exc:
                log.warning("level %d truncated: %s", n, exc)
                truncated = True
        mass = hits / len(pts) if pts and not truncated else None
        rows.append(
            SurveyRow(n, len(pts), hits, mass, envelope, count, n < config.n0, truncated, time.perf_counter() - start)
        )
    return rows


# -- campaigns --------------------------------------------------------------------------


@dataclass
class Report:
    kind: str
    config: dict
    rows: list
    status: str  # "PASS" | "FAIL"
    exit_code: int
    summary: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = COLUMNS[self.kind]
        w.writerow(cols)
        for row in self.rows:
            w.writerow([fmt(row.get(c)) for c in cols])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "kind": self.kind,
            "status": self.status,
            "config": self.config,
            "summary": {k: fmt(v) for k, v in self.summary.items()},
            "warnings": self.warnings,
            "columns": COLUMNS[self.kind],
            "rows": [{c: fmt(row.get(c)) for c in COLUMNS[self.kind]} for row in self.rows],
        }
        return json.dumps(doc, indent=2) + "\n"

    def render(self, fmt_name: str) -> str:
        return self.to_json() if fmt_name == "json" else self.to_csv()


def _campaign_simplex1d(cfg: ExperimentConfig):
    S = cfg.places
    rows, bad = [], False
    for k in range(cfg.n_min, cfg.n_max + 1):
        try:
            res = min_separation_bruteforce(k, S)
        except EmptyWindowError:
            continue
        ok = res.exceeds
        bad |= not ok
        rows.append(
            {
                "k": k,
                "places": str(S),
                "mode": S.mode,
                "members": res.members,
                "min_separation": res.value,
                "bound": res.bound,
                "pair_a": res.pair[0],
                "pair_b": res.pair[1],
                "status": "PASS" if ok else "FAIL",
            }
        )
    return rows, bad, {}


def _campaign_simplex(cfg: ExperimentConfig):
    from .enumeration.search import simplex_campaign

    m = cfg.product_measure
    rows, bad = [], False
    for n in range(cfg.n_min, cfg.n_max + 1):
        rep = simplex_campaign(m, n)
        bad |= rep.status != "PASS"
        rows.append(
            {
                "n": n,
                "d": rep.d,
                "places": rep.places,
                "radius": rep.radius,
                "balls": rep.balls,
                "points": rep.points,
                "nonempty_balls": rep.nonempty,
                "max_points": rep.max_points,
                "groups_checked": rep.groups_checked,
                "failures": len(rep.failures),
                "status": rep.status,
            }
        )
    return rows, bad, {"measure": m.spec()}


def random_unit_point(rng, S: PlaceSet, d: int, bound: int = 1000) -> RationalPoint:
    """A random rational point with S-norm at most 1."""
    from .places import snorm

    while True:
        x = RationalPoint(tuple(Fraction(rng.randint(-bound, bound), rng.randint(1, bound)) for _ in range(d)))
        if snorm(x, S) <= 1:
            return x


def _campaign_dirichlet(cfg: ExperimentConfig):
    import random

    from .enumeration.search import dirichlet_witness

    S = cfg.places
    rng = random.Random(cfg.seed)
    rows, bad = [], False
    for i in range(cfg.points):
        x = random_unit_point(rng, S, cfg.d)
        w = dirichlet_witness(x, cfg.T, S, cfg.min_height, cfg.dirichlet_exponent)
        bad |= w is None
        rows.append(
            {
                "index": i,
                "x": str(x),
                "places": str(S),
                "T": cfg.T,
                "min_height": cfg.min_height,
                "q": "" if w is None else "(" + ",".join(map(str, w.q)) + ")",
                "q0": None if w is None else w.q0,
                "height": None if w is None else max(w.q0, *(abs(a) for a in w.q)),
                "lhs": None if w is None else w.lhs,
                "rhs": None if w is None else w.rhs,
                "status": "found" if w is not None else "none",
            }
        )
    return rows, bad, {}


def _campaign_bcsum(cfg: ExperimentConfig):
    res = bc_sum(cfg.psi, cfg.resolved_alpha(), cfg.d, cfg.n_max)
    rows = [
        {
            "n": n,
            "term": t,
            "partial_sum": s,
            "classification": res.classification,
            "boundary": res.boundary,
            "exact": res.exact,
        }
        for n, (t, s) in enumerate(zip(res.terms, res.partial_sums), 1)
    ]
    return rows, False, {"classification": res.classification, "boundary": res.boundary}


def _campaign_decay(cfg: ExperimentConfig):
    m = cfg.product_measure
    try:
        fit = estimate_alpha(m, seed=cfg.seed)
    except FitError as exc:
        raise ConfigError("measure", str(exc)) from None
    rows = []
    for r, eps, ratio, x, y in fit.points:
        rows.append(
            {
                "place": "joint",
                "r": r,
                "eps": eps,
                "sup_ratio": ratio,
                "log_eps_over_r": x,
                "log_sup_ratio": y,
                "alpha_fit": fit.alpha,
                "alpha_analytic": fit.analytic,
            }
        )
    for place, slope in fit.per_place:
        rows.append({"place": place, "alpha_fit": slope, "alpha_analytic": fit.analytic})
    summary = {"alpha_fit": fit.alpha, "alpha_stderr": fit.stderr, "alpha_analytic": fit.analytic, "joint_slope": fit.joint_slope}
    return rows, False, summary


def _campaign_survey(cfg: ExperimentConfig):
    rows = approx_survey(cfg)
    return [r.as_row() for r in rows], False, {}


_DISPATCH = {
    "simplex1d": _campaign_simplex1d,
    "simplex": _campaign_simplex,
    "dirichlet": _campaign_dirichlet,
    "bcsum": _campaign_bcsum,
    "decay": _campaign_decay,
    "survey": _campaign_survey,
}


def run_campaign(kind: str, config: ExperimentConfig) -> Report:
    """Run one campaign; raises ConfigError on a usage problem."""
    if kind not in _DISPATCH:
        raise ConfigError("kind", f"unknown campaign kind {kind!r}; choose from {', '.join(KINDS)}")
    # the convergence sum does not depend on the places
    config.validate(needs_places=kind != "bcsum")
    warnings = survey_warnings(config) if kind == "survey" else []
    rows, bad, summary = _DISPATCH[kind](config)
    status = "FAIL" if bad else "PASS"
    code = EXIT_VIOLATION if bad else EXIT_OK
    return Report(kind, config.describe(), rows, status, code, summary, warnings)
