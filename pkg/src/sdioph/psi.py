"""Approximating functions psi: N -> R_{>=0}, non-increasing.

Three families, written ``family:args`` on the command line:

    pow:c,tau            psi(q) = c * q**-tau               (exact comparisons)
    powlog:c,tau,kappa   psi(q) = c * q**-tau * log(q+1)**-kappa   (50-digit floats)
    table:h1=v1,h2=v2    step function, psi(q) = v_i for the largest h_i <= q

Every family answers ``cmp(v, q)``, the sign of v - psi(q), which is what the
witness searches and the sum classification need.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .errors import ConfigError, DomainError
from .exactnum import as_rational, format_rational, parse_rational

FLOAT_DPS = 50


def _sign(x) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class PsiFunction:
    family: str  # "pow" | "powlog" | "table"
    c: Fraction = Fraction(1)
    tau: Fraction = Fraction(0)
    kappa: Fraction = Fraction(0)
    table: tuple = field(default=())  # ((height, value), ...) ascending heights

    def __post_init__(self):
        if self.family not in ("pow", "powlog", "table"):
            raise DomainError(f"unknown psi family {self.family!r}")
        if self.c < 0:
            raise DomainError("psi must be non-negative")
        if self.family != "table" and (self.tau < 0 or self.kappa < 0):
            raise DomainError("psi must be non-increasing: tau and kappa must be >= 0")
        if self.family == "table":
            if not self.table:
                raise DomainError("a psi table needs at least one entry")
            hs = [h for h, _ in self.table]
            vs = [v for _, v in self.table]
            if hs != sorted(set(hs)) or hs[0] < 1:
                raise DomainError("table heights must be distinct positive integers")
            if any(v < 0 for v in vs) or any(b > a for a, b in zip(vs, vs[1:])):
                raise DomainError("psi table is not non-increasing")

    @classmethod
    def power(cls, c=1, tau=0) -> "PsiFunction":
        return cls("pow", as_rational(c), as_rational(tau))

    @classmethod
    def power_log(cls, c, tau, kappa) -> "PsiFunction":
        return cls("powlog", as_rational(c), as_rational(tau), as_rational(kappa))

    @classmethod
    def from_table(cls, pairs) -> "PsiFunction":
        items = sorted((int(h), as_rational(v)) for h, v in dict(pairs).items())
        return cls("table", table=tuple(items))

    @classmethod
    def parse(cls, text: str) -> "PsiFunction":
        family, _, args = text.strip().partition(":")
        try:
            if family == "pow":
                c, tau = args.split(",")
                return cls.power(parse_rational(c), parse_rational(tau))
            if family == "powlog":
                c, tau, kappa = args.split(",")
                return cls.power_log(parse_rational(c), parse_rational(tau), parse_rational(kappa))
            if family == "table":
                pairs = [item.split("=") for item in args.split(",")]
                return cls.from_table({int(h): parse_rational(v) for h, v in pairs})
        except (ValueError, DomainError) as exc:
            raise ConfigError("psi", f"cannot parse {text!r}: {exc}") from None
        raise ConfigError("psi", f"unknown psi family in {text!r}")

    @property
    def exact(self) -> bool:
        return self.family != "powlog"

    def _table_value(self, q: int) -> Fraction:
        hs = [h for h, _ in self.table]
        i = bisect.bisect_right(hs, q) - 1
        return self.table[max(i, 0)][1]

    def cmp(self, v, q: int) -> int:
        """Sign of v - psi(q); exact except for the power-log family."""
        if q < 1:
            raise DomainError("psi is defined on q >= 1")
        v = as_rational(v) if not isinstance(v, float) else Fraction(v)
        if self.family == "table":
            return _sign(v - self._table_value(q))
        if v <= 0:
            return -1 if v < 0 or self.c > 0 else 0
        if self.c == 0:
            return 1
        if self.family == "pow":
            # v <= c q**(-a/b)  <=>  (v/c)**b * q**a <= 1
            a, b = self.tau.numerator, self.tau.denominator
            return _sign((v / self.c) ** b * q**a - 1)
        with mpmath.workdps(FLOAT_DPS):
            return _sign(mpmath.mpf(v.numerator) / v.denominator - self._mp(q))

    def le(self, v, q: int) -> bool:
        return self.cmp(v, q) <= 0

    def _mp(self, q: int):
        c = mpmath.mpf(self.c.numerator) / self.c.denominator
        tau = mpmath.mpf(self.tau.numerator) / self.tau.denominator
        kappa = mpmath.mpf(self.kappa.numerator) / self.kappa.denominator
        return c * mpmath.power(q, -tau) * mpmath.power(mpmath.log(q + 1), -kappa)

    def __call__(self, q: int) -> float:
        if self.family == "table":
            return float(self._table_value(q))
        with mpmath.workdps(FLOAT_DPS):
            return float(self._mp(q)) if self.family == "powlog" else float(self.c) * q ** -float(self.tau)

    def exact_value(self, q: int):
        """psi(q) as a Fraction when it is rational, else None."""
        if self.family == "table":
            return self._table_value(q)
        if self.family == "pow":
            a, b = self.tau.numerator, self.tau.denominator
            root = _int_root(q**a, b)
            if root is not None:
                return self.c / root
        return None

    def describe(self, q: int) -> str:
        """Exact text for psi(q): "a/b" when rational, else "c*q^(-tau)"."""
        val = self.exact_value(q)
        if val is not None:
            return format_rational(val)
        if self.family == "pow":
            return f"{format_rational(self.c)}*{q}^(-{format_rational(self.tau)})"
        return repr(self(q))

    def root_upper(self, q: int, l: int) -> Fraction:
        """A rational rho with rho**l >= psi(q), within a relative 2**-40 of the root."""
        if self.family == "table" or (self.family == "pow" and self.c == 0):
            val = self.exact_value(q)
            if val == 0:
                return Fraction(0)
        approx = self(q) ** (1.0 / l)
        if approx == 0.0 or not math.isfinite(approx):
            approx = 2.0**-1000
        rho = Fraction(approx) * (1 + Fraction(1, 2**40))
        while self.cmp(rho**l, q) < 0:
            rho *= 2
        return rho

    def check_monotone(self, N: int) -> None:
        """Non-increasing on the dyadic points 2**0 .. 2**N."""
        prev = None
        for n in range(N + 1):
            q = 2**n
            if prev is not None and self.cmp(prev, q) < 0:
                raise DomainError(f"psi increases between {q // 2} and {q}")
            val = self.exact_value(q)
            prev = val if val is not None else Fraction(self(q))

    def __str__(self) -> str:
        if self.family == "pow":
            return f"pow:{format_rational(self.c)},{format_rational(self.tau)}"
        if self.family == "powlog":
            return f"powlog:{format_rational(self.c)},{format_rational(self.tau)},{format_rational(self.kappa)}"
        return "table:" + ",".join(f"{h}={format_rational(v)}" for h, v in self.table)


def _int_root(n: int, k: int):
    """Exact integer k-th root of n >= 0, or None."""
    if k == 1:
        return n
    r = round(n ** (1.0 / k)) if n < 2**1000 else int(mpmath.nthroot(n, k))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None
