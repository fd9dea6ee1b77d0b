from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sdioph.errors import ConfigError, DomainError
from sdioph.psi import PsiFunction

F = Fraction


def test_parse_families():
    assert PsiFunction.parse("pow:1,3") == PsiFunction.power(1, 3)
    assert PsiFunction.parse("powlog:1/2,2,1") == PsiFunction.power_log(F(1, 2), 2, 1)
    t = PsiFunction.parse("table:1=1/2,4=1/8")
    assert t.table == ((1, F(1, 2)), (4, F(1, 8)))
    for text in ("pow:1,3", "powlog:1/2,2,1", "table:1=1/2,4=1/8"):
        assert str(PsiFunction.parse(text)) == text


@pytest.mark.parametrize("text", ["pow:1", "foo:1,2", "table:1=1/8,4=1/2", "pow:-1,2", "pow:1,-2", "table:", "powlog:1,2"])
def test_parse_errors(text):
    with pytest.raises(ConfigError) as info:
        PsiFunction.parse(text)
    assert info.value.key == "psi"


def test_non_monotone_table_rejected():
    with pytest.raises(DomainError):
        PsiFunction.from_table({1: F(1, 4), 2: F(1, 2)})


def test_table_lookup():
    t = PsiFunction.from_table({1: F(1, 2), 4: F(1, 8)})
    assert [t.exact_value(q) for q in (1, 3, 4, 100)] == [F(1, 2), F(1, 2), F(1, 8), F(1, 8)]
    assert t(5) == 0.125


def test_pow_exact_values():
    psi = PsiFunction.power(1, F(3, 2))
    assert psi.exact_value(4) == F(1, 8)
    assert psi.exact_value(2) is None
    assert psi.describe(2) == "1*2^(-3/2)"
    assert psi.describe(16) == "1/64"


@given(st.integers(1, 10**6), st.fractions(min_value=0, max_value=5, max_denominator=7), st.fractions(min_value=0, max_value=10, max_denominator=50))
def test_pow_cmp_exact(q, tau, v):
    psi = PsiFunction.power(1, tau)
    # v <= q**-tau  <=>  v**b * q**a <= 1 with tau = a/b, checked independently
    a, b = tau.numerator, tau.denominator
    expected = (v**b * q**a > 1) - (v**b * q**a < 1)
    assert psi.cmp(v, q) == expected


def test_cmp_irrational_boundary():
    psi = PsiFunction.power(1, F(1, 2))
    # 1/sqrt(2) lies strictly between these
    assert psi.cmp(F(7071, 10000), 2) < 0
    assert psi.cmp(F(7072, 10000), 2) > 0


def test_zero_psi():
    psi = PsiFunction.power(0, 3)
    assert psi.cmp(0, 5) == 0
    assert psi.cmp(F(1, 10**9), 5) == 1
    assert psi.root_upper(3, 2) == 0


def test_powlog_matches_float():
    psi = PsiFunction.power_log(1, 2, 1)
    import math

    assert abs(psi(10) - 1 / (100 * math.log(11))) < 1e-15
    assert psi.cmp(F(1, 250), 10) < 0 < psi.cmp(F(1, 200), 10) and not psi.exact


@given(st.integers(1, 10**4), st.integers(1, 3), st.fractions(min_value=0, max_value=4, max_denominator=5))
def test_root_upper(q, l, tau):
    psi = PsiFunction.power(1, tau)
    rho = psi.root_upper(q, l)
    assert psi.cmp(rho**l, q) >= 0
    assert float(rho) ** l <= psi(q) * (1 + 1e-9)


def test_check_monotone():
    PsiFunction.power(1, 3).check_monotone(20)
    PsiFunction.power(5, 0).check_monotone(20)
