from fractions import Fraction

import pytest

from recsolve.errors import DuplicateCondition, InconsistentArity, MixedForm, ParseError
from recsolve.expr import normalize, render, sym
from recsolve.model import RecurrenceSystem, build_spec
from recsolve.parser import parse, parse_expr, parse_initial_conditions

CORPUS = [
    "x(n) = 5*x(n-1) - 6*x(n-2) + n^2",
    "x(n) = n*x(n-1) + 2",
    "x(n) = 3*x(n-1)^2",
    "x(n) = n/2 + n*sum(x(k), k, 0, n-1)",
    "x(m,n) = a + x(m-1,n+1)",
    "x(n) = 7*x(n/2) + (9/2)*n^2",
    "x(n) = 2*x(n/2) + n - 1",
    "x(n) = x(n-1) + x(n-3) + 2^n + n - 1",
    "x(n) = x(n-1) + y(n-1) + 2^n; y(n) = z(n-1) + n - 1; z(n) = x(n-1) + 1",
]


def test_shift_form():
    s = parse("x(n) = 5*x(n-1) - 6*x(n-2) + n^2")
    assert s.shift_terms == {(1,): 5, (2,): -6}
    assert s.forcing == normalize(parse_expr("n^2"))
    assert s.order == 2


def test_divisor_form():
    s = parse("x(n) = 7*x(n/2) + (9/2)*n^2")
    assert s.is_divide_conquer and s.divisor == 2
    assert s.shift_terms == {("div", 2): 7}
    assert s.forcing == normalize(parse_expr("9*n^2/2"))


def test_prefix_sum():
    s = parse("x(n) = n/2 + n*sum(x, k, 0, n-1)")
    assert s.prefix_sum_coeff == sym("n")
    assert s.forcing == normalize(parse_expr("n/2"))


def test_system():
    s = parse(CORPUS[-1])
    assert isinstance(s, RecurrenceSystem)
    assert s.unknowns == ["x", "y", "z"]


def test_multivariate():
    s = parse("x(m,n) = a + x(m-1,n+1)")
    assert s.index_vars == ("m", "n")
    assert s.shift_terms == {(1, -1): 1}


def test_conditions():
    assert parse_initial_conditions("x(0)=0;x(1)=1") == {(0,): 0, (1,): 1}
    assert parse_initial_conditions("x(1)=1") == {(1,): 1}
    assert parse_initial_conditions("x(0,n)=9") == {(0, "n"): 9}
    assert parse_initial_conditions("x(1)=x1") == {(1,): sym("x1")}


def test_duplicate_condition():
    with pytest.raises(DuplicateCondition):
        parse_initial_conditions("x(0)=1;x(0)=2")


def test_inconsistent_arity():
    with pytest.raises(InconsistentArity):
        parse("x(n) = x(n-1) + x(n-1, n)")


def test_mixed_form():
    with pytest.raises(MixedForm):
        parse("x(n) = x(n-1) + x(n/2)")


@pytest.mark.parametrize("bad", ["x(n) = x(n-1) + * 2", "x(n) = (n", "x(n) x(n-1)", "x(n) = x(n-1) +"])
def test_syntax_error_has_position(bad):
    with pytest.raises(ParseError) as info:
        parse(bad)
    assert info.value.position is not None
    assert "^" in info.value.diagnostic()


def test_unary_minus():
    assert parse("x(n) = -x(n-1) + 1").shift_terms == {(1,): -1}


@pytest.mark.parametrize("text", CORPUS)
def test_round_trip(text):
    s = parse(text)
    assert parse(s.render()) == s


def test_coefficient_collection():
    assert parse("x(n)=x(n-1)+x(n-1)") == parse("x(n)=2*x(n-1)")


def test_build_spec_matches_parse():
    s = build_spec("x", ("n",), {("x", (1,)): 5, ("x", (2,)): -6}, parse_expr("n^2"))
    assert s == parse("x(n) = 5*x(n-1) - 6*x(n-2) + n^2")
    assert render(s.rhs) == render(parse("x(n) = 5*x(n-1) - 6*x(n-2) + n^2").rhs)


def test_rational_divisor():
    s = parse("x(n) = x(n/(3/2)) + 1")
    assert s.divisor == Fraction(3, 2)
