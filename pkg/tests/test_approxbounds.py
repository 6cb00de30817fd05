from fractions import Fraction

import pytest

from recsolve.approxbounds import (
    choose_lambda,
    expoly_sandwich,
    lambda_is_sound,
    leading_term,
    sandwich_solution,
)
from recsolve.errors import Unsupported
from recsolve.expr import eval_exact
from recsolve.parser import parse
from recsolve.verify import check_bounds_numeric, iterate_oracle

CUBIC = parse("x(n) = x(n-1) + x(n-3) + 2^n + n - 1")
ZEROS = {(0,): 0, (1,): 0, (2,): 0}


def test_leading_term_from_forcing():
    t = leading_term(CUBIC)
    assert (t.c, t.d, t.alpha) == (Fraction(8, 3), 0, 2)


def test_leading_term_from_root():
    t = leading_term(parse("x(n) = 2*x(n-1) + 1"))
    assert t.alpha == 2 and t.c is None


def test_leading_term_dominant_root():
    t = leading_term(parse("x(n) = 3*x(n-1) + 2^n"))
    assert t.alpha == 3
    vals = iterate_oracle(parse("x(n) = 3*x(n-1) + 2^n"), {(0,): 1}, 30)
    assert abs(vals[30] / vals[29] - 3) < Fraction(1, 10**4)


def test_cubic_sandwich():
    sb = expoly_sandwich(CUBIC, ZEROS)
    assert sb.f.terms[Fraction(2)].coeffs == (Fraction(8, 3),)
    assert lambda_is_sound({1: 1, 3: 1}, sb.lam)
    assert sb.init_bound == 0
    assert check_bounds_numeric(CUBIC, ZEROS, (sb.lower(), sb.upper()), 60).ok


def test_lambda_choice():
    lam = choose_lambda({1: 1, 3: 1})
    assert lam == Fraction(733, 500)
    assert lambda_is_sound({1: 1, 3: 1}, Fraction(1466, 1000))
    assert not lambda_is_sound({1: 1, 3: 1}, Fraction(1465, 1000))


def test_widening_keeps_sandwich():
    lam = choose_lambda({1: 1, 3: 1}) * Fraction(101, 100)
    sb = expoly_sandwich(CUBIC, ZEROS, lam=lam)
    assert check_bounds_numeric(CUBIC, ZEROS, (sb.lower(), sb.upper()), 60).ok


def test_constant_sequence_is_tight():
    sol = sandwich_solution(parse("x(n) = x(n-1)"), {(0,): 5})
    assert sol.lower == sol.upper == 5


def test_golden_ratio_sandwich():
    s = parse("x(n) = x(n-1) + x(n-2) + 1")
    sb = expoly_sandwich(s, {(0,): 0, (1,): 0})
    assert sb.lam**2 >= sb.lam + 1
    assert check_bounds_numeric(s, {(0,): 0, (1,): 0}, (sb.lower(), sb.upper()), 40).ok


def test_negative_coefficient_rejected():
    with pytest.raises(Unsupported):
        expoly_sandwich(parse("x(n) = x(n-1) - x(n-3)"), ZEROS)


def test_lambda_below_root_rejected():
    with pytest.raises(Unsupported):
        expoly_sandwich(CUBIC, ZEROS, lam=Fraction(1465, 1000))


def test_known_pair():
    lam = Fraction(1466, 1000)
    X = 0
    lower = f"(8/3)*2^n - (35/3)*({lam}/({lam} - 1))*({lam})^n"
    upper = f"(8/3)*2^n + ({lam})^n*({lam}/({lam} - 1)^2)*({X} + 1)"
    from recsolve.parser import parse_expr

    pair = (parse_expr(lower), parse_expr(upper))
    assert check_bounds_numeric(CUBIC, ZEROS, pair, 40).ok
    assert eval_exact(pair[0], {"n": 0}) < 0
