from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st

from recsolve.errors import CoefficientVanishes, NotFirstOrder
from recsolve.expr import eval_exact, normalize, sym
from recsolve.parser import parse, parse_expr
from recsolve.varsolve import solve_first_order_var
from recsolve.verify import CERTIFIED, check_solution_symbolic, iterate_oracle


def closed(text, ics):
    return solve_first_order_var(parse(text), ics)


def test_factorial_sum():
    sol = closed("x(n) = n*x(n-1) + 2", {(0,): 0})
    assert [eval_exact(sol.expr, {"n": j}) for j in range(1, 5)] == [2, 6, 20, 82]
    for j in range(12):
        assert eval_exact(sol.expr, {"n": j}) == 2 * sum(Fraction(factorial(j), factorial(k)) for k in range(1, j + 1))
    assert check_solution_symbolic(parse("x(n) = n*x(n-1) + 2"), sol.expr).status == CERTIFIED


def test_counting():
    assert closed("x(n) = x(n-1) + 1", {(0,): 0}).expr == sym("n")


def test_reduced_prefix_sum_form():
    sol = closed("x(n) = (n^2/(n-1))*x(n-1)", {(1,): Fraction(1, 2)})
    assert normalize(sol.expr) == normalize(parse_expr("n*factorial(n)/2"))
    assert sol.domain == "all n >= 1"
    for j in range(1, 9):
        assert eval_exact(sol.expr, {"n": j}) == Fraction(j * factorial(j), 2)


def test_symbolic_start_value():
    sol = closed("x(n) = 2*x(n-1) + n", {})
    assert "x0" in sol.expr.free_symbols()
    assert check_solution_symbolic(parse("x(n) = 2*x(n-1) + n"), sol.expr).status == CERTIFIED


def test_hypergeometric_forcing():
    s = parse("x(n) = (n+1)*x(n-1) + factorial(n+1)")
    sol = solve_first_order_var(s, {(0,): 1})
    vals = iterate_oracle(s, {(0,): 1}, 15)
    assert all(eval_exact(sol.expr, {"n": j}) == v for j, v in enumerate(vals))


def test_unevaluated_sum_still_matches():
    s = parse("x(n) = x(n-1) + 1/n")
    sol = solve_first_order_var(s, {(0,): 0})
    vals = iterate_oracle(s, {(0,): 0}, 12)
    assert all(eval_exact(sol.expr, {"n": j}) == v for j, v in enumerate(vals))


def test_vanishing_coefficient():
    with pytest.raises(CoefficientVanishes) as info:
        closed("x(n) = (n-3)*x(n-1) + 1", {(0,): 1})
    assert info.value.index == 3


def test_not_first_order():
    with pytest.raises(NotFirstOrder):
        closed("x(n) = n*x(n-2)", {(0,): 1})


# ---------------------------------------------------------------------------
# properties


@settings(max_examples=30, deadline=None)
@given(
    st.integers(1, 3),
    st.integers(0, 3),
    st.integers(0, 2),
    st.sampled_from(["0", "1", "n", "2^n", "n^2 - 1", "3^n*n"]),
    st.fractions(min_value=-4, max_value=4, max_denominator=3),
)
def test_random_instances(c0, c1, c2, forcing, x0):
    # a(n) = c0 + c1*n + c2*n^2 is positive for n >= 1
    spec = parse(f"x(n) = ({c0} + {c1}*n + {c2}*n^2)*x(n-1) + {forcing}")
    sol = solve_first_order_var(spec, {(0,): x0})
    vals = iterate_oracle(spec, {(0,): x0}, 20)
    for j, v in enumerate(vals):
        assert eval_exact(sol.expr, {"n": j}) == v
