from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from recsolve.errors import MissingInitialCondition, NotExpPoly, SymbolicBlocked
from recsolve.expoly import ExpPoly
from recsolve.expr import eval_exact, normalize
from recsolve.parser import parse, parse_expr, parse_initial_conditions
from recsolve.poly import Poly
from recsolve.verify import (
    CERTIFIED,
    REFUTED,
    UNKNOWN,
    check_bounds_numeric,
    check_solution_symbolic,
    expoly_is_zero,
    iterate_oracle,
)

FIB = parse("x(n) = x(n-1) + x(n-2)")
STRASSEN = parse("x(n) = 7*x(n/2) + (9/2)*n^2")
MERGESORT = parse("x(n) = 2*x(n/2) + n - 1")
H = "n*log(n)/log(2)"


class TestOracle:
    def test_fibonacci(self):
        assert iterate_oracle(FIB, {(0,): 0, (1,): 1}, 10)[-1] == 55

    def test_prefix_sum(self):
        s = parse("x(n) = n/2 + n*sum(x(k), k, 0, n-1)")
        assert iterate_oracle(s, {(0,): 0}, 3) == [0, Fraction(1, 2), 2, 9]

    def test_prefix_sum_default_base(self):
        s = parse("x(n) = n/2 + n*sum(x(k), k, 0, n-1)")
        assert iterate_oracle(s, {}, 4) == [0, Fraction(1, 2), 2, 9, 48]

    def test_symbolic_binding(self):
        s = parse("x(n) = x(n-1)")
        assert iterate_oracle(s, {(0,): parse_expr("c")}, 3, {"c": 4}) == [4, 4, 4, 4]

    def test_symbolic_blocked(self):
        with pytest.raises(SymbolicBlocked):
            iterate_oracle(parse("x(n) = x(n-1)"), {(0,): parse_expr("c")}, 3)

    def test_missing_condition(self):
        with pytest.raises(MissingInitialCondition):
            iterate_oracle(FIB, {(1,): 1}, 5)

    def test_divide_and_conquer_powers(self):
        vals = iterate_oracle(STRASSEN, {(1,): 1}, 3)
        assert vals == [1, 25, 247, 2017]

    def test_multivariate_grid(self):
        s = parse("x(m,n) = a + x(m-1,n+1)")
        grid = iterate_oracle(s, parse_initial_conditions("x(0,n)=9"), 3, {"a": 2})
        assert grid[(3, 0)] == 15 and grid[(0, 2)] == 9

    def test_deterministic(self):
        s = parse("x(n) = x(n-1) + x(n-3) + 2^n + n - 1")
        ics = {(0,): 0, (1,): 0, (2,): 0}
        assert iterate_oracle(s, ics, 40) == iterate_oracle(s, ics, 40)


class TestZeroTest:
    def test_cancellation(self):
        assert expoly_is_zero(parse_expr("2^n + 2^n - 2^(n+1)"))

    def test_distinct_bases(self):
        assert not expoly_is_zero(parse_expr("2^n - 3^n"))

    def test_particular_residue(self):
        p = "(n^2/2 + 7*n/2 + 15/2)"
        p1 = "((n-1)^2/2 + 7*(n-1)/2 + 15/2)"
        p2 = "((n-2)^2/2 + 7*(n-2)/2 + 15/2)"
        assert expoly_is_zero(parse_expr(f"{p} - 5*{p1} + 6*{p2} - n^2"))

    def test_outside_family(self):
        with pytest.raises(NotExpPoly):
            expoly_is_zero(parse_expr("log(n)"))


class TestSymbolicCheck:
    def test_list_reverse(self):
        s = parse("x(m,n) = a + x(m-1,n+1)")
        assert check_solution_symbolic(s, parse_expr("9 + a*m")).status == CERTIFIED

    def test_doubling(self):
        assert check_solution_symbolic(parse("x(n) = 2*x(n-1)"), parse_expr("2^n")).status == CERTIFIED

    def test_refuted_with_witness(self):
        v = check_solution_symbolic(FIB, parse_expr("n^2"))
        assert v.status == REFUTED and v.witness == 2

    def test_unknown_outside_family(self):
        v = check_solution_symbolic(parse("x(n) = x(n-1) + 1/n"), parse_expr("sum(1/k, k, 1, n)"))
        assert v.status in (CERTIFIED, UNKNOWN)
        assert v.status != REFUTED


class TestBounds:
    def test_strassen_known_pair(self):
        pair = (parse_expr("n^(log(7)/log(2)) - (3/2)*n^2"), parse_expr("7*n^(log(7)/log(2)) - 6*n^2"))
        assert check_bounds_numeric(STRASSEN, {(1,): 1}, pair, 10).ok

    @pytest.mark.parametrize("x1", [0, 5])
    def test_mergesort_known_pair(self, x1):
        pair = (parse_expr(f"{H} - 3*n + 3 + n*x1/2"), parse_expr(f"{H} - n/2 + 1 + n*x1"))
        rep = check_bounds_numeric(MERGESORT, {(1,): parse_expr("x1")}, pair, 10, {"x1": x1})
        assert rep.ok and rep.checked == 11

    def test_corrupted_upper_is_caught(self):
        pair = (parse_expr(f"{H} - 3*n + 3"), parse_expr(f"{H} - n/2 + 1 - n"))
        rep = check_bounds_numeric(MERGESORT, {(1,): 0}, pair, 10)
        assert not rep.ok
        n, side, _ = rep.first_violation
        assert side == "upper" and n == 1

    def test_needs_bindings(self):
        with pytest.raises(SymbolicBlocked):
            check_bounds_numeric(MERGESORT, {(1,): parse_expr("x1")}, (parse_expr("0"), parse_expr("n^2")), 3)


# ---------------------------------------------------------------------------
# properties

rat = st.fractions(min_value=-3, max_value=3, max_denominator=4)
bases = st.sampled_from([Fraction(1), Fraction(2), Fraction(3), Fraction(1, 2)])
expolys = st.dictionaries(bases, st.lists(rat, min_size=1, max_size=3), max_size=3).map(
    lambda d: ExpPoly("n", {b: Poly(cs, "n") for b, cs in d.items()})
)


@settings(max_examples=100, deadline=None)
@given(expolys, expolys)
def test_zero_test_agrees_with_sampling(a, b):
    diff = a - b
    e = normalize(parse_expr(f"({diff.to_expr('n')})"))
    dim = sum(p.degree + 1 for p in diff.terms.values())
    sampled = all(eval_exact(e, {"n": j}) == 0 for j in range(dim + 1))
    assert expoly_is_zero(e) == sampled


@settings(max_examples=40, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(0, 3), st.integers(0, 3))
def test_certified_implies_oracle_agreement(a, b, c0, d0):
    spec = parse(f"x(n) = ({a})*x(n-1) + ({b})")
    cand = parse_expr(f"({c0})*({a})^n + ({d0})")
    if check_solution_symbolic(spec, cand).status != CERTIFIED:
        return
    vals = iterate_oracle(spec, {(0,): c0 + d0}, 50)
    for j, v in enumerate(vals):
        assert eval_exact(cand, {"n": j}) == v
