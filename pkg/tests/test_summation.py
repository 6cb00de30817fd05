from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st

from recsolve.errors import NotFactorable, NotGosperSummable
from recsolve.expoly import ExpPoly, to_expoly
from recsolve.expr import add, eval_exact, mul, normalize, pow_, substitute, sym
from recsolve.parser import parse_expr
from recsolve.poly import Poly
from recsolve.summation import gosper, gosper_sum, product_closed, sum_expoly

k, n = sym("k"), sym("n")


def brute_sum(t, var, lo, hi):
    return sum((eval_exact(t, {var: j}) for j in range(lo, hi + 1)), Fraction(0))


class TestSumExpoly:
    def test_count(self):
        S = sum_expoly(to_expoly(parse_expr("1"), "k"), 0, -1, "n")
        assert normalize(S.to_expr()) == n

    def test_triangular(self):
        S = sum_expoly(to_expoly(parse_expr("k"), "k"), 1, 0, "n")
        assert normalize(S.to_expr()) == normalize(parse_expr("n*(n+1)/2"))
        for j in range(21):
            assert S(j) == Fraction(j * (j + 1), 2)

    def test_geometric_seven_quarters(self):
        S = sum_expoly(to_expoly(parse_expr("(7/4)^i"), "i"), 0, -1, "k")
        assert normalize(S.to_expr()) == normalize(parse_expr("((7/4)^k - 1)/(3/4)"))

    def test_empty_range(self):
        S = sum_expoly(to_expoly(parse_expr("2^k"), "k"), 3, -1, "n")
        assert S(3) == 0


class TestGosper:
    def test_k_two_to_k(self):
        S = gosper(parse_expr("k*2^k"), "k")
        for m in range(16):
            val = eval_exact(S, {"k": m}) - eval_exact(S, {"k": 0})
            assert val == (m - 1) * 2 ** (m + 1) + 2
            assert val == brute_sum(parse_expr("k*2^k"), "k", 1, m)

    def test_telescoping(self):
        total = gosper_sum(parse_expr("1/(k*(k+1))"), "k", 1, n)
        assert normalize(total) == normalize(parse_expr("1 - 1/(n+1)"))

    def test_harmonic_not_summable(self):
        with pytest.raises(NotGosperSummable):
            gosper(parse_expr("1/k"), "k")

    def test_factorial_term(self):
        S = gosper(parse_expr("k*factorial(k)"), "k")
        for m in range(1, 12):
            assert eval_exact(S, {"k": m}) - eval_exact(S, {"k": m - 1}) == m * factorial(m)


class TestProducts:
    def test_factorial(self):
        assert product_closed(k, "k", 1, n) == normalize(parse_expr("factorial(n)"))

    def test_constant(self):
        assert product_closed(sym("c"), "k", 1, n) == normalize(parse_expr("c^n"))

    def test_squared_ratio(self):
        P = product_closed(parse_expr("(j+1)^2/j"), "j", 1, parse_expr("n - 1"))
        want = normalize(parse_expr("factorial(n)^2/factorial(n-1)"))
        for m in range(1, 11):
            brute = Fraction(1)
            for j in range(1, m):
                brute *= Fraction((j + 1) ** 2, j)
            assert eval_exact(P, {"n": m}) == brute == eval_exact(want, {"n": m})

    def test_irreducible_quadratic(self):
        with pytest.raises(NotFactorable):
            product_closed(parse_expr("k^2 + 1"), "k", 1, n)

    @pytest.mark.parametrize("text", ["2*k + 2", "3^k", "k*(k+2)/(k+1)", "(k+3)/2"])
    def test_brute_force(self, text):
        a = parse_expr(text)
        P = product_closed(a, "k", 1, n)
        for m in range(1, 13):
            brute = Fraction(1)
            for j in range(1, m + 1):
                brute *= eval_exact(a, {"k": j})
            assert eval_exact(P, {"n": m}) == brute


# ---------------------------------------------------------------------------
# properties

rat = st.fractions(min_value=-4, max_value=4, max_denominator=5)
nonzero_rat = rat.filter(lambda q: q != 0)


@settings(max_examples=50, deadline=None)
@given(st.lists(rat, min_size=1, max_size=3).filter(any), nonzero_rat.filter(lambda q: q != 1))
def test_gosper_poly_times_geometric(cs, base):
    t = normalize(mul(Poly(cs, "k").to_expr(), pow_(base, k)))
    S = gosper(t, "k")
    for m in range(1, 31):
        assert eval_exact(S, {"k": m}) - eval_exact(S, {"k": m - 1}) == eval_exact(t, {"k": m})


bases = st.sampled_from([Fraction(1), Fraction(2), Fraction(1, 3), Fraction(-2), Fraction(5, 2)])
expolys = st.dictionaries(bases, st.lists(rat, min_size=1, max_size=3), min_size=1, max_size=3).map(
    lambda d: ExpPoly("k", {b: Poly(cs, "k") for b, cs in d.items()})
)


@settings(max_examples=100, deadline=None)
@given(expolys, st.integers(0, 3))
def test_sum_expoly_matches_partial_sums(xp, lo):
    S = sum_expoly(xp, lo, 0, "n")
    e = xp.to_expr("k")
    for m in range(lo, 26):
        assert S(m) == brute_sum(e, "k", lo, m)
