from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from recsolve.errors import NotReducible, Unsupported
from recsolve.expoly import to_expoly
from recsolve.expr import eval_exact, eval_number, normalize, sym
from recsolve.linsolve import (
    _co_iterate,
    char_decompose,
    eliminate_system,
    order_reduce,
    particular_solution,
    solve_by_reduction,
    solve_constant,
)
from recsolve.numtypes import QuadSurd
from recsolve.parser import parse, parse_expr
from recsolve.poly import Poly
from recsolve.verify import CERTIFIED, check_solution_symbolic, iterate_oracle

SYSTEM = parse("x(n) = x(n-1) + y(n-1) + 2^n; y(n) = z(n-1) + n - 1; z(n) = x(n-1) + 1")


def xp(text):
    return to_expoly(normalize(parse_expr(text)), "n")


class TestCharDecompose:
    def test_two_three(self):
        d = char_decompose(parse("x(n) = 5*x(n-1) - 6*x(n-2)"))
        assert d.roots == ((2, 1), (3, 1)) and d.resolved

    def test_golden_surds(self):
        d = char_decompose(parse("x(n) = x(n-1) + x(n-2)"))
        half = Fraction(1, 2)
        assert {r for r, _ in d.roots} == {QuadSurd(half, half, 5), QuadSurd(half, -half, 5)}

    def test_unresolved_cubic(self):
        d = char_decompose(parse("x(n) = x(n-1) + x(n-3)"))
        assert d.roots == () and d.unresolved == Poly([-1, 0, -1, 1])

    def test_product_identity(self):
        d = char_decompose(parse("x(n) = 4*x(n-1) - 5*x(n-2) + 2*x(n-3)"))
        p = Poly([1])
        for r, m in d.roots:
            p = p * Poly([-r, 1]) ** m
        assert p == d.poly and d.multiplicity(1) == 2


class TestParticular:
    def test_quadratic_forcing(self):
        d = char_decompose(parse("x(n) = 5*x(n-1) - 6*x(n-2)"))
        p = particular_solution(d, xp("n^2"))
        assert p == xp("n^2/2 + 7*n/2 + 15/2")
        for j in range(2, 9):
            assert p(j) - 5 * p(j - 1) + 6 * p(j - 2) == j * j

    def test_constant_balance(self):
        d = char_decompose(parse("x(n) = 2*x(n-1)"))
        assert particular_solution(d, xp("1")) == xp("-1")

    def test_eight_thirds(self):
        d = char_decompose(parse("x(n) = x(n-1) + x(n-3)"))
        assert particular_solution(d, xp("2^n")) == xp("(8/3)*2^n")

    def test_resonance(self):
        s = parse("x(n) = 2*x(n-1) + 2^n")
        res = solve_constant(s, {(0,): 1})
        assert normalize(res.to_expr()) == normalize(parse_expr("2^n + n*2^n"))
        assert check_solution_symbolic(s, res.to_expr()).status == CERTIFIED


class TestFitting:
    def test_fibonacci(self):
        res = solve_constant(parse("x(n) = x(n-1) + x(n-2)"), {(0,): 0, (1,): 1})
        assert eval_number(res.to_expr(), {"n": 10}) == 55

    def test_symbolic_start(self):
        res = solve_constant(parse("x(n) = 2*x(n-1)"), {(0,): sym("c")})
        assert normalize(res.to_expr()) == normalize(parse_expr("c*2^n"))

    def test_oracle_match(self):
        s = parse("x(n) = 5*x(n-1) - 6*x(n-2) + n^2")
        res = solve_constant(s, {(0,): 0, (1,): 1})
        vals = iterate_oracle(s, {(0,): 0, (1,): 1}, 20)
        assert all(eval_exact(res.to_expr(), {"n": j}) == v for j, v in enumerate(vals))

    def test_missing_conditions_become_symbols(self):
        res = solve_constant(parse("x(n) = x(n-1) + 2*x(n-2)"), {})
        assert res.to_expr().free_symbols() == {"n", "x0", "x1"}

    def test_late_start(self):
        s = parse("x(n) = 3*x(n-1) + 1")
        res = solve_constant(s, {(4,): 2})
        assert res.start == 4
        assert eval_exact(res.to_expr(), {"n": 5}) == 7

    def test_unresolved_declined(self):
        with pytest.raises(Unsupported):
            solve_constant(parse("x(n) = x(n-1) + x(n-3)"), {(0,): 0, (1,): 0, (2,): 0})


class TestOrderReduction:
    def test_even_odd(self):
        s = parse("x(n) = 4*x(n-2)")
        subs = order_reduce(s, {(0,): 1, (1,): 3})
        assert [r for _, r in subs] == [0, 1]
        assert all(sub.shift_terms == {(1,): 4} for sub, _ in subs)
        assert [sub.initial_conditions for sub, _ in subs] == [{(0,): 1}, {(0,): 3}]
        red = solve_by_reduction(s, {(0,): 1, (1,): 3})
        assert [eval_exact(red.piece_at(j), {}) for j in range(5)] == [1, 3, 4, 12, 16]

    def test_gcd_one(self):
        with pytest.raises(NotReducible):
            order_reduce(parse("x(n) = x(n-1) + 1"))

    def test_three_chains(self):
        subs = order_reduce(parse("x(n) = 2*x(n-3)"), {(0,): 1, (1,): 2, (2,): 5})
        assert len(subs) == 3 and all(sub.order == 1 for sub, _ in subs)

    @pytest.mark.parametrize(
        "text, ics",
        [
            ("x(n) = -x(n-2)", {(0,): 1, (1,): 3}),
            ("x(n) = 2*x(n-3) + n", {(0,): 1, (1,): 2, (2,): 5}),
            ("x(n) = 5*x(n-2) - 6*x(n-4) + 1", {(0,): 0, (1,): 1, (2,): 2, (3,): 3}),
        ],
    )
    def test_interleaving_matches_oracle(self, text, ics):
        s = parse(text)
        red = solve_by_reduction(s, ics)
        vals = iterate_oracle(s, ics, 40)
        for j, v in enumerate(vals):
            assert eval_exact(red.piece_at(j), {}) == v


class TestElimination:
    def test_three_equations(self):
        derived = eliminate_system(SYSTEM, "x")
        assert derived == parse("x(n) = x(n-1) + x(n-3) + 2^n + n - 1").with_initial_conditions(derived.initial_conditions)

    def test_two_step_swap(self):
        d = eliminate_system(parse("x(n) = y(n-1); y(n) = x(n-1)"))
        assert d.shift_terms == {(2,): 1} and d.forcing == 0

    def test_product_of_couplings(self):
        d = eliminate_system(parse("x(n) = 2*y(n-1); y(n) = 3*x(n-1)"))
        assert d.shift_terms == {(2,): 6}
        conds = {"x": {(0,): 1}, "y": {(0,): 1}}
        got = iterate_oracle(d, eliminate_system(parse("x(n) = 2*y(n-1); y(n) = 3*x(n-1)"), conds=conds).initial_conditions, 10)
        want = _co_iterate(parse("x(n) = 2*y(n-1); y(n) = 3*x(n-1)"), conds, 10)["x"]
        assert got == [eval_exact(want[j], {}) for j in range(len(got))]

    def test_oracle_agreement(self):
        conds = {"x": {(0,): 1}, "y": {(0,): 2}, "z": {(0,): 0}}
        d = eliminate_system(SYSTEM, "x", conds=conds)
        got = iterate_oracle(d, d.initial_conditions, 40)
        want = _co_iterate(SYSTEM, conds, 40)["x"]
        assert got == [eval_exact(want[j], {}) for j in range(len(got))]


# ---------------------------------------------------------------------------
# properties

roots = st.sampled_from([Fraction(1), Fraction(2), Fraction(3), Fraction(-1), Fraction(1, 2), Fraction(-2)])


@settings(max_examples=40, deadline=None)
@given(
    st.lists(roots, min_size=1, max_size=3),
    st.sampled_from(["0", "1", "n", "2^n", "n*3^n", "(1/2)^n + n^2"]),
    st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=4), min_size=3, max_size=3),
)
def test_random_constant_coefficient(rs, forcing, ivals):
    char = Poly.from_roots(rs)
    d = char.degree
    terms = " + ".join(f"({-char.coeff(d - i)})*x(n-{i})" for i in range(1, d + 1))
    spec = parse(f"x(n) = {terms} + {forcing}")
    ics = {(i,): ivals[i] for i in range(d)}
    res = solve_constant(spec, ics)
    vals = iterate_oracle(spec, ics, 30)
    for j, v in enumerate(vals):
        assert eval_exact(res.to_expr(), {"n": j}) == v
