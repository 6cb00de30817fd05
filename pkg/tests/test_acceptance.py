"""Acceptance criteria 1-7.  The terminal summary prints one PASS/FAIL line per criterion."""

import io
import os
import subprocess
import sys
import tokenize
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from recsolve import check_bounds_numeric, check_solution_symbolic, iterate_oracle, parse, solve
from recsolve.approxbounds import expoly_sandwich, lambda_is_sound
from recsolve.cli import run
from recsolve.dcbounds import dc_bounds, dc_exact_on_powers
from recsolve.expr import eval_exact, normalize, render
from recsolve.linsolve import _co_iterate, eliminate_system, solve_constant
from recsolve.parser import parse_expr, parse_initial_conditions
from recsolve.poly import Poly, isolate_positive_root
from recsolve.summation import gosper, gosper_sum, sum_expoly
from recsolve.expoly import to_expoly
from recsolve.varsolve import solve_first_order_var
from recsolve.verify import CERTIFIED, dc_level_sum, iterate_oracle_factored, eval_factored

HERE = Path(__file__).parent
ROOT = HERE.parent
CORPUS = HERE / "data" / "regression.txt"
GOLDEN = HERE / "data" / "regression.golden"

STRASSEN = parse("x(n) = 7*x(n/2) + (9/2)*n^2")
MERGESORT = parse("x(n) = 2*x(n/2) + n - 1")
CUBIC = parse("x(n) = x(n-1) + x(n-3) + 2^n + n - 1")
ZEROS = {(0,): 0, (1,): 0, (2,): 0}
H = "n*log(n)/log(2)"


# ---------------------------------------------------------------------------
# 1. exact forms for the regression recurrences

C1 = [
    ("x(n) = 5*x(n-1) - 6*x(n-2) + n^2", "x(0)=0;x(1)=1", {}),
    ("x(n) = n*x(n-1) + 2", "x(0)=0", {}),
    ("x(n) = 3*x(n-1)^2", "", {"x0": Fraction(2, 3)}),
    ("x(n) = n/2 + n*sum(x(k), k, 0, n-1)", "", {}),
]


@pytest.mark.criterion(1)
@pytest.mark.parametrize("text, init, bind", C1)
def test_criterion1_exact(text, init, bind):
    spec = parse(text)
    ics = parse_initial_conditions(init) if init else None
    sol = solve(spec, ics)
    assert sol.is_exact and sol.verification.ok
    assert check_solution_symbolic(spec, sol.expr).status == CERTIFIED
    if sol.classification == "NonLinear":
        # doubly exponential growth: compare in factored form
        want = iterate_oracle_factored(spec, {(0,): bind["x0"]}, 50)
        for j in range(51):
            assert eval_factored(sol.expr, {"n": Fraction(j), **bind}) == want[j]
        return
    want = iterate_oracle(spec, ics or {}, 50)
    assert [eval_exact(sol.expr, {"n": j, **bind}) for j in range(51)] == want


@pytest.mark.criterion(1)
def test_criterion1_list_reverse():
    spec = parse("x(m,n) = a + x(m-1,n+1)")
    ics = parse_initial_conditions("x(0,n)=9")
    sol = solve(spec, ics)
    assert sol.is_exact and sol.expr == normalize(parse_expr("9 + a*m"))
    assert render(sol.expr) == "a*m + 9"
    assert check_solution_symbolic(spec, sol.expr).status == CERTIFIED
    grid = iterate_oracle(spec, ics, 50, {"a": Fraction(7, 2)})
    for (m, n), v in grid.items():
        if m + n <= 50:
            assert eval_exact(sol.expr, {"m": m, "n": n, "a": Fraction(7, 2)}) == v


# ---------------------------------------------------------------------------
# 2. system elimination

SYSTEM = parse("x(n) = x(n-1) + y(n-1) + 2^n; y(n) = z(n-1) + n - 1; z(n) = x(n-1) + 1")


@pytest.mark.criterion(2)
def test_criterion2_derived_recurrence():
    derived = eliminate_system(SYSTEM, "x")
    assert derived.shift_terms == {(1,): 1, (3,): 1}
    assert normalize(derived.forcing) == normalize(parse_expr("2^n + n - 1"))


@pytest.mark.criterion(2)
@pytest.mark.parametrize("x0, y0, z0", [(0, 0, 0), (1, 2, 0), (Fraction(1, 2), -3, 4)])
def test_criterion2_oracle(x0, y0, z0):
    conds = {"x": {(0,): x0}, "y": {(0,): y0}, "z": {(0,): z0}}
    derived = eliminate_system(SYSTEM, "x", conds=conds)
    got = iterate_oracle(derived, derived.initial_conditions, 40)
    want = _co_iterate(SYSTEM, conds, 40)["x"]
    assert got == [eval_exact(want[j], {}) for j in range(41)]


# ---------------------------------------------------------------------------
# 3. divide and conquer


@pytest.mark.criterion(3)
def test_criterion3a_strassen_on_powers():
    form = dc_exact_on_powers(STRASSEN, {(1,): 1})
    want = parse_expr("7*n^(log(7)/log(2)) - 6*n^2")
    for k in range(11):
        assert eval_exact(form, {"n": 2**k}) == eval_exact(want, {"n": 2**k})


@pytest.mark.criterion(3)
def test_criterion3b_strassen_bounds():
    ics = {(1,): 1}
    assert check_bounds_numeric(STRASSEN, ics, dc_bounds(STRASSEN, ics), 10).ok
    known = (parse_expr("n^(log(7)/log(2)) - (3/2)*n^2"), parse_expr("7*n^(log(7)/log(2)) - 6*n^2"))
    assert check_bounds_numeric(STRASSEN, ics, known, 10).ok


@pytest.mark.criterion(3)
@pytest.mark.parametrize("x1", [0, 5])
def test_criterion3b_mergesort_bounds(x1):
    ics = {(1,): parse_expr("x1")}
    rep = check_bounds_numeric(MERGESORT, ics, dc_bounds(MERGESORT, ics), 10, {"x1": x1})
    assert rep.ok and rep.checked == 11
    known = (parse_expr(f"{H} - 3*n + 3 + n*x1/2"), parse_expr(f"{H} - n/2 + 1 + n*x1"))
    rep = check_bounds_numeric(MERGESORT, ics, known, 10, {"x1": x1})
    assert rep.ok and rep.checked == 11


@pytest.mark.criterion(3)
def test_criterion3c_mergesort_growth():
    n, k = 2**20, 20  # log(n)/log(2) is exactly k
    val = dc_level_sum(2, 2, parse_expr("n - 1"), "n", 0, 1, k)
    assert val == iterate_oracle(MERGESORT, {(1,): 0}, 20)[20]
    assert Fraction(9, 10) <= val / (n * k) <= Fraction(11, 10)


# ---------------------------------------------------------------------------
# 4. exp-poly sandwich


@pytest.mark.criterion(4)
def test_criterion4_artifact_sandwich():
    sb = expoly_sandwich(CUBIC, ZEROS)
    assert check_bounds_numeric(CUBIC, ZEROS, (sb.lower(), sb.upper()), 40).ok


@pytest.mark.criterion(4)
def test_criterion4_known_pair():
    lam, X = "(1466/1000)", "0"
    lower = parse_expr(f"(8/3)*2^n - (35/3)*({lam}/({lam} - 1))*{lam}^n")
    upper = parse_expr(f"(8/3)*2^n + {lam}^n*({lam}/({lam} - 1)^2)*({X} + 1)")
    assert check_bounds_numeric(CUBIC, ZEROS, (lower, upper), 40).ok


@pytest.mark.criterion(4)
def test_criterion4_lambda_soundness():
    lam = Fraction(1466, 1000)
    assert 1 / lam + 1 / lam**3 <= 1
    assert lambda_is_sound({1: 1, 3: 1}, lam)


# ---------------------------------------------------------------------------
# 5. property suites

ROOTS = [Fraction(1), Fraction(2), Fraction(3), Fraction(-1), Fraction(1, 2), Fraction(-2), Fraction(3, 2)]
rat = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def const_coeff_instances(draw):
    rs = draw(st.lists(st.sampled_from(ROOTS), min_size=1, max_size=3))
    char = Poly.from_roots(rs)
    d = char.degree
    # forcing base is drawn from the roots half the time, which exercises resonance
    base = draw(st.one_of(st.sampled_from(rs), st.sampled_from([Fraction(1), Fraction(5), Fraction(1, 3)])))
    pcs = draw(st.lists(rat, min_size=1, max_size=3))
    forcing = f"({Poly(pcs, 'n').to_expr()})*({base})^n"
    terms = " + ".join(f"({-char.coeff(d - i)})*x(n-{i})" for i in range(1, d + 1))
    ics = {(i,): draw(rat) for i in range(d)}
    return parse(f"x(n) = {terms} + {forcing}"), ics


@pytest.mark.criterion(5)
@settings(max_examples=200, deadline=None)
@given(const_coeff_instances())
def test_criterion5a_constant_coefficient(inst):
    spec, ics = inst
    expr = solve_constant(spec, ics).to_expr()
    want = iterate_oracle(spec, ics, 50)
    assert [eval_exact(expr, {"n": j}) for j in range(51)] == want


@pytest.mark.criterion(5)
@settings(max_examples=100, deadline=None)
@given(
    st.integers(1, 3),
    st.integers(0, 3),
    st.integers(0, 2),
    st.sampled_from(["0", "1", "n", "2^n", "n^2 - 1", "3^n*n", "factorial(n)", "(1/2)^n"]),
    rat,
)
def test_criterion5b_variable_coefficient(c0, c1, c2, forcing, x0):
    spec = parse(f"x(n) = ({c0} + {c1}*n + {c2}*n^2)*x(n-1) + {forcing}")
    sol = solve_first_order_var(spec, {(0,): x0})
    want = iterate_oracle(spec, {(0,): x0}, 50)
    assert [eval_exact(sol.expr, {"n": j}) for j in range(51)] == want


def _antidifference_holds(t, S, lo=1):
    return all(eval_exact(S, {"k": m}) - eval_exact(S, {"k": m - 1}) == eval_exact(t, {"k": m}) for m in range(lo, 31))


@pytest.mark.criterion(5)
def test_criterion5c_gosper_examples():
    t = parse_expr("k*2^k")
    S = gosper(t, "k")
    assert _antidifference_holds(t, S)
    for m in range(16):
        assert eval_exact(S, {"k": m}) - eval_exact(S, {"k": 0}) == (m - 1) * 2 ** (m + 1) + 2
    t = parse_expr("1/(k*(k+1))")
    assert _antidifference_holds(t, gosper(t, "k"), lo=2)
    assert normalize(gosper_sum(t, "k", 1, parse_expr("n"))) == normalize(parse_expr("1 - 1/(n+1)"))
    tri = sum_expoly(to_expoly(parse_expr("k"), "k"), 1, 0, "n")
    assert all(tri(m) == Fraction(m * (m + 1), 2) for m in range(21))
    geo = sum_expoly(to_expoly(parse_expr("(7/4)^i"), "i"), 0, -1, "k")
    assert normalize(geo.to_expr()) == normalize(parse_expr("((7/4)^k - 1)/(3/4)"))


@pytest.mark.criterion(5)
@settings(max_examples=50, deadline=None)
@given(
    st.lists(rat, min_size=1, max_size=4).filter(any),
    st.fractions(min_value=-4, max_value=4, max_denominator=5).filter(lambda q: q not in (0, 1)),
)
def test_criterion5c_gosper_random(cs, base):
    t = normalize(parse_expr(f"({Poly(cs, 'k').to_expr()})*({base})^k"))
    assert _antidifference_holds(t, gosper(t, "k"))


@st.composite
def sandwich_instances(draw):
    d = draw(st.integers(1, 3))
    cs = draw(st.lists(st.fractions(min_value=0, max_value=2, max_denominator=3), min_size=d, max_size=d))
    if cs[-1] == 0:
        cs[-1] = Fraction(1)
    forcing = draw(st.sampled_from(["0", "1", "n", "2^n", "n^2 + 1", "3^n", "n*2^n", "(1/2)^n", "2^n + n - 1"]))
    ics = {(i,): draw(st.fractions(min_value=0, max_value=10, max_denominator=3)) for i in range(d)}
    terms = " + ".join(f"({c})*x(n-{i + 1})" for i, c in enumerate(cs))
    return parse(f"x(n) = {terms} + {forcing}"), ics


@pytest.mark.criterion(5)
@settings(max_examples=50, deadline=None)
@given(sandwich_instances())
def test_criterion5d_sandwich(inst):
    spec, ics = inst
    sb = expoly_sandwich(spec, ics)
    assert check_bounds_numeric(spec, ics, (sb.lower(), sb.upper()), 60).ok


@pytest.mark.criterion(5)
@pytest.mark.parametrize(
    "text",
    ["x(n) = 2*x(n-1) + 2^n", "x(n) = 4*x(n-1) - 4*x(n-2) + n*2^n", "x(n) = 3*x(n-1) - 3*x(n-2) + x(n-3) + n^2"],
)
def test_criterion5e_resonance(text):
    spec = parse(text)
    ics = {(i,): Fraction(i + 1, 2) for i in range(spec.order)}
    expr = solve_constant(spec, ics).to_expr()
    assert [eval_exact(expr, {"n": j}) for j in range(51)] == iterate_oracle(spec, ics, 50)


# ---------------------------------------------------------------------------
# 6. exactness and determinism


def _float_tokens(path):
    hits = []
    with open(path, "rb") as fh:
        for tok in tokenize.tokenize(fh.readline):
            if tok.type == tokenize.NUMBER:
                s = tok.string.lower()
                if not s.startswith(("0x", "0o", "0b")) and ("." in s or "e" in s or s.endswith("j")):
                    hits.append((path.name, tok.start[0], tok.string))
            elif tok.type == tokenize.NAME and tok.string in ("float", "floats"):
                hits.append((path.name, tok.start[0], tok.string))
    return hits


@pytest.mark.criterion(6)
def test_criterion6_no_floating_point():
    files = sorted(HERE.glob("*.py")) + sorted((ROOT / "src" / "recsolve").glob("*.py"))
    hits = [h for f in files for h in _float_tokens(f)]
    assert hits == []


def _cli_batch(seed):
    env = dict(os.environ, PYTHONHASHSEED=str(seed))
    cmd = [sys.executable, "-m", "recsolve.cli", "batch", str(CORPUS)]
    return subprocess.run(cmd, capture_output=True, env=env, cwd=ROOT).stdout


@pytest.mark.criterion(6)
def test_criterion6_byte_identical_cli():
    first, second = _cli_batch(0), _cli_batch(12345)
    assert first and first == second
    assert first == GOLDEN.read_bytes()
    out = io.StringIO()
    run(["batch", str(CORPUS)], out, io.StringIO())
    assert out.getvalue().encode() == first


# ---------------------------------------------------------------------------
# 7. root isolation


@pytest.mark.criterion(7)
def test_criterion7_root_isolation():
    p = Poly([-1, 0, -1, 1])
    root = isolate_positive_root(p, Fraction(1, 1000))
    lo, hi = root.lo, root.hi
    assert hi - lo <= Fraction(1, 1000)
    assert p(lo) < 0 <= p(hi)
    assert hi**3 - hi**2 - 1 >= 0
    assert Fraction(1465, 1000) <= lo and hi <= Fraction(1467, 1000)
