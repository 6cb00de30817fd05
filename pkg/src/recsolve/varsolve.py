"""First-order linear recurrences with variable coefficients."""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    CoefficientVanishes,
    NotExpPoly,
    NotFirstOrder,
    NotPolynomial,
    RecsolveError,
)
from .expoly import to_param_expoly
from .expr import (
    ONE,
    ZERO,
    Add,
    Const,
    Mul,
    Pow,
    Expr,
    Func,
    add,
    as_expr,
    mul,
    normalize,
    pow_,
    sub,
    substitute,
    sym,
)
from .linsolve import ic_symbol
from .model import RecurrenceSpec, Solution, is_div_key
from .poly import rational_roots, ratfunc_from_expr
from .summation import gosper_sum, product_term, sum_expoly


def first_order_parts(spec: RecurrenceSpec):
    """(a(n), b(n)) for x(n) = a(n) x(n-1) + b(n)."""
    shifts = spec.shift_terms
    if spec.cross_terms or spec.prefix_sum_coeff is not None or not spec.is_linear:
        raise NotFirstOrder("not a single linear recurrence")
    if set(shifts) != {(1,)} or any(is_div_key(k) for k in shifts):
        raise NotFirstOrder(f"shifts {sorted(shifts)} are not exactly one step")
    return shifts[(1,)], spec.forcing


def _integer_roots_above(e: Expr, var: str, k0: int):
    """Integer zeros > k0 of the numerator and denominator of e, if rational in var."""
    try:
        rf = ratfunc_from_expr(normalize(e), var)
    except (NotPolynomial, RecsolveError):
        return [], []
    zs = [] if rf.num.is_zero() else [int(r) for r in rational_roots(rf.num) if r.denominator == 1 and r > k0]
    poles = [int(r) for r in rational_roots(rf.den) if r.denominator == 1 and r > k0]
    return sorted(zs), sorted(poles)


def default_start(a: Expr, b: Expr, var: str) -> int:
    """Smallest k0 >= 0 with a, b defined at every k > k0."""
    k0 = 0
    for e in (a, b):
        _, poles = _integer_roots_above(e, var, -1)
        if poles:
            k0 = max(k0, max(poles))
    return k0


def _close_sum(t: Expr, j: str, lo: int, hi_var: str) -> Expr:
    """sum_{j=lo}^{hi_var} t(j) with as many terms closed as possible."""
    t = normalize(t)
    if t == ZERO:
        return ZERO
    try:
        return sum_expoly(to_param_expoly(t, j), lo=lo, hi_offset=0, var=hi_var).to_expr()
    except NotExpPoly:
        pass
    hi = sym(hi_var)
    terms = t.args if isinstance(t, Add) else (t,)
    closed, rest = [], []
    for term in terms:
        try:
            closed.append(gosper_sum(term, j, lo, hi))
        except RecsolveError:
            rest.append(term)
    if rest:
        closed.append(Func("sum", (normalize(add(*rest)), sym(j), as_expr(lo), hi)))
    return normalize(add(*closed))


def solve_first_order_var(spec: RecurrenceSpec, ics=None) -> Solution:
    """x(n) = F(n) * (x(k0) + sum_{j=k0+1}^{n} b(j)/F(j)), F(n) = prod_{k=k0+1}^{n} a(k)."""
    ics = spec.initial_conditions if ics is None else ics
    a, b = first_order_parts(spec)
    var = spec.var
    given = sorted(k[0] for k in ics if len(k) == 1 and isinstance(k[0], int))
    k0 = given[0] if given else default_start(a, b, var)
    x0 = as_expr(ics[(k0,)]) if given else ic_symbol(spec.unknown, k0)
    zeros, poles = _integer_roots_above(a, var, k0)
    if zeros:
        raise CoefficientVanishes(f"coefficient {a} vanishes at {var} = {zeros[0]}", zeros[0])
    b_poles = _integer_roots_above(b, var, k0)[1]
    if poles or b_poles:
        cut = min(poles + b_poles)
        raise CoefficientVanishes(f"recurrence undefined at {var} = {cut}", cut)
    k, j = _fresh(spec, "k"), _fresh(spec, "j")
    F_n = product_term(substitute(a, {var: sym(k)}), k, k0 + 1, sym(var))
    F_j = substitute(F_n, {var: sym(j)})
    t = normalize(mul(substitute(b, {var: sym(j)}), pow_(F_j, -1)))
    inner = _close_sum(t, j, k0 + 1, var)
    expr = absorb_factorials(normalize(mul(F_n, add(x0, inner))))
    return Solution.exact(expr, domain=f"all {var} >= {k0}")


def _absorb_term(t: Expr) -> Expr:
    """factorial(a)*(a + 1)^e -> factorial(a + 1)*(a + 1)^(e - 1), repeatedly."""
    if not isinstance(t, Mul):
        return t
    args = list(t.args)
    changed = True
    while changed:
        changed = False
        for i, f in enumerate(args):
            if not (isinstance(f, Func) and f.name == "factorial"):
                continue
            nxt = normalize(add(f.args[0], 1))
            for j, g in enumerate(args):
                base, e = (g.base, g.exp) if isinstance(g, Pow) else (g, ONE)
                if j == i or base != nxt or not (isinstance(e, Const) and e.value >= 1):
                    continue
                args[i] = Func("factorial", (nxt,))
                args[j] = pow_(base, e.value - 1)
                changed = True
                break
            if changed:
                break
    return normalize(mul(*args))


def absorb_factorials(e: Expr) -> Expr:
    if isinstance(e, Add):
        return normalize(add(*(_absorb_term(a) for a in e.args)))
    return _absorb_term(e)


def _fresh(spec: RecurrenceSpec, base: str) -> str:
    used = spec.rhs.free_symbols() | set(spec.index_vars)
    name = base
    i = 1
    while name in used:
        name = f"{base}{i}"
        i += 1
    return name
