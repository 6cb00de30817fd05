"""Closed forms for sums and products: exp-poly sums, Gosper, factorable products."""

from __future__ import annotations

from fractions import Fraction
from math import comb

from .errors import NotExpPoly, NotFactorable, NotGosperSummable, NotHypergeometric, NotPolynomial
from .expoly import ExpPoly, ParamExpPoly, _linear_in
from .expr import (
    ONE,
    ZERO,
    Add,
    Const,
    Expr,
    Func,
    Mul,
    Pow,
    add,
    as_expr,
    as_number,
    factorial,
    is_numeric,
    mul,
    normalize,
    number_to_expr,
    pow_,
    sub,
    substitute,
    sym,
)
from .linalg import solve_any
from .poly import Poly, RatFunc, cauchy_bound, poly_gcd, rational_roots, ratfunc_from_expr


# ---------------------------------------------------------------------------
# exp-poly sums


def _antidifference_coeffs(base, p: Poly) -> Poly:
    """q with base*q(k+1) - q(k) = p(k)."""
    d = p.degree
    if base == 1:
        # q(k+1) - q(k) = p(k); deg q = d + 1, q(0) = 0
        q = [Fraction(0)] * (d + 2)
        for i in range(d, -1, -1):
            acc = p.coeff(i)
            for j in range(i + 2, d + 2):
                acc = acc - q[j] * comb(j, i)
            q[i + 1] = acc / (i + 1)
        return Poly(q, p.var)
    q = [Fraction(0)] * (d + 1)
    for j in range(d, -1, -1):
        acc = p.coeff(j)
        for i in range(j + 1, d + 1):
            acc = acc - base * q[i] * comb(i, j)
        q[j] = acc / (base - 1)
    return Poly(q, p.var)


def expoly_antidifference(xp: ExpPoly) -> ExpPoly:
    """S with S(k+1) - S(k) = xp(k)."""
    out = {}
    for b, p in xp.items():
        out[b] = _antidifference_coeffs(b, p)
    return ExpPoly(xp.var, out)


def sum_expoly(xp, lo: int = 0, hi_offset: int = -1, var: str = "n"):
    """sum_{k=lo}^{n + hi_offset} xp(k) as an exp-poly in n.

    Accepts an ExpPoly or a ParamExpPoly; an empty range gives 0.
    """
    if isinstance(xp, ParamExpPoly):
        return ParamExpPoly(var, {m: sum_expoly(x, lo, hi_offset, var) for m, x in xp.parts.items()})
    S = expoly_antidifference(xp).with_var(var)
    # S(n + hi_offset + 1) - S(lo)
    return S.shift(hi_offset + 1) - S(lo)


# ---------------------------------------------------------------------------
# Gosper's algorithm


def _ratio(t: Expr, k: str) -> Expr:
    return normalize(mul(substitute(t, {k: add(sym(k), 1)}), pow_(t, -1)))


def _kernel(t: Expr, k: str) -> Expr:
    """Non-rational factors (k in an exponent, factorials) of the first term of t."""
    first = t.args[0] if isinstance(t, Add) else t
    factors = first.args if isinstance(first, Mul) else (first,)
    keep = [f for f in factors if f.depends_on(k) and not _is_rational_factor(f, k)]
    return normalize(mul(*keep)) if keep else ONE


def _is_rational_factor(f: Expr, k: str) -> bool:
    try:
        ratfunc_from_expr(f, k)
        return True
    except NotPolynomial:
        return False


def hyper_ratio(t: Expr, k: str) -> RatFunc:
    """t(k+1)/t(k) as a reduced rational function of k.

    When normalization has spread a polynomial over a geometric or
    factorial kernel, the kernel is divided out and its ratio taken apart.
    """
    r = _ratio(t, k)
    try:
        return ratfunc_from_expr(r, k)
    except NotPolynomial:
        pass
    kern = _kernel(t, k)
    if kern != ONE:
        rest = normalize(mul(t, pow_(kern, -1)))
        try:
            rk = ratfunc_from_expr(_ratio(kern, k), k)
            rr = ratfunc_from_expr(rest, k)
            if not rr.num.is_zero():
                return rk * rr.shift(1) / rr
        except NotPolynomial:
            pass
    raise NotHypergeometric(f"term ratio is not rational in {k}: {r}")


def _shift_bound(a: Poly, b: Poly) -> int:
    if a.degree < 1 or b.degree < 1:
        return -1
    return int(cauchy_bound(a) + cauchy_bound(b)) + 1


def gosper_normal(num: Poly, den: Poly):
    """num/den = Z * A/B * C(k+1)/C(k) with gcd(A(k), B(k+h)) = 1, h >= 0."""
    Z = num.lc() / den.lc()
    A, B = num.monic(), den.monic()
    C = Poly([1], num.var)
    for h in range(0, _shift_bound(A, B) + 1):
        while True:
            d = poly_gcd(A, B.shift(h))
            if d.degree < 1:
                break
            A = A.exact_div(d)
            B = B.exact_div(d.shift(-h))
            for j in range(1, h + 1):
                C = C * d.shift(-j)
    return A.scale(Z), B, C


def _solve_poly_equation(A: Poly, B: Poly, C: Poly, d: int):
    """Polynomial x of degree <= d with A*x(k+1) - B*x(k) = C, or None."""
    var = A.var
    cols = []
    for j in range(d + 1):
        e = Poly([0] * j + [1], var)
        cols.append(A * e.shift(1) - B * e)
    rows_n = max([c.degree for c in cols] + [C.degree, 0]) + 1
    M = [[cols[j].coeff(i) for j in range(d + 1)] for i in range(rows_n)]
    rhs = [C.coeff(i) for i in range(rows_n)]
    sol = solve_any(M, rhs)
    if sol is None:
        return None
    return Poly(sol, var)


def gosper_certificate(t: Expr, k: str) -> RatFunc:
    """Rational g(k) with g(k+1)t(k+1) - g(k)t(k) = t(k)."""
    r = hyper_ratio(t, k)
    if r.num.is_zero():
        raise NotGosperSummable("zero term")
    A, B, C = gosper_normal(r.num, r.den)
    B = B.shift(-1)
    N, M, K = A.degree, B.degree, C.degree
    if N != M or A.lc() != B.lc():
        D = {K - max(N, M)}
    elif N == 0:
        D = {K - N + 1, 0}
    else:
        D = {K - N + 1, (B.coeff(N - 1) - A.coeff(N - 1)) / A.lc()}
    D = [int(x) for x in D if Fraction(x).denominator == 1 and x >= 0]
    if not D:
        raise NotGosperSummable("degree bound admits no polynomial")
    x = _solve_poly_equation(A, B, C, max(D))
    if x is None or x.is_zero():
        raise NotGosperSummable("Gosper's equation has no polynomial solution")
    return RatFunc(B * x, C)


def gosper(t, k: str = "k") -> Expr:
    """Antidifference S with S(k) - S(k-1) = t(k)."""
    t = normalize(as_expr(t))
    g = gosper_certificate(t, k)
    # S_low(k) = g(k) t(k) satisfies S_low(k+1) - S_low(k) = t(k); shift by one
    R = g + RatFunc(Poly([1], g.var))
    kern = _kernel(t, k)
    try:
        rest = ratfunc_from_expr(normalize(mul(t, pow_(kern, -1))), k)
    except NotPolynomial:
        return normalize(mul(R.to_expr(k), t))
    # reduce R*rest as one rational function so removable poles cancel
    return normalize(mul(kern, (R * rest).to_expr(k)))


def gosper_sum(t, k: str, lo, hi) -> Expr:
    """sum_{k=lo}^{hi} t(k) via Gosper; hi may be symbolic.

    Evaluated as S(hi) - S(lo) + t(lo) so nothing is needed below the range.
    """
    S = gosper(t, k)
    lo = as_expr(lo)
    return normalize(add(substitute(S, {k: as_expr(hi)}), mul(-1, substitute(S, {k: lo})), substitute(as_expr(t), {k: lo})))


# ---------------------------------------------------------------------------
# products


def _sum_of_linear(a: Fraction, b: Fraction, lo: Expr, hi: Expr) -> Expr:
    """sum_{k=lo}^{hi} (a*k + b)."""
    count = add(hi, mul(-1, lo), 1)
    ksum = mul(Fraction(1, 2), sub(mul(hi, add(hi, 1)), mul(sub(lo, 1), lo)))
    return normalize(add(mul(a, ksum), mul(b, count)))


def product_closed(a, k: str, lo, hi) -> Expr:
    """prod_{k=lo}^{hi} a(k) in closed form.

    a(k) may be a constant, c^(linear in k), and a rational function of k
    whose numerator and denominator split into linear factors with integer
    roots r satisfying lo - r >= 1 (so every factor k - r stays positive).
    """
    lo, hi = as_expr(lo), as_expr(hi)
    a = normalize(as_expr(a))
    count = normalize(add(hi, mul(-1, lo), 1))
    factors = a.args if isinstance(a, Mul) else (a,)
    consts = []
    exps = []
    rat_parts = []
    for f in factors:
        if not f.depends_on(k):
            consts.append(f)
        elif isinstance(f, Pow) and is_numeric(f.base):
            lin = _linear_in(f.exp, k)
            if lin is None:
                raise NotFactorable(f"exponent not linear in {k}: {f}")
            exps.append((f.base, lin))
        else:
            rat_parts.append(f)
    out = [pow_(mul(*consts), count)] if consts else []
    for base, (ca, cb) in exps:
        out.append(pow_(base, _sum_of_linear(ca, cb, lo, hi)))
    if rat_parts:
        try:
            rf = ratfunc_from_expr(normalize(mul(*rat_parts)), k)
        except NotPolynomial as exc:
            raise NotFactorable(str(exc)) from exc
        lc = rf.num.lc()
        if lc != 1:
            out.append(pow_(number_to_expr(lc), count))
        lo_val = as_number(lo) if is_numeric(lo) else None
        for poly, sign in ((rf.num, 1), (rf.den, -1)):
            roots = rational_roots(poly)
            if len(roots) != poly.degree:
                raise NotFactorable(f"{poly} does not split into rational linear factors")
            for r in roots:
                if r.denominator != 1:
                    raise NotFactorable(f"non-integer root {r}")
                if lo_val is None or lo_val - r < 1:
                    raise NotFactorable(f"factor {k} - {r} is not positive on the whole range")
                ratio = mul(factorial(sub(hi, r)), pow_(factorial(sub(lo, r + 1)), -1))
                out.append(pow_(ratio, sign))
    return normalize(mul(*out)) if out else ONE


def product_term(a, k: str, lo, hi) -> Expr:
    """Closed product when possible, else an unevaluated prod(...)."""
    try:
        return product_closed(a, k, lo, hi)
    except (NotFactorable, NotExpPoly):
        return Func("prod", (as_expr(a), sym(k), as_expr(lo), as_expr(hi)))
