"""Exponential polynomials sum_i p_i(n) * b_i**n in canonical form.

Bases are nonzero numbers in Q or a real quadratic field; polynomial
coefficients live in the same field.  ``ParamExpPoly`` extends this with
symbolic parameters by keeping one ExpPoly per parameter monomial.
"""

from __future__ import annotations

import functools
from fractions import Fraction

from .errors import NotExpPoly
from .expr import (
    ONE,
    ZERO,
    Add,
    Const,
    Expr,
    Func,
    Mul,
    Pow,
    Symbol,
    Unknown,
    add,
    as_number,
    is_numeric,
    mul,
    normalize,
    number_to_expr,
    pow_,
    split_coeff,
    sym,
)
from .numtypes import MixedFieldError, QuadSurd, num_sign
from .poly import Poly


def _cmp_numbers(a, b) -> int:
    try:
        return num_sign(a - b)
    except MixedFieldError:
        prec = 32
        while True:
            ia = a.enclosure(prec) if isinstance(a, QuadSurd) else None
            ib = b.enclosure(prec) if isinstance(b, QuadSurd) else None
            lo_a, hi_a = (ia.lo, ia.hi) if ia else (a, a)
            lo_b, hi_b = (ib.lo, ib.hi) if ib else (b, b)
            if hi_a < lo_b:
                return -1
            if hi_b < lo_a:
                return 1
            prec *= 2


base_key = functools.cmp_to_key(_cmp_numbers)


class ExpPoly:
    """Canonical exp-poly in one variable: a mapping base -> nonzero Poly."""

    __slots__ = ("var", "terms")

    def __init__(self, var: str, terms=None):
        self.var = var
        clean = {}
        for b, p in (terms or {}).items():
            if b == 0:
                raise ValueError("zero base")
            if not isinstance(p, Poly):
                p = Poly([p], var)
            if not p.is_zero():
                clean[b] = clean[b] + p if b in clean else p.with_var(var)
                if clean[b].is_zero():
                    del clean[b]
        self.terms = dict(sorted(clean.items(), key=lambda kv: base_key(kv[0])))

    @staticmethod
    def const(c, var="n"):
        return ExpPoly(var, {Fraction(1): Poly([c], var)})

    @staticmethod
    def poly(p: Poly, var="n"):
        return ExpPoly(var, {Fraction(1): p.with_var(var)})

    @staticmethod
    def geometric(base, var="n", coeff=1):
        return ExpPoly(var, {base: Poly([coeff], var)})

    def is_zero(self) -> bool:
        return not self.terms

    def bases(self):
        return list(self.terms)

    def items(self):
        return self.terms.items()

    def __eq__(self, other):
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def __repr__(self):
        parts = [f"({b}, {p.coeffs})" for b, p in self.terms.items()]
        return f"ExpPoly({self.var}: {', '.join(parts)})"

    def __add__(self, other):
        if not isinstance(other, ExpPoly):
            other = ExpPoly.const(other, self.var)
        t = dict(self.terms)
        for b, p in other.terms.items():
            t[b] = t[b] + p if b in t else p
        return ExpPoly(self.var, t)

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly(self.var, {b: -p for b, p in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, ExpPoly):
            other = ExpPoly.const(other, self.var)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        if c == 0:
            return ExpPoly(self.var)
        return ExpPoly(self.var, {b: p.scale(c) for b, p in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, ExpPoly):
            return self.scale(other)
        t: dict = {}
        for b1, p1 in self.terms.items():
            for b2, p2 in other.terms.items():
                b = b1 * b2
                t[b] = t[b] + p1 * p2 if b in t else p1 * p2
        return ExpPoly(self.var, t)

    __rmul__ = __mul__

    def shift(self, h: int):
        """f(n + h)."""
        return ExpPoly(self.var, {b: p.shift(h).scale(b**h) for b, p in self.terms.items()})

    def dilate(self, g: int, r: int = 0, var=None):
        """f(g*m + r) as an exp-poly in m."""
        var = var or self.var
        out = {}
        for b, p in self.terms.items():
            q = p.compose_linear(g, r).with_var(var).scale(b**r)
            nb = b**g
            out[nb] = out[nb] + q if nb in out else q
        return ExpPoly(var, out)

    def __call__(self, n):
        total = Fraction(0)
        for b, p in self.terms.items():
            total = total + p(n) * b**n
        return total

    def max_degree(self) -> int:
        return max((p.degree for p in self.terms.values()), default=-1)

    def dimension(self) -> int:
        """Number of basis functions n^j b^n spanned by the terms."""
        return sum(p.degree + 1 for p in self.terms.values())

    def to_expr(self, var=None) -> Expr:
        v = sym(var or self.var)
        parts = []
        for b, p in self.terms.items():
            body = p.to_expr(var or self.var)
            if b != 1:
                body = mul(body, pow_(number_to_expr(b), v))
            parts.append(body)
        return normalize(add(*parts))

    def with_var(self, var):
        return ExpPoly(var, {b: p.with_var(var) for b, p in self.terms.items()})


# ---------------------------------------------------------------------------
# conversion from expressions


def _var_factor(f: Expr, var: str) -> ExpPoly:
    """Exp-poly for a single factor depending on var."""
    if isinstance(f, Symbol) and f.name == var:
        return ExpPoly(var, {Fraction(1): Poly([0, 1], var)})
    if isinstance(f, Pow):
        b, x = f.base, f.exp
        if isinstance(b, Symbol) and b.name == var:
            if isinstance(x, Const) and x.value.denominator == 1 and x.value >= 0:
                return ExpPoly(var, {Fraction(1): Poly([0, 1], var) ** int(x.value)})
            raise NotExpPoly(f"non-polynomial power of {var}")
        if isinstance(b, Add) and isinstance(x, Const) and x.value.denominator == 1 and x.value > 0:
            out = ExpPoly.const(1, var)
            inner = _sum_to_param(b, var)
            if inner.params() != [ONE]:
                raise NotExpPoly("parameter inside a power")
            for _ in range(int(x.value)):
                out = out * inner.parts[ONE]
            return out
        if is_numeric(b) and not b.depends_on(var):
            bv = as_number(b)
            if bv is None or bv == 0:
                raise NotExpPoly(f"unsupported base {b}")
            lin = _linear_in(x, var)
            if lin is None:
                raise NotExpPoly(f"exponent not linear in {var}: {x}")
            k, j = lin
            step = _num_pow(bv, k)
            c = _num_pow(bv, j)
            if step is None or c is None:
                raise NotExpPoly(f"exponent step {k} of base {bv} leaves the field")
            return ExpPoly(var, {step: Poly([c], var)})
    raise NotExpPoly(f"not an exponential polynomial in {var}: {f}")


def _num_pow(b, k: Fraction):
    if k.denominator == 1:
        return b ** int(k)
    e = pow_(number_to_expr(b), Const(k)) if isinstance(b, Fraction) else None
    if e is None:
        return None
    v = as_number(normalize(e))
    return v


def _linear_in(x: Expr, var: str):
    """x = k*var + j with rational k, j."""
    x = normalize(x)
    terms = x.args if isinstance(x, Add) else (x,)
    k = j = Fraction(0)
    for t in terms:
        c, rest = split_coeff(t)
        if rest == ONE:
            j += c
        elif isinstance(rest, Symbol) and rest.name == var:
            k += c
        else:
            return None
    return k, j


class ParamExpPoly:
    """sum over parameter monomials m of m * ExpPoly_m(var)."""

    __slots__ = ("var", "parts")

    def __init__(self, var: str, parts=None):
        self.var = var
        clean = {}
        for m, xp in (parts or {}).items():
            if xp.is_zero():
                continue
            clean[m] = clean[m] + xp if m in clean else xp
            if clean[m].is_zero():
                del clean[m]
        self.parts = dict(sorted(clean.items(), key=lambda kv: kv[0].key()))

    @staticmethod
    def of(xp: ExpPoly, monomial: Expr = ONE):
        return ParamExpPoly(xp.var, {monomial: xp})

    def params(self):
        return list(self.parts)

    def is_zero(self):
        return not self.parts

    def is_plain(self):
        return all(m == ONE for m in self.parts)

    def plain(self) -> ExpPoly:
        if not self.is_plain():
            raise NotExpPoly("expression has symbolic parameters")
        return self.parts.get(ONE, ExpPoly(self.var))

    def __add__(self, other):
        if isinstance(other, ExpPoly):
            other = ParamExpPoly.of(other)
        p = dict(self.parts)
        for m, xp in other.parts.items():
            p[m] = p[m] + xp if m in p else xp
        return ParamExpPoly(self.var, p)

    def __neg__(self):
        return ParamExpPoly(self.var, {m: -xp for m, xp in self.parts.items()})

    def __sub__(self, other):
        if isinstance(other, ExpPoly):
            other = ParamExpPoly.of(other)
        return self + (-other)

    def scale(self, c):
        return ParamExpPoly(self.var, {m: xp.scale(c) for m, xp in self.parts.items()})

    def times_expoly(self, xp: ExpPoly):
        return ParamExpPoly(self.var, {m: x * xp for m, x in self.parts.items()})

    def times_param(self, monomial: Expr):
        out = ParamExpPoly(self.var)
        for m, xp in self.parts.items():
            c, rest = split_coeff(normalize(mul(m, monomial)))
            out = out + ParamExpPoly(self.var, {rest: xp.scale(c)})
        return out

    def shift(self, h: int):
        return ParamExpPoly(self.var, {m: xp.shift(h) for m, xp in self.parts.items()})

    def dilate(self, g: int, r: int = 0, var=None):
        return ParamExpPoly(var or self.var, {m: xp.dilate(g, r, var) for m, xp in self.parts.items()})

    def coefficient_at(self, n) -> Expr:
        """Value at integer n as an expression in the parameters."""
        return normalize(add(*(mul(number_to_expr(xp(n)), m) for m, xp in self.parts.items())))

    def to_expr(self, var=None) -> Expr:
        return normalize(add(*(mul(m, xp.to_expr(var)) for m, xp in self.parts.items())))

    def __eq__(self, other):
        return isinstance(other, ParamExpPoly) and self.parts == other.parts

    def __repr__(self):
        return f"ParamExpPoly({self.parts!r})"


def _term_to_param(t: Expr, var: str) -> ParamExpPoly:
    factors = t.args if isinstance(t, Mul) else (t,)
    coeff = Fraction(1)
    params = []
    xp = ExpPoly.const(1, var)
    for f in factors:
        if isinstance(f, (Unknown,)):
            raise NotExpPoly("unknown sequence reference")
        if isinstance(f, Func) and f.depends_on(var):
            raise NotExpPoly(f"{f.name} of {var}")
        if not f.depends_on(var):
            if is_numeric(f):
                v = as_number(f)
                if v is None:
                    raise NotExpPoly(f"unsupported constant {f}")
                coeff = coeff * v
            else:
                params.append(f)
            continue
        xp = xp * _var_factor(f, var)
    monomial = mul(*params) if params else ONE
    c, rest = split_coeff(monomial)
    return ParamExpPoly(var, {rest: xp.scale(coeff * c)})


def _sum_to_param(e: Expr, var: str) -> ParamExpPoly:
    out = ParamExpPoly(var)
    if e == ZERO:
        return out
    terms = e.args if isinstance(e, Add) else (e,)
    for t in terms:
        out = out + _term_to_param(t, var)
    return out


def to_param_expoly(e: Expr, var: str) -> ParamExpPoly:
    """Split e into parameter monomials times exp-polys in var.

    Any subexpression free of var counts as a parameter; raises NotExpPoly
    when var occurs inside logs, factorials, unknowns or non-constant bases.
    """
    try:
        return _sum_to_param(normalize(e), var)
    except MixedFieldError as exc:
        raise NotExpPoly(str(exc)) from exc


def to_expoly(e: Expr, var: str) -> ExpPoly:
    pe = to_param_expoly(e, var)
    if not pe.is_plain():
        raise NotExpPoly(f"free symbols besides {var}: {sorted(e.free_symbols() - {var})}")
    return pe.plain()
