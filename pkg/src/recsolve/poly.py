"""Dense univariate polynomials over Q or a real quadratic field."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct

from .errors import NoSignChange, NotPolynomial
from .numtypes import QuadSurd, factorint, num_sign


def _trim(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


class Poly:
    """Polynomial with coefficients ``coeffs[i]`` of ``var**i``.

    The zero polynomial has an empty coefficient tuple and degree -1.
    """

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs=(), var: str = "t"):
        self.coeffs = _trim(c if isinstance(c, QuadSurd) else Fraction(c) for c in coeffs)
        self.var = var

    @staticmethod
    def const(c, var="t"):
        return Poly([c], var)

    @staticmethod
    def x(var="t"):
        return Poly([0, 1], var)

    @staticmethod
    def from_roots(roots, var="t", lc=1):
        p = Poly([lc], var)
        for r in roots:
            p = p * Poly([-r, 1], var)
        return p

    @staticmethod
    def from_dict(d: dict, var="t"):
        if not d:
            return Poly((), var)
        top = max(d)
        return Poly([d.get(i, 0) for i in range(top + 1)], var)

    def as_dict(self) -> dict:
        return {i: c for i, c in enumerate(self.coeffs) if c != 0}

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def lc(self):
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coeff(self, i):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_rational(self) -> bool:
        return all(not isinstance(c, QuadSurd) for c in self.coeffs)

    def with_var(self, var):
        return Poly(self.coeffs, var)

    def __call__(self, x):
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == _trim([other])
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def _lift(self, other):
        if isinstance(other, Poly):
            return other
        return Poly([other], self.var)

    def __add__(self, other):
        other = self._lift(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly([self.coeff(i) + other.coeff(i) for i in range(n)], self.var)

    __radd__ = __add__

    def __neg__(self):
        return Poly([-c for c in self.coeffs], self.var)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        if not self.coeffs or not other.coeffs:
            return Poly((), self.var)
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly(out, self.var)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Poly([1], self.var)
        for _ in range(k):
            out = out * self
        return out

    def scale(self, c):
        return Poly([a * c for a in self.coeffs], self.var)

    def divmod(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(len(rem) - other.degree, 1)
        lc = other.lc()
        while len(rem) - 1 >= other.degree and any(c != 0 for c in rem):
            shift = len(rem) - 1 - other.degree
            f = rem[-1] / lc
            q[shift] = f
            for i, c in enumerate(other.coeffs):
                rem[shift + i] = rem[shift + i] - f * c
            rem.pop()
            while rem and rem[-1] == 0:
                rem.pop()
        return Poly(q, self.var), Poly(rem, self.var)

    def __floordiv__(self, other):
        return self.divmod(self._lift(other))[0]

    def __mod__(self, other):
        return self.divmod(self._lift(other))[1]

    def exact_div(self, other):
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ArithmeticError("inexact polynomial division")
        return q

    def monic(self):
        if self.is_zero():
            return self
        return self.scale(1 / self.lc())

    def derivative(self):
        return Poly([i * c for i, c in enumerate(self.coeffs)][1:], self.var)

    def shift(self, h):
        """p(x + h)."""
        out = Poly((), self.var)
        lin = Poly([h, 1], self.var)
        for c in reversed(self.coeffs):
            out = out * lin + Poly([c], self.var)
        return out

    def compose_linear(self, a, b):
        """p(a*x + b)."""
        out = Poly((), self.var)
        lin = Poly([b, a], self.var)
        for c in reversed(self.coeffs):
            out = out * lin + Poly([c], self.var)
        return out

    def sign_at(self, x) -> int:
        return num_sign(self(x))

    def __repr__(self):
        return f"Poly({[str(c) for c in self.coeffs]}, {self.var!r})"

    def to_expr(self, var=None):
        from .expr import add, as_expr, mul, pow_, sym

        v = sym(var or self.var)
        return add(*(mul(as_expr(c), pow_(v, i)) for i, c in enumerate(self.coeffs) if c != 0))


def poly_gcd(a: Poly, b: Poly) -> Poly:
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def squarefree_factors(p: Poly) -> list[tuple[Poly, int]]:
    """Yun's algorithm: p = lc * prod(f_i ** i) with f_i squarefree, coprime."""
    if p.degree <= 0:
        return []
    out = []
    a = p.monic()
    b = a.derivative()
    c = poly_gcd(a, b)
    w = a.exact_div(c)
    y = b.exact_div(c)
    i = 1
    z = y - w.derivative()
    while w.degree > 0:
        g = poly_gcd(w, z)
        if g.degree > 0:
            out.append((g, i))
        w = w.exact_div(g)
        y = z.exact_div(g)
        z = y - w.derivative()
        i += 1
    return out


def _divisors(n: int) -> list[int]:
    n = abs(n)
    if n == 0:
        return [0]
    divs = [1]
    for p, e in factorint(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def integer_coefficients(p: Poly) -> list[int]:
    if not p.is_rational():
        raise ValueError("polynomial has irrational coefficients")
    den = 1
    for c in p.coeffs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in p.coeffs]
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    return [c // g for c in ints] if g else ints


def rational_roots(p: Poly) -> list[Fraction]:
    """All rational roots of a nonzero rational polynomial, with multiplicity."""
    if p.is_zero():
        raise ValueError("zero polynomial")
    if not p.is_rational():
        raise ValueError("rational_roots needs rational coefficients")
    roots: list[Fraction] = []
    q = p
    # zero roots
    while q.degree > 0 and q.coeff(0) == 0:
        roots.append(Fraction(0))
        q = Poly(q.coeffs[1:], q.var)
    if q.degree <= 0:
        return roots
    ints = integer_coefficients(q)
    cands = set()
    for num, den in iproduct(_divisors(ints[0]), _divisors(ints[-1])):
        cands.add(Fraction(num, den))
        cands.add(Fraction(-num, den))
    for r in sorted(cands):
        while q.degree > 0 and q(r) == 0:
            roots.append(r)
            q = q.exact_div(Poly([-r, 1], q.var))
    return sorted(roots)


def descartes_variations(p: Poly) -> int:
    signs = [num_sign(c) for c in p.coeffs if c != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def cauchy_bound(p: Poly) -> Fraction:
    lc = abs(p.lc())
    return 1 + max((abs(c) / lc for c in p.coeffs[:-1]), default=Fraction(0))


@dataclass(frozen=True)
class RootInterval:
    """Rational enclosure ``lo <= root <= hi`` of a real root of ``poly``."""

    lo: Fraction
    hi: Fraction
    poly: Poly

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def refine(self, width) -> "RootInterval":
        if self.exact or self.width <= width:
            return self
        return _bisect(self.poly, self.lo, self.hi, Fraction(width))


def _bisect(p: Poly, lo: Fraction, hi: Fraction, width: Fraction) -> RootInterval:
    s_lo = p.sign_at(lo)
    target = width / 4
    while hi - lo > target:
        mid = (lo + hi) / 2
        s = p.sign_at(mid)
        if s == 0:
            return RootInterval(mid, mid, p)
        if s == s_lo:
            lo = mid
        else:
            hi = mid
    # snap to the grid of multiples of width so endpoints stay short
    cell_lo = math.floor(lo / width) * width
    if math.floor(hi / width) * width != cell_lo:
        g = cell_lo + width
        s = p.sign_at(g)
        if s == 0:
            return RootInterval(g, g, p)
        cell_lo = g - width if s != s_lo else g
    cell = (cell_lo, cell_lo + width)
    if p.sign_at(cell[0]) * p.sign_at(cell[1]) < 0:
        return RootInterval(cell[0], cell[1], p)
    return RootInterval(lo, hi, p)


def isolate_positive_root(p: Poly, width) -> RootInterval:
    """Enclose the positive real root of p in an interval of width <= width.

    The search range is (0, B] with B a Cauchy bound; a sign change between
    0+ and B is required.  Rational roots are returned exactly as [r, r].
    """
    width = Fraction(width)
    if width <= 0:
        raise ValueError("width must be positive")
    if p.degree < 1:
        raise NoSignChange("constant polynomial has no roots")
    # factors of t carry no positive roots; drop them so p(0) != 0
    k = next(i for i, c in enumerate(p.coeffs) if c != 0)
    if k:
        p = Poly(p.coeffs[k:], p.var)
        if p.degree < 1:
            raise NoSignChange("no positive roots")
    s_lo = num_sign(p.coeffs[0])
    bound = cauchy_bound(p)
    hi = Fraction(1)
    while hi < bound:
        hi *= 2
    s_hi = p.sign_at(hi)
    if s_hi == 0:
        return RootInterval(hi, hi, p)
    if s_lo == s_hi:
        raise NoSignChange(f"no sign change of {p} on (0, {hi}]")
    if p.is_rational():
        pos = [r for r in rational_roots(p) if r > 0]
        if len(set(pos)) == 1 and descartes_variations(p) == 1:
            return RootInterval(pos[0], pos[0], p)
    return _bisect(p, Fraction(0), hi, width)


def poly_from_expr(e, var: str) -> Poly:
    """Convert a polynomial expression in ``var`` with numeric coefficients."""
    from .expr import Add, Const, Mul, Pow, Symbol, as_number, is_numeric

    if is_numeric(e):
        v = as_number(e)
        if v is None:
            raise NotPolynomial(f"non-numeric constant {e}")
        return Poly([v], var)
    if isinstance(e, Symbol):
        if e.name == var:
            return Poly([0, 1], var)
        raise NotPolynomial(f"symbol {e.name}")
    if isinstance(e, Add):
        out = Poly((), var)
        for a in e.args:
            out = out + poly_from_expr(a, var)
        return out
    if isinstance(e, Mul):
        out = Poly([1], var)
        for a in e.args:
            out = out * poly_from_expr(a, var)
        return out
    if isinstance(e, Pow) and isinstance(e.exp, Const):
        v = e.exp.value
        if v.denominator == 1 and v >= 0:
            return poly_from_expr(e.base, var) ** int(v)
    raise NotPolynomial(f"not a polynomial in {var}: {e}")


# ---------------------------------------------------------------------------
# rational functions


class RatFunc:
    """Reduced quotient num/den of polynomials, den monic."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None):
        var = num.var
        den = den if den is not None else Poly([1], var)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        g = poly_gcd(num, den) if not num.is_zero() else den.monic()
        if g.degree > 0:
            num, den = num.exact_div(g), den.exact_div(g)
        lc = den.lc()
        self.num = num.scale(1 / lc) if lc != 1 else num
        self.den = den.scale(1 / lc) if lc != 1 else den
        if self.num.is_zero():
            self.den = Poly([1], var)

    @property
    def var(self):
        return self.num.var

    def __mul__(self, other):
        return RatFunc(self.num * other.num, self.den * other.den)

    def __truediv__(self, other):
        return RatFunc(self.num * other.den, self.den * other.num)

    def __add__(self, other):
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other):
        return RatFunc(self.num * other.den - other.num * self.den, self.den * other.den)

    def __pow__(self, k: int):
        if k < 0:
            return RatFunc(self.den**-k, self.num**-k)
        return RatFunc(self.num**k, self.den**k)

    def shift(self, h):
        return RatFunc(self.num.shift(h), self.den.shift(h))

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def to_expr(self, var=None):
        from .expr import mul, pow_

        return mul(self.num.to_expr(var), pow_(self.den.to_expr(var), -1))

    def __eq__(self, other):
        return isinstance(other, RatFunc) and self.num == other.num and self.den == other.den

    def __repr__(self):
        return f"RatFunc({self.num!r}, {self.den!r})"


def ratfunc_from_expr(e, var: str) -> RatFunc:
    from .expr import Add, Const, Mul, Pow, Symbol, as_number, is_numeric

    if is_numeric(e):
        v = as_number(e)
        if v is None:
            raise NotPolynomial(f"non-numeric constant {e}")
        return RatFunc(Poly([v], var))
    if isinstance(e, Symbol):
        if e.name == var:
            return RatFunc(Poly([0, 1], var))
        raise NotPolynomial(f"symbol {e.name}")
    if isinstance(e, Add):
        out = RatFunc(Poly((), var))
        for a in e.args:
            out = out + ratfunc_from_expr(a, var)
        return out
    if isinstance(e, Mul):
        out = RatFunc(Poly([1], var))
        for a in e.args:
            out = out * ratfunc_from_expr(a, var)
        return out
    if isinstance(e, Pow) and isinstance(e.exp, Const) and e.exp.value.denominator == 1:
        return ratfunc_from_expr(e.base, var) ** int(e.exp.value)
    raise NotPolynomial(f"not a rational function of {var}: {e}")
