"""Sandwich bounds f - g_minus <= x <= f + g_plus for non-negative linear recurrences.

The remainder r(n) = x(n) - f(n) of an exact particular solution f obeys
the homogeneous recurrence, so with lam >= the positive characteristic root
(sum a_i lam^-i <= 1) induction gives r(n) <= H lam^n on both sides.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import NoPositiveRoot, NoSignChange, NotExpPoly, Unsupported
from .expoly import ExpPoly, to_expoly
from .expr import (
    ONE,
    ZERO,
    Expr,
    add,
    as_expr,
    as_number,
    is_numeric,
    mul,
    normalize,
    number_to_expr,
    pow_,
    sub,
    sym,
)
from .linsolve import (
    CharDecomposition,
    char_decompose,
    char_poly,
    constant_coefficients,
    particular_solution,
    solve_constant,
)
from .model import RecurrenceSpec, Solution
from .numtypes import num_sign
from .poly import RootInterval, isolate_positive_root

DEFAULT_WIDTH = Fraction(1, 1000)


@dataclass(frozen=True)
class BoundTerm:
    """c * n^d * alpha^n; c is None when it depends on unknown data."""

    c: Fraction | tuple | None
    d: int
    alpha: Fraction | RootInterval

    def alpha_hi(self) -> Fraction:
        return self.alpha.hi if isinstance(self.alpha, RootInterval) else self.alpha

    def to_expr(self, var: str = "n", side: str = "upper") -> Expr:
        c = self.c
        if c is None:
            raise ValueError("undetermined constant")
        if isinstance(c, tuple):
            c = c[0] if side == "lower" else c[1]
        n = sym(var)
        return normalize(mul(number_to_expr(c), pow_(n, self.d), pow_(self.alpha_hi(), n)))


@dataclass(frozen=True)
class SandwichBounds:
    f: ExpPoly
    g_minus: BoundTerm
    g_plus: BoundTerm
    init_bound: Fraction  # X, the largest initial condition
    lam: Fraction
    start: int

    def lower(self, var: str = "n") -> Expr:
        return normalize(sub(self.f.to_expr(var), self.g_minus.to_expr(var)))

    def upper(self, var: str = "n") -> Expr:
        return normalize(add(self.f.to_expr(var), self.g_plus.to_expr(var)))


def nonnegative_coefficients(spec: RecurrenceSpec) -> dict:
    coeffs = constant_coefficients(spec)
    bad = {i: a for i, a in coeffs.items() if a < 0}
    if bad:
        i, a = min(bad.items())
        raise Unsupported(f"coefficient {a} of {spec.unknown}({spec.var}-{i}) is negative")
    return coeffs


def dominant_root(coeffs: dict, width=DEFAULT_WIDTH) -> RootInterval:
    p = char_poly(coeffs)
    try:
        return isolate_positive_root(p, width)
    except NoSignChange as exc:
        raise NoPositiveRoot(str(exc)) from exc


def _base_vs_root(base, root: RootInterval) -> int:
    """Sign of base - root, refining the enclosure until decided."""
    if root.exact:
        return num_sign(base - root.lo)
    r = root
    for _ in range(200):
        if base > r.hi:
            return 1
        if base < r.lo:
            return -1
        r = r.refine(r.width / 16)
        if r.exact:
            return num_sign(base - r.lo)
    # an irrational root never equals a rational base; unreachable in practice
    raise Unsupported("could not separate base from root")


def _forcing(spec: RecurrenceSpec) -> ExpPoly:
    try:
        f = to_expoly(spec.forcing, spec.var)
    except NotExpPoly as exc:
        raise Unsupported(f"forcing {spec.forcing} is not an exponential polynomial with numeric coefficients") from exc
    for b in f.bases():
        if num_sign(b) < 0:
            raise Unsupported(f"forcing base {b} alternates in sign")
    return f


def leading_term(spec: RecurrenceSpec, width=DEFAULT_WIDTH) -> BoundTerm:
    """Asymptotically leading term c*n^d*alpha^n of the solution."""
    coeffs = nonnegative_coefficients(spec)
    decomp = char_decompose(coeffs)
    root = dominant_root(coeffs, width)
    forcing = _forcing(spec)
    part = particular_solution(decomp, forcing)
    bases = [b for b in part.bases()]
    top = max(bases, key=lambda b: (b > 0, b), default=None) if bases else None
    if top is not None:
        cmp = _base_vs_root(top, root)
        p = part.terms[top]
        if cmp > 0:
            return BoundTerm(p.lc(), p.degree, top)
        if cmp == 0:
            # resonance at the top: the particular part already carries n^m
            return BoundTerm(p.lc(), p.degree, top)
    mult = decomp.multiplicity(root.lo) if root.exact else 1
    return BoundTerm(None, mult - 1, root.lo if root.exact else root)


def _initial_values(spec: RecurrenceSpec, ics: dict, order: int):
    given = sorted(k[0] for k in ics if len(k) == 1 and isinstance(k[0], int))
    if not given:
        raise Unsupported("sandwich bounds need numeric initial conditions")
    k0 = given[0]
    vals = {}
    for j in range(k0, k0 + order):
        if (j,) not in ics:
            raise Unsupported(f"missing initial condition {spec.unknown}({j})")
        v = as_expr(ics[(j,)])
        num = as_number(v) if is_numeric(v) else None
        if not isinstance(num, Fraction):
            raise Unsupported(f"initial condition {spec.unknown}({j}) = {v} is not a rational number")
        vals[j] = num
    return k0, vals


def choose_lambda(coeffs: dict, width=DEFAULT_WIDTH) -> Fraction:
    """Rational lam >= the positive root with sum a_i lam^-i <= 1 (exact test)."""
    root = dominant_root(coeffs, width)
    lam = root.hi
    while sum(a / lam**i for i, a in coeffs.items()) > 1:
        lam += Fraction(width)
    return lam


def lambda_is_sound(coeffs: dict, lam) -> bool:
    lam = Fraction(lam)
    return lam > 0 and sum(a / lam**i for i, a in coeffs.items()) <= 1


def expoly_sandwich(spec: RecurrenceSpec, ics=None, width=DEFAULT_WIDTH, lam=None) -> SandwichBounds:
    ics = spec.initial_conditions if ics is None else ics
    coeffs = nonnegative_coefficients(spec)
    decomp = char_decompose(coeffs)
    order = decomp.order
    k0, vals = _initial_values(spec, ics, order)
    forcing = _forcing(spec)
    f = particular_solution(decomp, forcing)
    lam = choose_lambda(coeffs, width) if lam is None else Fraction(lam)
    if not lambda_is_sound(coeffs, lam):
        raise Unsupported(f"lambda = {lam} is below the positive characteristic root")
    r = {j: vals[j] - f(j) for j in vals}
    if any(not isinstance(x, Fraction) for x in r.values()):
        raise Unsupported("particular solution is irrational at the initial indices")
    h_plus = max([Fraction(0)] + [x / lam**j for j, x in r.items()])
    h_minus = max([Fraction(0)] + [-x / lam**j for j, x in r.items()])
    X = max(vals.values())
    return SandwichBounds(f, BoundTerm(h_minus, 0, lam), BoundTerm(h_plus, 0, lam), X, lam, k0)


def sandwich_solution(spec: RecurrenceSpec, ics=None, width=DEFAULT_WIDTH) -> Solution:
    """Bounds as a Solution; exact solution when every characteristic root is rational."""
    ics = spec.initial_conditions if ics is None else ics
    coeffs = nonnegative_coefficients(spec)
    decomp = char_decompose(coeffs)
    assumptions = ("coefficients are non-negative",)
    if decomp.resolved and all(isinstance(r, Fraction) for r, _ in decomp.roots):
        res = solve_constant(spec, ics)
        e = res.to_expr()
        return Solution.bounds(e, e, domain=f"all {spec.var} >= {res.start}", assumptions=assumptions, extra={"tight": True})
    sb = expoly_sandwich(spec, ics, width)
    return Solution.bounds(
        sb.lower(spec.var),
        sb.upper(spec.var),
        domain=f"all {spec.var} >= {sb.start}",
        assumptions=assumptions,
        extra={"lambda": sb.lam, "sandwich": sb},
    )
