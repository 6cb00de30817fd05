"""Divide-and-conquer recurrences x(n) = alpha*x(n/beta) + g(n)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import IllFormed, NotPolynomial, RecsolveError
from .expr import (
    ONE,
    Expr,
    add,
    as_expr,
    as_number,
    eval_interval,
    is_numeric,
    log,
    mul,
    normalize,
    pow_,
    render,
    sub,
    sym,
)
from .linsolve import ic_symbol
from .model import RecurrenceSpec, Solution, is_div_key
from .poly import Poly, poly_from_expr


@dataclass(frozen=True)
class DCSpec:
    alpha: Fraction
    beta: Fraction
    g: Poly
    var: str
    bases: tuple  # ((n0, value Expr), ...), one per chain

    @property
    def log_ratio(self) -> Expr:
        """log(alpha)/log(beta), the exponent of n in alpha^k."""
        return normalize(mul(log(self.alpha), pow_(log(self.beta), -1)))


def _rational(c: Expr, what: str) -> Fraction:
    v = as_number(c) if is_numeric(c) else None
    if not isinstance(v, Fraction):
        raise IllFormed(f"{what} {render(c)} must be a literal rational")
    return v


def dc_spec(spec: RecurrenceSpec, ics=None) -> DCSpec:
    """Validate the shape; g must be a polynomial with g(1 + t) having
    non-negative coefficients, which makes it non-negative and
    non-decreasing for n >= 1."""
    ics = spec.initial_conditions if ics is None else ics
    keys = list(spec.shift_terms)
    if len(keys) != 1 or not is_div_key(keys[0]) or spec.cross_terms or not spec.is_linear:
        raise IllFormed("expected alpha*x(n/beta) + g(n)")
    if spec.prefix_sum_coeff is not None:
        raise IllFormed("prefix sums are not allowed here")
    beta = Fraction(keys[0][1])
    alpha = _rational(spec.shift_terms[keys[0]], "coefficient")
    if alpha <= 0 or beta <= 1:
        raise IllFormed(f"need alpha > 0 and beta > 1, got alpha = {alpha}, beta = {beta}")
    var = spec.var
    try:
        g = poly_from_expr(spec.forcing, var)
    except (NotPolynomial, RecsolveError) as exc:
        raise IllFormed(f"g({var}) = {render(spec.forcing)} is not a polynomial with rational coefficients") from exc
    if any(not isinstance(c, Fraction) for c in g.coeffs):
        raise IllFormed("g must have rational coefficients")
    if any(c < 0 for c in g.shift(1).coeffs):
        raise IllFormed(f"g({var}) = {render(spec.forcing)} is not non-negative and non-decreasing for {var} >= 1")
    bases = sorted((k[0], as_expr(v)) for k, v in ics.items() if len(k) == 1 and isinstance(k[0], int))
    if not bases:
        bases = [(1, ic_symbol(spec.unknown, 1))]
    for n0, _ in bases:
        if not 1 <= n0:
            raise IllFormed(f"base index {n0} must be a positive integer")
    # keep one base per chain
    chains = []
    for n0, v in bases:
        if not any(_on_chain(n0, b, beta) for b, _ in chains):
            chains.append((n0, v))
    return DCSpec(alpha, beta, g, var, tuple(chains))


def _on_chain(n: int, base: int, beta: Fraction) -> bool:
    q = Fraction(n, base)
    while q > 1:
        q /= beta
    return q == 1


def _chain_parts(d: DCSpec, n0: int, x0: Expr):
    """(rest(n), K) with x(n) = rest(n) + K*(n/n0)^(log alpha/log beta) on n = n0*beta^k.

    From the level sum alpha^k*x(n0) + sum_{i<k} alpha^i*g(n/beta^i) with
    alpha^k = (n/n0)^L; only K depends on the chain.
    """
    n = sym(d.var)
    rest, chain = [], [x0]
    for deg, c in enumerate(d.g.coeffs):
        if c == 0:
            continue
        rho = d.alpha / d.beta**deg
        if rho == 1:
            # resonance: c*n^deg*k with k = log(n/n0)/log(beta), and (n/n0)^L = (n/n0)^deg
            rest.append(mul(c, pow_(n, deg), log(n), pow_(log(d.beta), -1)))
            chain.append(mul(-c, Fraction(n0) ** deg, log(n0), pow_(log(d.beta), -1)))
        else:
            rest.append(mul(-c / (rho - 1), pow_(n, deg)))
            chain.append(mul(c / (rho - 1), Fraction(n0) ** deg))
    return normalize(add(*rest)), normalize(add(*chain))


def _chain_power(d: DCSpec, n0: int) -> Expr:
    return pow_(mul(Fraction(1, n0), sym(d.var)), d.log_ratio)


def _chain_form(d: DCSpec, n0: int, x0: Expr) -> Expr:
    """Closed form on n = n0*beta^k."""
    rest, K = _chain_parts(d, n0, x0)
    return normalize(add(rest, mul(K, _chain_power(d, n0))))


def dc_exact_on_powers(spec: RecurrenceSpec, ics=None, base: int | None = None) -> Expr:
    """Exact closed form valid at n = n0*beta^k (the first chain unless ``base`` is given)."""
    d = dc_spec(spec, ics)
    for n0, x0 in d.bases:
        if base is None or n0 == base:
            return _chain_form(d, n0, x0)
    raise IllFormed(f"no initial condition at {base}")


def domain_text(d: DCSpec) -> str:
    starts = ", ".join(str(n0) for n0, _ in d.bases)
    return f"n >= 1 reaching a base index ({starts}) by exact division by {d.beta}: n = n0*{d.beta}^k"


def dc_bounds(spec: RecurrenceSpec, ics=None) -> Solution:
    """Lower and upper bounds valid at every well-defined n.

    Well-defined indices are exactly the chains n0*beta^k, so with one
    chain both bounds equal the exact form.  With several chains the
    chain-dependent part is a multiple of n^(log alpha/log beta), and the
    bounds take the smallest and largest multiple.
    """
    d = dc_spec(spec, ics)
    dom = domain_text(d)
    if len(d.bases) == 1:
        form = _chain_form(d, *d.bases[0])
        return Solution.bounds(form, form, domain=dom, extra={"tight": True})
    split = [(n0,) + _chain_parts(d, n0, x0) for n0, x0 in d.bases]
    rest = split[0][1]
    if any(K.free_symbols() for _, _, K in split):
        raise IllFormed("several chains need numeric base values")
    # compare K*n0^(-L), the coefficient of n^L, across chains
    lead = [(n0, K, normalize(mul(K, pow_(n0, mul(-1, d.log_ratio))))) for n0, _, K in split]
    lo = hi = lead[0]
    for item in lead[1:]:
        if _less(item[2], lo[2]):
            lo = item
        if _less(hi[2], item[2]):
            hi = item
    lower = normalize(add(rest, mul(lo[1], _chain_power(d, lo[0]))))
    upper = normalize(add(rest, mul(hi[1], _chain_power(d, hi[0]))))
    return Solution.bounds(lower, upper, domain=dom)


def _less(a: Expr, b: Expr) -> bool:
    """a < b for numeric expressions, decided on refined enclosures."""
    diff = normalize(sub(a, b))
    if is_numeric(diff):
        v = as_number(diff)
        if isinstance(v, Fraction):
            return v < 0
    prec = 64
    while prec <= 4096:
        iv = eval_interval(diff, {}, prec)
        if iv.hi < 0:
            return True
        if iv.lo >= 0:
            return False
        prec *= 2
    raise IllFormed(f"cannot order chain coefficients {render(a)} and {render(b)}")
