"""Rewriting passes onto solvable classes, each with a map back to the original."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .errors import (
    AssumptionViolated,
    CoefficientVanishes,
    NoInvariantCombination,
    NonPositiveConstant,
    NotExpPoly,
    NotPolynomial,
    NotPowerProduct,
    NotSupportedShape,
    RecsolveError,
)
from .expoly import to_param_expoly
from .expr import (
    ONE,
    ZERO,
    Const,
    Expr,
    Func,
    Mul,
    Pow,
    Symbol,
    Unknown,
    add,
    as_expr,
    as_number,
    eval_exact,
    has_unknown,
    is_numeric,
    log,
    mul,
    normalize,
    pow_,
    render,
    sub,
    substitute,
    sym,
)
from .linsolve import ic_symbol
from .model import RecurrenceSpec, build_spec, is_div_key
from .poly import poly_from_expr, rational_roots


@dataclass(frozen=True)
class TransformResult:
    transformed: RecurrenceSpec
    inverse: str  # how a solution of ``transformed`` maps back
    assumptions: tuple = ()
    back: Callable = field(default=lambda e: e, compare=False, repr=False)
    first_index: int = 0  # the back-mapped form is valid from here on

    def apply_inverse(self, solution: Expr) -> Expr:
        return normalize(self.back(as_expr(solution)))


# ---------------------------------------------------------------------------
# non-linear power products


def power_product(spec: RecurrenceSpec):
    """(c, {shift: exponent}) for x(n) = c * prod x(n - i)^p_i."""
    if len(spec.index_vars) != 1 or spec.prefix_sum_coeff is not None:
        raise NotPowerProduct("not a univariate finite-order recurrence")
    rhs = normalize(spec.rhs)
    factors = rhs.args if isinstance(rhs, Mul) else (rhs,)
    c = Fraction(1)
    exps: dict = {}
    for f in factors:
        base, e = (f.base, f.exp) if isinstance(f, Pow) else (f, ONE)
        if isinstance(base, Unknown) and base.name == spec.unknown:
            if not (isinstance(e, Const) and e.value.denominator == 1):
                raise NotPowerProduct(f"exponent {e} is not an integer")
            key = _shift_of(base, spec.var)
            exps[key] = exps.get(key, 0) + int(e.value)
        elif has_unknown(f):
            raise NotPowerProduct(f"factor {f} is not a power of a reference")
        elif is_numeric(f):
            v = as_number(f)
            if not isinstance(v, Fraction):
                raise NotPowerProduct(f"constant {f} is not rational")
            c *= v
        else:
            raise NotPowerProduct(f"factor {f} depends on the index or parameters")
    exps = {k: p for k, p in exps.items() if p != 0}
    if not exps:
        raise NotPowerProduct("no reference to the unknown")
    if c <= 0:
        raise NonPositiveConstant(f"constant factor {c} is not positive")
    return c, exps


def _shift_of(u: Unknown, var: str) -> int:
    d = normalize(sub(sym(var), u.args[0]))
    if not (isinstance(d, Const) and d.value.denominator == 1 and d.value > 0):
        raise NotPowerProduct(f"reference {u} is not a backward shift")
    return int(d.value)


def linearize_nonlinear(spec: RecurrenceSpec, ics=None) -> TransformResult:
    """Logarithmic range transform y = log x of a power-product recurrence."""
    ics = spec.initial_conditions if ics is None else ics
    c, exps = power_product(spec)
    var = spec.var
    order = max(exps)
    given = sorted(k[0] for k in ics if len(k) == 1 and isinstance(k[0], int))
    start = given[0] if given else 0
    conds = {i: as_expr(ics[(i,)]) if (i,) in ics else ic_symbol(spec.unknown, i) for i in range(start, start + order)}
    assumptions = []
    y_ics = {}
    for i, v in conds.items():
        if is_numeric(v):
            val = as_number(v)
            if not isinstance(val, Fraction) or val <= 0:
                raise AssumptionViolated(f"{spec.unknown}({i}) = {v} must be positive for the logarithmic transform")
        else:
            assumptions.append(f"{v} > 0")
        y_ics[(i,)] = normalize(log(v))
    terms = {("y", (s,)): Fraction(p) for s, p in exps.items()}
    y_spec = build_spec("y", (var,), terms, normalize(log(c)), ics=y_ics)

    def back(sol: Expr) -> Expr:
        return exponentiate(sol, var)

    return TransformResult(y_spec, f"{spec.unknown}({var}) = exp(y({var}))", tuple(assumptions), back, start)


def exponentiate(e: Expr, var: str) -> Expr:
    """exp(e) for e a combination of logarithms with exp-poly coefficients."""
    pe = to_param_expoly(normalize(e), var)
    factors = []
    for mono, xp in pe.parts.items():
        if xp.is_zero():
            continue
        base = _log_argument(mono)
        factors.append(pow_(base, xp.to_expr()))
    return normalize(mul(*factors)) if factors else ONE


def _log_argument(mono: Expr) -> Expr:
    if isinstance(mono, Func) and mono.name == "log":
        return mono.args[0]
    raise NotPowerProduct(f"{mono} is not a logarithm; cannot exponentiate")


# ---------------------------------------------------------------------------
# infinite order


def _nonvanishing(g: Expr, var: str, horizon: int = 64):
    """None if g(n) != 0 for every n >= 1 (proved or sampled), else the first zero."""
    try:
        p = poly_from_expr(g, var)
        if p.is_zero():
            return 1
        zs = [int(r) for r in rational_roots(p) if r.denominator == 1 and r >= 1]
        return min(zs) if zs else None
    except (NotPolynomial, RecsolveError):
        pass
    for n in range(1, horizon + 1):
        if eval_exact(g, {var: n}) == 0:
            return n
    return None


def reduce_infinite_order(spec: RecurrenceSpec, ics=None) -> TransformResult:
    """x(n) = f(n) + g(n) * sum_{k<n} x(k)  ->  first-order recurrence for n >= 2."""
    ics = spec.initial_conditions if ics is None else ics
    g = spec.prefix_sum_coeff
    f = spec.forcing
    var = spec.var
    if g is None or spec.terms or spec.nonlinear_terms or len(spec.index_vars) != 1:
        raise NotSupportedShape("expected f(n) + g(n) * sum of all earlier values")
    for part, label in ((f, "f"), (g, "g")):
        try:
            to_param_expoly(part, var)
        except NotExpPoly as exc:
            raise NotSupportedShape(f"{label}(n) = {part} is not an exponential polynomial") from exc
    zero = _nonvanishing(g, var)
    if zero is not None:
        raise CoefficientVanishes(f"g({var}) = {g} vanishes at {var} = {zero}", zero)
    n = sym(var)
    g_prev = substitute(g, {var: sub(n, 1)})
    f_prev = substitute(f, {var: sub(n, 1)})
    a = normalize(add(mul(g, pow_(g_prev, -1)), g))
    b = normalize(sub(f, mul(g, f_prev, pow_(g_prev, -1))))
    x0 = as_expr(ics[(0,)]) if (0,) in ics else normalize(substitute(f, {var: 0}))
    x1 = as_expr(ics[(1,)]) if (1,) in ics else normalize(add(substitute(f, {var: 1}), mul(substitute(g, {var: 1}), x0)))
    reduced = build_spec(spec.unknown, (var,), {(spec.unknown, (1,)): a}, b, ics={(1,): x1})
    assumptions = []
    if not isinstance(g, Const):
        assumptions.append(f"{g} != 0 for {var} >= 1")
    return TransformResult(reduced, f"{spec.unknown}(0) = {x0}; {spec.unknown}({var}) from the reduced form for {var} >= 1", tuple(assumptions), lambda e: e, 1)


def infinite_order_seed(spec: RecurrenceSpec, ics=None) -> Expr:
    ics = spec.initial_conditions if ics is None else ics
    return as_expr(ics[(0,)]) if (0,) in ics else normalize(substitute(spec.forcing, {spec.var: 0}))


# ---------------------------------------------------------------------------
# multivariate


def chain_direction(spec: RecurrenceSpec):
    """Vector d of +-1 entries with every reference key an integer multiple of d."""
    keys = [k for (name, k) in spec.terms if name == spec.unknown]
    keys += [_key_of(t, spec) for t in _nonlinear_refs(spec)]
    if not keys:
        raise NoInvariantCombination("no reference to the unknown")
    d = None
    for k in keys:
        if is_div_key(k):
            raise NoInvariantCombination("divisor references cannot be rewritten")
        s = k[0]
        if s == 0 or any(abs(x) != abs(s) for x in k):
            raise NoInvariantCombination(f"shift {k} does not keep a +-1 combination of the indices fixed")
        cand = tuple(x // s for x in k)
        if d is None:
            d = cand
        elif cand != d:
            raise NoInvariantCombination("references move along different directions")
    return d


def _nonlinear_refs(spec: RecurrenceSpec):
    out = []

    def walk(e):
        if isinstance(e, Unknown) and e.name == spec.unknown:
            out.append(e)
        for c in e.children:
            walk(c)

    for t in spec.nonlinear_terms:
        walk(t)
    return out


def _key_of(u: Unknown, spec: RecurrenceSpec):
    out = []
    for v, a in zip(spec.index_vars, u.args):
        d = normalize(sub(sym(v), a))
        if not (isinstance(d, Const) and d.value.denominator == 1):
            raise NoInvariantCombination(f"argument {a} is not a shift of {v}")
        out.append(int(d.value))
    return tuple(out)


def rewrite_multivariate(spec: RecurrenceSpec, ics=None) -> TransformResult:
    """Follow the chain of references along its direction d.

    The chain variable t is the index fixed by the initial-condition
    pattern; every other index v_i equals v_i0 + d_i * t along the chain,
    with v_i0 = v_i - d_i * t held constant.
    """
    ics = spec.initial_conditions if ics is None else ics
    ivars = spec.index_vars
    if len(ivars) < 2:
        raise NotSupportedShape("already univariate")
    d = chain_direction(spec)
    fixed = set()
    for key in ics:
        ints = [i for i, x in enumerate(key) if isinstance(x, int)]
        if len(ints) != 1:
            raise NotSupportedShape(f"condition pattern {key} must fix exactly one index")
        fixed.add(ints[0])
    if not ics:
        fixed = {0}
    if len(fixed) != 1:
        raise NotSupportedShape("conditions fix different indices; the chain end is ambiguous")
    t_pos = fixed.pop()
    if d[t_pos] < 0:
        d = tuple(-x for x in d)
    tvar = ivars[t_pos]
    for (name, key) in spec.terms:
        if name == spec.unknown and key[t_pos] <= 0:
            raise NoInvariantCombination(f"index {tvar} does not decrease along the chain")
    t = sym(tvar)
    anchors = {v: sym(f"{v}_0") for i, v in enumerate(ivars) if i != t_pos}
    along = {v: add(anchors[v], mul(d[i], t)) for i, v in enumerate(ivars) if i != t_pos}
    along[tvar] = t

    def chain(e: Expr) -> Expr:
        return normalize(substitute(e, along))

    terms = {}
    for (name, key), c in spec.terms.items():
        if name != spec.unknown:
            raise NotSupportedShape("references to other unknowns")
        terms[("y", (key[t_pos],))] = add(terms.get(("y", (key[t_pos],)), ZERO), chain(c))
    forcing = chain(spec.forcing)
    if spec.nonlinear_terms:
        raise NotSupportedShape("non-linear multivariate recurrence")
    y_ics = {}
    for key, val in ics.items():
        env = {key[i]: add(anchors[v], mul(d[i], key[t_pos])) for i, v in enumerate(ivars) if i != t_pos}
        y_ics[(key[t_pos],)] = normalize(substitute(as_expr(val), env))
    y_spec = build_spec("y", (tvar,), terms, forcing, ics=y_ics)
    undo = {f"{v}_0": sub(sym(v), mul(d[i], t)) for i, v in enumerate(ivars) if i != t_pos}

    def back(sol: Expr) -> Expr:
        return substitute(sol, undo)

    inv = "; ".join(f"{v}_0 = {render(e)}" for v, e in ((k[:-2], x) for k, x in undo.items()))
    first = min((k[t_pos] for k in ics), default=0)
    return TransformResult(y_spec, f"{spec.unknown}({', '.join(ivars)}) = y({tvar}) with {inv}", (), back, first)
