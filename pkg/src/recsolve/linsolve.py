"""Linear recurrences with constant coefficients."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import (
    MissingInitialCondition,
    NotEliminable,
    NotExpPoly,
    NotReducible,
    SingularSystem,
    Unsupported,
)
from .expoly import ExpPoly, ParamExpPoly, to_param_expoly
from .expr import (
    ONE,
    ZERO,
    Expr,
    add,
    as_expr,
    as_number,
    eval_exact,
    is_numeric,
    mul,
    normalize,
    number_to_expr,
    replace_unknowns,
    sub,
    substitute,
    sym,
)
from .linalg import inverse, solve
from .model import RecurrenceSpec, RecurrenceSystem, build_spec, is_div_key
from .numtypes import MixedFieldError, QuadSurd, sqrt_number
from .poly import Poly, rational_roots, squarefree_factors


@dataclass(frozen=True)
class CharDecomposition:
    """poly = prod (t - root)^mult * unresolved, poly monic."""

    poly: Poly
    roots: tuple  # ((root, multiplicity), ...)
    unresolved: Poly | None = None

    @property
    def order(self) -> int:
        return self.poly.degree

    def multiplicity(self, base) -> int:
        for r, m in self.roots:
            if r == base:
                return m
        return 0

    def coefficients(self) -> dict:
        """shift i -> a_i with x(n) = sum a_i x(n - i)."""
        d = self.poly.degree
        return {i: -self.poly.coeff(d - i) for i in range(1, d + 1) if self.poly.coeff(d - i) != 0}

    @property
    def resolved(self) -> bool:
        return self.unresolved is None


def constant_coefficients(spec: RecurrenceSpec) -> dict:
    """shift -> rational coefficient; Unsupported if any is not a constant."""
    out = {}
    for key, c in spec.shift_terms.items():
        if is_div_key(key) or len(key) != 1:
            raise Unsupported("not a univariate shift recurrence")
        v = as_number(c) if is_numeric(c) else None
        if v is None or isinstance(v, QuadSurd):
            raise Unsupported(f"coefficient {c} is not a rational constant")
        if key[0] <= 0:
            raise Unsupported("non-positive shift")
        out[key[0]] = v
    if spec.cross_terms:
        raise Unsupported("references to other unknowns")
    return out


def char_poly(coeffs: dict, var: str = "t") -> Poly:
    d = max(coeffs)
    c = [Fraction(0)] * (d + 1)
    c[d] = Fraction(1)
    for i, a in coeffs.items():
        c[d - i] -= a
    return Poly(c, var)


def char_decompose(spec_or_coeffs) -> CharDecomposition:
    coeffs = spec_or_coeffs if isinstance(spec_or_coeffs, dict) else constant_coefficients(spec_or_coeffs)
    p = char_poly(coeffs)
    roots: dict = {}
    for r in rational_roots(p):
        roots[r] = roots.get(r, 0) + 1
    rest = p
    for r, m in roots.items():
        for _ in range(m):
            rest = rest.exact_div(Poly([-r, 1]))
    unresolved = Poly([1])
    if rest.degree > 0:
        for f, mult in squarefree_factors(rest):
            if f.degree == 2:
                a, b, c = f.coeff(2), f.coeff(1), f.coeff(0)
                disc = b * b - 4 * a * c
                if disc > 0:
                    s = sqrt_number(disc)
                    for sign in (1, -1):
                        root = (-b + sign * s) / (2 * a)
                        roots[root] = roots.get(root, 0) + mult
                    continue
            unresolved = unresolved * f**mult
    ordered = tuple(sorted(roots.items(), key=lambda kv: _root_key(kv[0])))
    return CharDecomposition(p, ordered, unresolved if unresolved.degree > 0 else None)


def _root_key(r):
    from .expoly import base_key

    return base_key(r)


# ---------------------------------------------------------------------------
# particular solutions


def apply_operator(decomp: CharDecomposition, xp: ExpPoly) -> ExpPoly:
    """L[f](n) = f(n) - sum a_i f(n - i)."""
    out = xp
    for i, a in decomp.coefficients().items():
        out = out - xp.shift(-i).scale(a)
    return out


def _particular_one(decomp: CharDecomposition, base, p: Poly, var: str) -> ExpPoly:
    m = decomp.multiplicity(base)
    d = p.degree
    cols = []
    for j in range(d + 1):
        e = ExpPoly(var, {base: Poly([0] * (m + j) + [1], var)})
        img = apply_operator(decomp, e)
        q = img.terms.get(base, Poly((), var))
        if len(img.terms) > (1 if q.coeffs else 0):
            raise ArithmeticError("operator image left the base")
        cols.append(q)
    M = [[cols[j].coeff(i) for j in range(d + 1)] for i in range(d + 1)]
    rhs = [p.coeff(i) for i in range(d + 1)]
    sol = solve(M, rhs)
    return ExpPoly(var, {base: Poly([0] * m + list(sol), var)})


def particular_solution(decomp: CharDecomposition, forcing):
    """Undetermined coefficients with n^m resonance factors."""
    if isinstance(forcing, ParamExpPoly):
        return ParamExpPoly(forcing.var, {m: particular_solution(decomp, xp) for m, xp in forcing.parts.items()})
    out = ExpPoly(forcing.var)
    for base, p in forcing.items():
        out = out + _particular_one(decomp, base, p, forcing.var)
    return out


def homogeneous_basis(decomp: CharDecomposition, var: str = "n") -> list:
    basis = []
    for r, m in decomp.roots:
        for j in range(m):
            basis.append(ExpPoly(var, {r: Poly([0] * j + [1], var)}))
    return basis


# ---------------------------------------------------------------------------
# initial conditions


def ic_symbol(name: str, i: int) -> Expr:
    return sym(f"{name}{i}" if i >= 0 else f"{name}_m{-i}")


def condition_indices(ics: dict, order: int, name: str):
    """(indices to fit, completed conditions, first index of validity).

    Missing conditions inside the fitting window become symbols such as x0.
    """
    given = {k[0]: as_expr(v) for k, v in ics.items() if len(k) == 1 and isinstance(k[0], int)}
    k0 = min(given) if given else 0
    top = max(given) if given else order - 1
    first = max(top - order + 1, k0)
    window = list(range(first, first + order))
    conds = dict(given)
    for i in window:
        if i not in conds:
            conds[i] = ic_symbol(name, i)
    return window, conds, k0


def apply_initial_conditions(basis: list, particular: ParamExpPoly, conds: dict, window: list) -> ParamExpPoly:
    """particular + sum c_j basis_j matching conds at the window indices."""
    var = particular.var
    if not basis:
        return particular
    M = [[b(i) for b in basis] for i in window]
    try:
        Minv = inverse(M)
    except MixedFieldError as exc:
        raise Unsupported(f"characteristic roots in different quadratic fields: {exc}") from exc
    rhs = [normalize(sub(conds[i], particular.coefficient_at(i))) for i in window]
    out = particular
    for j, b in enumerate(basis):
        cj = normalize(add(*(mul(number_to_expr(Minv[j][i]), rhs[i]) for i in range(len(window)))))
        if cj == ZERO:
            continue
        out = out + to_param_expoly(cj, var).times_expoly(b)
    return out


@dataclass(frozen=True)
class LinearResult:
    solution: ParamExpPoly
    start: int  # first index where the closed form is valid
    decomposition: CharDecomposition
    conditions: dict

    def to_expr(self) -> Expr:
        return self.solution.to_expr()


def solve_constant(spec: RecurrenceSpec, ics=None) -> LinearResult:
    """Closed form of a linear constant-coefficient recurrence.

    Raises Unsupported when the characteristic polynomial has roots that
    are neither rational nor real quadratic, NotExpPoly for other forcings.
    """
    ics = spec.initial_conditions if ics is None else ics
    var = spec.var
    coeffs = constant_coefficients(spec)
    if not coeffs:
        raise Unsupported("no reference to the unknown")
    decomp = char_decompose(coeffs)
    if not decomp.resolved:
        raise Unsupported(f"characteristic factor {decomp.unresolved} has no rational or real quadratic roots")
    forcing = to_param_expoly(spec.forcing, var)
    for m in forcing.params():
        if m.depends_on(var):
            raise NotExpPoly("forcing depends on the index outside exp-poly terms")
    try:
        part = particular_solution(decomp, forcing)
    except MixedFieldError as exc:
        raise Unsupported(str(exc)) from exc
    basis = homogeneous_basis(decomp, var)
    window, conds, k0 = condition_indices(ics, decomp.order, spec.unknown)
    sol = apply_initial_conditions(basis, part, conds, window)
    start = window[0]
    # conditions before the window: still valid if they agree with the formula
    early = sorted(i for i in conds if i < start)
    if early and all(normalize(sub(sol.coefficient_at(i), conds[i])) == ZERO for i in early):
        start = early[0]
    return LinearResult(sol, start, decomp, conds)


# ---------------------------------------------------------------------------
# order reduction


def shift_gcd(spec: RecurrenceSpec) -> int:
    g = 0
    for key in spec.shift_terms:
        if is_div_key(key) or len(key) != 1:
            raise NotReducible("not a univariate shift recurrence")
        g = gcd(g, key[0])
    return g


def _fresh_var(spec: RecurrenceSpec) -> str:
    used = spec.rhs.free_symbols() | set(spec.index_vars)
    for cand in ("m", "j", "i", "l"):
        if cand not in used:
            return cand
    return spec.var + "_"


def order_reduce(spec: RecurrenceSpec, ics=None) -> list:
    """[(sub_spec, r)] with y_r(m) = x(g*m + r); each sub_spec carries its conditions."""
    ics = spec.initial_conditions if ics is None else ics
    g = shift_gcd(spec)
    if g <= 1:
        raise NotReducible("shifts have gcd 1")
    mv = _fresh_var(spec)
    out = []
    for r in range(g):
        terms = {(spec.unknown, (k[0] // g,)): c for k, c in spec.shift_terms.items()}
        terms = {k: normalize(substitute(c, {spec.var: add(mul(g, sym(mv)), r)})) for k, c in terms.items()}
        forcing = normalize(substitute(spec.forcing, {spec.var: add(mul(g, sym(mv)), r)}))
        sub_ics = {}
        for key, v in ics.items():
            i = key[0]
            if (i - r) % g == 0:
                sub_ics[((i - r) // g,)] = v
        out.append((build_spec(spec.unknown, (mv,), terms, forcing, ics=sub_ics), r))
    return out


@dataclass(frozen=True)
class ReducedResult:
    modulus: int
    pieces: tuple  # ((r, expr in sub_var), ...): x(g*sub_var + r) = expr
    sub_var: str
    combined: Expr | None  # single closed form in the original index, when one exists
    start: int

    def piece_at(self, n: int) -> Expr:
        r = n % self.modulus
        expr = dict(self.pieces)[r]
        return substitute(expr, {self.sub_var: (n - r) // self.modulus})


def solve_by_reduction(spec: RecurrenceSpec, ics=None) -> ReducedResult:
    ics = spec.initial_conditions if ics is None else ics
    subs = order_reduce(spec, ics)
    g = len(subs)
    var = spec.var
    pieces = []
    start = None
    for sub_spec, r in subs:
        sub_ics = dict(sub_spec.initial_conditions)
        if not sub_ics:
            # name the missing conditions after the original indices
            d = max(k[0] for k in sub_spec.shift_terms)
            sub_ics = {(j,): ic_symbol(spec.unknown, g * j + r) for j in range(d)}
        res = solve_constant(sub_spec, sub_ics)
        mv = sub_spec.var
        pieces.append((r, res.to_expr()))
        s = g * res.start + r
        start = s if start is None else min(start, s)
    combined = None
    if g == 2:
        sel = {0: mul(Fraction(1, 2), add(1, pow_neg_one(var))), 1: mul(Fraction(1, 2), sub(1, pow_neg_one(var)))}
        back = {r: normalize(substitute(p, {mv: mul(Fraction(1, g), sub(sym(var), r))})) for r, p in pieces}
        expr = normalize(add(*(mul(sel[r], p) for r, p in back.items())))
        try:
            combined = to_param_expoly(expr, var).to_expr()
        except NotExpPoly:
            combined = None
    return ReducedResult(g, tuple(pieces), mv, combined, start or 0)


def pow_neg_one(var: str) -> Expr:
    from .expr import pow_

    return pow_(-1, sym(var))


# ---------------------------------------------------------------------------
# systems


def _operator_matrix(system: RecurrenceSystem):
    names = system.unknowns
    idx = {n: i for i, n in enumerate(names)}
    size = len(names)
    M = [[Poly([1 if i == j else 0], "S") for j in range(size)] for i in range(size)]
    for i, eq in enumerate(system.equations):
        if not eq.is_linear or eq.prefix_sum_coeff is not None:
            raise NotEliminable(f"equation for {eq.unknown} is not linear of finite order")
        for (name, key), c in eq.terms.items():
            if is_div_key(key) or len(key) != 1 or key[0] < 0:
                raise NotEliminable("only backward shifts can be eliminated")
            v = as_number(c) if is_numeric(c) else None
            if v is None or isinstance(v, QuadSurd):
                raise NotEliminable(f"coefficient {c} is not a rational constant")
            if name not in idx:
                raise NotEliminable(f"{name} is not defined by the system")
            M[i][idx[name]] = M[i][idx[name]] - Poly([0] * key[0] + [v], "S")
    return M


def _det(M):
    n = len(M)
    if n == 1:
        return M[0][0]
    total = Poly((), "S")
    for j in range(n):
        if M[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * _det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def _cofactor(M, i, j):
    minor = [row[:j] + row[j + 1:] for k, row in enumerate(M) if k != i]
    d = _det(minor) if minor else Poly([1], "S")
    return d if (i + j) % 2 == 0 else -d


def _apply_shift_poly(p: Poly, f: Expr, var: str) -> Expr:
    return add(*(mul(number_to_expr(c), substitute(f, {var: sub(sym(var), k)})) for k, c in enumerate(p.coeffs) if c != 0))


def _co_iterate(system: RecurrenceSystem, conds: dict, upto: int, bindings=None) -> dict:
    """Values of every unknown at 0..upto as expressions (exact, symbolic ok)."""
    var = system.var
    vals = {name: {} for name in system.unknowns}
    for name, c in conds.items():
        for key, v in c.items():
            vals[name][key[0]] = as_expr(v)
    busy = set()

    def value(name, n):
        if n in vals[name]:
            return vals[name][n]
        if n < 0 or (name, n) in busy:
            raise MissingInitialCondition(f"{name}({n}) is not determined by the system and its conditions")
        busy.add((name, n))
        eq = system.equation(name)

        def rep(u):
            k = eval_exact(u.args[0], {var: n})
            return value(u.name, int(k))

        v = normalize(replace_unknowns(substitute(eq.rhs, {var: n}), rep))
        busy.discard((name, n))
        vals[name][n] = v
        return v

    for n in range(upto + 1):
        for name in system.unknowns:
            value(name, n)
    return vals


def default_system_conditions(system: RecurrenceSystem) -> dict:
    """Symbols name0, name1, ... below the largest shift of each unknown."""
    depth = {name: 0 for name in system.unknowns}
    for eq in system.equations:
        for (name, key), _ in eq.terms.items():
            if not is_div_key(key):
                depth[name] = max(depth[name], key[0])
    return {name: {(i,): ic_symbol(name, i) for i in range(d)} for name, d in depth.items()}


def eliminate_system(system: RecurrenceSystem, target: str | None = None, conds=None, horizon: int = 40):
    """Single recurrence for ``target`` by operator-determinant elimination.

    Writing the system as M(S) X = F with S the backward shift, the target
    satisfies det M(S) x = sum_j adj(M)[t][j] f_j.  Conditions for the
    derived recurrence come from co-iterating the system.
    """
    target = target or system.unknowns[0]
    var = system.var
    names = system.unknowns
    t = names.index(target)
    M = _operator_matrix(system)
    D = _det(M)
    if D.is_zero() or D.coeff(0) == 0:
        raise NotEliminable("operator determinant has no constant term")
    d0 = D.coeff(0)
    terms = {(target, (k,)): -c / d0 for k, c in enumerate(D.coeffs) if k > 0 and c != 0}
    rhs_parts = []
    for j, eq in enumerate(system.equations):
        a = _cofactor(M, j, t)
        if not a.is_zero() and eq.forcing != ZERO:
            rhs_parts.append(_apply_shift_poly(a.scale(1 / d0), eq.forcing, var))
    forcing = normalize(add(*rhs_parts))
    conds = {**default_system_conditions(system), **(conds or {})}
    order = D.degree
    first = max((k[0] for k in conds.get(target, {})), default=-1) + 1
    vals = _co_iterate(system, conds, horizon)
    derived = build_spec(target, (var,), terms, forcing)
    # grow the seed window until the derived recurrence reproduces the system
    for extra in range(0, horizon - order):
        n_seed = max(order, first) + extra
        seeds = {(i,): vals[target][i] for i in range(n_seed)}
        if _reproduces(derived, seeds, vals[target], horizon):
            return derived.with_initial_conditions(seeds)
    raise NotEliminable("derived recurrence does not reproduce the system")


def _reproduces(spec: RecurrenceSpec, seeds: dict, values: dict, horizon: int) -> bool:
    from .verify import default_bindings, iterate_oracle

    params = set()
    for v in list(seeds.values()) + list(values.values()):
        params |= v.free_symbols()
    params |= spec.rhs.free_symbols() - {spec.var}
    bind = default_bindings(params)
    got = iterate_oracle(spec, seeds, horizon, bind)
    for n in range(horizon + 1):
        if got[n] != eval_exact(values[n], bind):
            return False
    return True
