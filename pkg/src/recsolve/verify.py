"""Ground truth by brute-force iteration, plus symbolic and numeric checks."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    EvaluationError,
    IrrationalValue,
    MissingInitialCondition,
    NotExpPoly,
    RecsolveError,
    SymbolicBlocked,
    UnboundSymbol,
)
from .expoly import to_param_expoly
from .expr import (
    Add,
    Const,
    Expr,
    Func,
    Mul,
    Pow,
    Symbol,
    Unknown,
    add,
    as_expr,
    eval_exact,
    eval_interval,
    mul,
    normalize,
    rebuild,
    render,
    replace_unknowns,
    sub,
    substitute,
    sym,
)
from .model import RecurrenceSpec, is_div_key
from .numtypes import factorint

SAMPLE_HORIZON = 50
_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def default_bindings(names) -> dict:
    """Deterministic small positive values for free parameters."""
    return {name: Fraction(_PRIMES[i % len(_PRIMES)] + i // len(_PRIMES)) for i, name in enumerate(sorted(names))}


def spec_parameters(spec: RecurrenceSpec, ics=None) -> set:
    names = set(spec.rhs.free_symbols()) - set(spec.index_vars)
    for key, v in (ics if ics is not None else spec.initial_conditions).items():
        names |= as_expr(v).free_symbols() - {x for x in key if isinstance(x, str)}
    return names


# ---------------------------------------------------------------------------
# the oracle


class _Evaluator:
    """Memoized recursive evaluation of a single recurrence."""

    def __init__(self, spec: RecurrenceSpec, ics: dict, bindings=None):
        self.spec = spec
        self.ics = {k if isinstance(k, tuple) else (k,): as_expr(v) for k, v in ics.items()}
        self.bindings = {k: Fraction(v) for k, v in (bindings or {}).items()}
        self.memo: dict = {}
        missing = spec_parameters(spec, self.ics) - set(self.bindings)
        if missing:
            raise SymbolicBlocked(f"symbolic parameters need bindings: {', '.join(sorted(missing))}")
        ints = [k[0] for k in self.ics if len(k) == 1 and isinstance(k[0], int)]
        self.start = min(ints) if ints else None
        if self.start is None and spec.prefix_sum_coeff is not None:
            # the empty sum defines x(0) directly
            self.start = 0

    def _condition(self, idx):
        for key, val in self.ics.items():
            if len(key) != len(idx):
                continue
            env = {}
            ok = True
            for want, got in zip(key, idx):
                if isinstance(want, int):
                    if want != got:
                        ok = False
                        break
                else:
                    env[want] = Fraction(got)
            if ok:
                return eval_exact(val, {**self.bindings, **env})
        return None

    def value(self, idx):
        idx = tuple(idx)
        if idx in self.memo:
            return self.memo[idx]
        v = self._condition(idx)
        if v is None:
            if len(idx) == 1 and self.start is not None and idx[0] < self.start:
                raise MissingInitialCondition(f"{self.spec.unknown}({idx[0]}) is below the first condition")
            if any(i < -10**6 for i in idx):
                raise MissingInitialCondition("recursion left the index range")
            env = dict(self.bindings)
            env.update({name: Fraction(i) for name, i in zip(self.spec.index_vars, idx)})
            try:
                v = eval_exact(self.spec.rhs, env, self._lookup)
            except RecursionError:
                raise MissingInitialCondition(f"no base case reached from {self.spec.unknown}{idx}") from None
        self.memo[idx] = v
        return v

    def _lookup(self, name, args):
        if name != self.spec.unknown:
            raise MissingInitialCondition(f"reference to {name} outside a system")
        if len(args) == 1 and args[0] < 0 and self._condition(args) is None:
            raise MissingInitialCondition(f"{name}({args[0]}) needs an initial condition")
        return self.value(args)


def iterate_oracle(spec: RecurrenceSpec, ics=None, N: int = 20, bindings=None):
    """Exact values of the recurrence by direct application.

    Shift recurrences give the list x_0..x_N (entries below the first
    initial condition are None).  Divide-and-conquer recurrences give the
    values at n0*beta^k for k = 0..N, n0 the smallest base index.
    Multivariate recurrences give a dict over the grid 0 <= i_j <= N.
    """
    ics = spec.initial_conditions if ics is None else ics
    ev = _Evaluator(spec, ics, bindings)
    if len(spec.index_vars) > 1:
        from itertools import product

        return {idx: ev.value(idx) for idx in product(range(N + 1), repeat=len(spec.index_vars))}
    if spec.is_divide_conquer:
        chains = dc_points(spec, ics, None, N)
        n0 = min(chains)
        return [ev.value((n,)) for n in chains[n0]]
    if ev.start is None:
        raise MissingInitialCondition("no initial condition given")
    out = []
    for n in range(N + 1):
        out.append(None if n < ev.start else ev.value((n,)))
    return out


def oracle_at(spec: RecurrenceSpec, ics, points, bindings=None) -> dict:
    """Oracle values at arbitrary index tuples (or ints)."""
    ev = _Evaluator(spec, ics, bindings)
    out = {}
    for p in points:
        idx = p if isinstance(p, tuple) else (p,)
        if len(idx) == 1 and not spec.is_divide_conquer and ev.start is not None:
            for j in range(ev.start, idx[0]):
                ev.value((j,))
        out[p] = ev.value(idx)
    return out


def _reaches(n: int, base: int, beta: Fraction) -> bool:
    q = Fraction(n, base)
    while q > 1:
        q /= beta
    return q == 1


def dc_points(spec: RecurrenceSpec, ics, limit=None, max_k=None) -> dict:
    """Well-defined indices per base: n0 -> [n0, n0*beta, ...] (integers).

    One of ``limit`` (largest n) or ``max_k`` (largest exponent) is required.
    """
    if limit is None and max_k is None:
        raise ValueError("dc_points needs a limit or a maximal exponent")
    beta = Fraction(spec.divisor)
    bases = sorted(k[0] for k in (ics or {}) if len(k) == 1 and isinstance(k[0], int) and k[0] > 0)
    if not bases:
        raise MissingInitialCondition("divide-and-conquer recurrence needs x(n0) for some n0 >= 1")
    chains = {}
    for n0 in bases:
        if any(_reaches(n0, b, beta) for b in bases if b < n0):
            continue
        pts = []
        n = Fraction(n0)
        k = 0
        while n.denominator == 1 and (limit is None or n <= limit) and (max_k is None or k <= max_k):
            pts.append(int(n))
            n *= beta
            k += 1
        chains[n0] = pts
    return chains


def dc_level_sum(alpha, beta, g: Expr, var: str, base_value, n0: int, k: int) -> Fraction:
    """x at n = n0*beta^k from alpha^k*x(n0) + sum_{i<k} alpha^i*g(n/beta^i)."""
    alpha, beta = Fraction(alpha), Fraction(beta)
    n = Fraction(n0) * beta**k
    total = alpha**k * Fraction(base_value)
    for i in range(k):
        total += alpha**i * eval_exact(g, {var: n / beta**i})
    return total


# ---------------------------------------------------------------------------
# factored values for power-product recurrences


class Factored:
    """sign * prod p^e with integer exponents; exact even for huge values."""

    __slots__ = ("sign", "exps")

    def __init__(self, sign, exps):
        self.sign = sign
        self.exps = {p: e for p, e in exps.items() if e != 0}

    @staticmethod
    def of(q) -> "Factored":
        q = Fraction(q)
        if q == 0:
            return Factored(0, {})
        exps = dict(factorint(abs(q.numerator)))
        for p, e in factorint(q.denominator).items():
            exps[p] = exps.get(p, 0) - e
        return Factored(1 if q > 0 else -1, exps)

    def __mul__(self, other):
        exps = dict(self.exps)
        for p, e in other.exps.items():
            exps[p] = exps.get(p, 0) + e
        return Factored(self.sign * other.sign, exps)

    def __pow__(self, k: int):
        if self.sign == 0:
            if k <= 0:
                raise EvaluationError("0 to a non-positive power")
            return self
        return Factored(self.sign**k, {p: e * k for p, e in self.exps.items()})

    def __eq__(self, other):
        return isinstance(other, Factored) and self.sign == other.sign and self.exps == other.exps

    def __repr__(self):
        return f"Factored({self.sign}, {self.exps})"

    def to_fraction(self) -> Fraction:
        out = Fraction(self.sign)
        for p, e in self.exps.items():
            out *= Fraction(p) ** e
        return out


def eval_factored(e: Expr, bindings: dict, unknowns=None) -> Factored:
    """Evaluate a product of powers; exponents are evaluated exactly."""
    if isinstance(e, Const):
        return Factored.of(e.value)
    if isinstance(e, Symbol):
        if e.name not in bindings:
            raise UnboundSymbol(e.name)
        v = bindings[e.name]
        return v if isinstance(v, Factored) else Factored.of(v)
    if isinstance(e, Mul):
        out = Factored(1, {})
        for a in e.args:
            out = out * eval_factored(a, bindings, unknowns)
        return out
    if isinstance(e, Pow):
        plain = {k: v for k, v in bindings.items() if not isinstance(v, Factored)}
        x = eval_exact(e.exp, plain)
        if x.denominator != 1:
            raise IrrationalValue("fractional exponent in a factored product")
        return eval_factored(e.base, bindings, unknowns) ** int(x)
    if isinstance(e, Unknown) and unknowns is not None:
        plain = {k: v for k, v in bindings.items() if not isinstance(v, Factored)}
        args = tuple(int(eval_exact(a, plain)) for a in e.args)
        return unknowns(e.name, args)
    raise EvaluationError(f"not a power product: {render(e)}")


def iterate_oracle_factored(spec: RecurrenceSpec, ics, N: int, bindings=None) -> list:
    """Oracle for x(n) = c * prod x(n-i)^p_i in factored form."""
    bindings = {k: Fraction(v) for k, v in (bindings or {}).items()}
    ics = {k if isinstance(k, tuple) else (k,): as_expr(v) for k, v in ics.items()}
    start = min(k[0] for k in ics)
    vals: dict = {}
    for key, v in ics.items():
        vals[key[0]] = Factored.of(eval_exact(v, bindings))

    def look(name, args):
        if args[0] not in vals:
            raise MissingInitialCondition(f"{name}({args[0]}) unavailable")
        return vals[args[0]]

    out = []
    for n in range(N + 1):
        if n < start:
            out.append(None)
            continue
        if n not in vals:
            vals[n] = eval_factored(spec.rhs, {**bindings, spec.var: Fraction(n)}, look)
        out.append(vals[n])
    return out


# ---------------------------------------------------------------------------
# symbolic checks


def expoly_is_zero(f: Expr, var: str = "n") -> bool:
    """Decide f == 0 for all var when f is an exp-poly (parameters formal).

    Raises NotExpPoly outside that family.
    """
    return to_param_expoly(normalize(as_expr(f)), var).is_zero()


@dataclass(frozen=True)
class Verdict:
    status: str  # "certified" | "refuted" | "unknown"
    witness: object = None
    detail: str = ""

    @property
    def certified(self):
        return self.status == "certified"

    @property
    def refuted(self):
        return self.status == "refuted"

    def __str__(self):
        if self.status == "refuted":
            return f"refuted at {self.witness}"
        return self.status


CERTIFIED = "certified"
REFUTED = "refuted"
UNKNOWN = "unknown"


def _plug(spec: RecurrenceSpec, candidate: Expr) -> Expr:
    """rhs with every reference to the unknown replaced by the candidate."""
    ivars = spec.index_vars

    def rep(u: Unknown):
        if u.name != spec.unknown:
            return u
        return substitute(candidate, dict(zip(ivars, u.args)))

    def fix_sums(e: Expr) -> Expr:
        if isinstance(e, Func) and e.name == "sum":
            body, k, lo, hi = e.args
            if isinstance(body, Unknown) and body.name == spec.unknown:
                return Func("sum", (substitute(candidate, {ivars[0]: k}), k, lo, hi))
        if not e.children:
            return e
        from .expr import rebuild

        return rebuild(e, [fix_sums(c) for c in e.children])

    return replace_unknowns(fix_sums(spec.rhs), rep)


def residual(spec: RecurrenceSpec, candidate: Expr) -> Expr:
    return normalize(sub(as_expr(candidate), _plug(spec, as_expr(candidate))))


def _sample_points(spec: RecurrenceSpec, ics, horizon):
    if len(spec.index_vars) > 1:
        from itertools import product

        r = range(1, 8)
        return [p for p in product(r, repeat=len(spec.index_vars)) if sum(p) <= horizon]
    if spec.is_divide_conquer:
        chains = dc_points(spec, ics or {(1,): 0}, 2**horizon if horizon < 60 else None, 40)
        pts = sorted({n for ch in chains.values() for n in ch[1:]})
        return [(n,) for n in pts]
    start = 0
    ints = [k[0] for k in (ics or {}) if len(k) == 1 and isinstance(k[0], int)]
    if ints:
        start = min(ints)
    first = start + max(spec.order, 1)
    if spec.prefix_sum_coeff is not None:
        first = start + 1
    return [(n,) for n in range(first, horizon + 1)]


def _offset(e: Expr, var: str):
    """c when e == var + c with integer c, else None."""
    d = normalize(sub(e, sym(var)))
    if isinstance(d, Const) and d.value.denominator == 1:
        return int(d.value)
    return None


def _close_sums(e: Expr, var: str) -> Expr:
    """Replace sums over closed-form bodies by their exp-poly or Gosper closed forms."""
    from .summation import gosper_sum, sum_expoly

    if not e.children:
        return e
    e = rebuild(e, [_close_sums(c, var) for c in e.children])
    if not (isinstance(e, Func) and e.name == "sum"):
        return e
    body, k, lo, hi = e.args
    if any(isinstance(x, Unknown) for x in (body,)) or lo.depends_on(var):
        return e
    c = _offset(hi, var)
    if isinstance(lo, Const) and c is not None:
        try:
            return sum_expoly(to_param_expoly(body, k.name), int(lo.value), c, var).to_expr()
        except (NotExpPoly, RecsolveError):
            pass
    try:
        return gosper_sum(body, k.name, lo, hi)
    except RecsolveError:
        return e


def _collect(e: Expr, pred, out: list):
    if pred(e):
        out.append(e)
    for c in e.children:
        _collect(c, pred, out)
    return out


def _opaque(e: Expr, var: str) -> Expr:
    """Hide sums with bound var + c and factorials of var + c behind fresh symbols.

    Sums sharing body and lower bound are aligned on the smallest upper
    bound by peeling top terms; factorials are aligned the same way.  A
    zero result then proves the original identity.
    """
    sums = _collect(e, lambda x: isinstance(x, Func) and x.name == "sum", [])
    groups: dict = {}
    for f in sums:
        body, k, lo, hi = f.args
        c = _offset(hi, var)
        if c is None or lo.depends_on(var):
            continue
        groups.setdefault((body, k, lo), []).append((f, c))
    mapping = {}
    for i, ((body, k, lo), items) in enumerate(sorted(groups.items(), key=lambda kv: kv[0][0].key)):
        base = min(c for _, c in items)
        sigma = sym(f"_sum{i}")
        for f, c in items:
            extra = [substitute(body, {k.name: add(sym(var), t)}) for t in range(base + 1, c + 1)]
            mapping[f] = add(sigma, *extra)
    if mapping:
        e = normalize(_replace_nodes(e, mapping))
    facts = _collect(e, lambda x: isinstance(x, Func) and x.name == "factorial", [])
    offs = {f: _offset(f.args[0], var) for f in facts}
    offs = {f: c for f, c in offs.items() if c is not None}
    if offs:
        base = min(offs.values())
        phi = sym("_fact")
        fmap = {f: mul(phi, *(add(sym(var), t) for t in range(base + 1, c + 1))) for f, c in offs.items()}
        e = normalize(_replace_nodes(e, fmap))
    return e


def _replace_nodes(e: Expr, mapping: dict) -> Expr:
    if e in mapping:
        return mapping[e]
    if not e.children:
        return e
    return rebuild(e, [_replace_nodes(c, mapping) for c in e.children])


def _proves_zero(res: Expr, var: str) -> bool:
    for step in (lambda x: x, lambda x: normalize(_close_sums(x, var)), lambda x: _opaque(x, var)):
        res = step(res)
        if res == 0:
            return True
        try:
            if to_param_expoly(res, var).is_zero():
                return True
        except (NotExpPoly, RecsolveError):
            pass
    return False


def check_solution_symbolic(spec: RecurrenceSpec, candidate, ics=None, horizon: int = SAMPLE_HORIZON) -> Verdict:
    """Certified / Refuted(n) / Unknown for candidate against the recurrence.

    Only the recurrence itself is checked here, not the initial conditions.
    """
    candidate = normalize(as_expr(candidate))
    ics = spec.initial_conditions if ics is None else ics
    res = residual(spec, candidate)
    var = spec.index_vars[0]
    try:
        to_param_expoly(res, var)
        family = True
    except (NotExpPoly, RecsolveError):
        family = False
    proved = _proves_zero(res, var)
    if proved:
        return Verdict(CERTIFIED)
    params = (res.free_symbols() | candidate.free_symbols()) - set(spec.index_vars)
    bind = default_bindings(params)
    for idx in _sample_points(spec, ics, horizon):
        env = dict(bind)
        env.update({v: Fraction(i) for v, i in zip(spec.index_vars, idx)})
        try:
            val = eval_exact(res, env)
        except IrrationalValue:
            iv = eval_interval(res, env, 128)
            if iv.lo > 0 or iv.hi < 0:
                return Verdict(REFUTED, idx[0] if len(idx) == 1 else idx)
            continue
        except EvaluationError:
            continue
        if val != 0:
            return Verdict(REFUTED, idx[0] if len(idx) == 1 else idx, f"residual {val}")
    detail = "exp-poly residual nonzero but no witness found" if family else "sampled, not proved"
    return Verdict(UNKNOWN, None, detail)


# ---------------------------------------------------------------------------
# bounds


@dataclass(frozen=True)
class BoundsReport:
    ok: bool
    checked: int
    first_violation: tuple | None = None  # (n, side, value)
    undecided: tuple = ()

    def __bool__(self):
        return self.ok


def compare_le(a: Expr, b, env: dict, max_prec: int = 2048):
    """Decide a(env) <= b (b a Fraction) exactly; None when undecidable."""
    try:
        return eval_exact(a, env) <= b
    except IrrationalValue:
        pass
    prec = 64
    while prec <= max_prec:
        iv = eval_interval(a, env, prec)
        if iv.hi <= b:
            return True
        if iv.lo > b:
            return False
        prec *= 2
    return None


def compare_ge(a: Expr, b, env: dict, max_prec: int = 2048):
    try:
        return eval_exact(a, env) >= b
    except IrrationalValue:
        pass
    prec = 64
    while prec <= max_prec:
        iv = eval_interval(a, env, prec)
        if iv.lo >= b:
            return True
        if iv.hi < b:
            return False
        prec *= 2
    return None


def check_bounds_numeric(spec: RecurrenceSpec, ics, bounds, N: int, bindings=None) -> BoundsReport:
    """lower <= oracle <= upper at every well-defined n up to the horizon.

    ``bounds`` is a (lower, upper) pair or a Solution of kind bounds.  For
    divide-and-conquer recurrences N is the largest exponent k (points
    n0*beta^k); otherwise it is the largest n.
    """
    if hasattr(bounds, "lower"):
        lower, upper = bounds.lower, bounds.upper
    else:
        lower, upper = bounds
    lower = normalize(as_expr(lower)) if lower is not None else None
    upper = normalize(as_expr(upper)) if upper is not None else None
    ics = spec.initial_conditions if ics is None else ics
    params = set()
    for b in (lower, upper):
        if b is not None:
            params |= b.free_symbols()
    params -= set(spec.index_vars)
    bindings = dict(bindings or {})
    missing = (params | spec_parameters(spec, ics)) - set(bindings)
    if missing:
        raise SymbolicBlocked(f"symbolic parameters need bindings: {', '.join(sorted(missing))}")
    var = spec.var
    if spec.is_divide_conquer:
        chains = dc_points(spec, ics, None, N)
        points = sorted({n for ch in chains.values() for n in ch})
    else:
        vals = iterate_oracle(spec, ics, N, bindings)
        points = [n for n, v in enumerate(vals) if v is not None]
    values = oracle_at(spec, ics, points, bindings)
    undecided = []
    for n in points:
        x = values[n]
        env = {k: Fraction(v) for k, v in bindings.items()}
        env[var] = Fraction(n)
        for side, bound in (("lower", lower), ("upper", upper)):
            if bound is None:
                continue
            ok = compare_le(bound, x, env) if side == "lower" else compare_ge(bound, x, env)
            if ok is None:
                undecided.append((n, side))
            elif not ok:
                return BoundsReport(False, len(points), (n, side, x))
    return BoundsReport(not undecided, len(points), None, tuple(undecided))
