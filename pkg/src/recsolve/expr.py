"""Immutable symbolic expressions over exact rationals.

Nodes are built through the smart constructors :func:`add`, :func:`mul`,
:func:`pow_`, :func:`func` and :func:`unknown`, which flatten nested sums and
products, collect like terms and sort children by a fixed total order.
:func:`normalize` applies the heavier rewrite rules (distribution, exponent
laws for numeric bases, logarithms of literals, factorial ratios) and is
canonical on exponential polynomials.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product as iproduct

from .errors import (
    DomainError,
    EvaluationError,
    IrrationalValue,
    NonIntegerExponent,
    UnboundSymbol,
)
from .numtypes import (
    Interval,
    MixedFieldError,
    QuadSurd,
    factorint,
    log_interval,
    power_interval,
    rational_root,
    sqrt_number,
    squarefree_decompose,
)

FUNC_NAMES = frozenset({"log", "factorial", "binomial", "sum", "prod"})

_CONST, _SYMBOL, _FUNC, _UNKNOWN, _POW, _MUL, _ADD = range(7)


class Expr:
    __slots__ = ("_key", "_hash", "_free")

    rank = -1

    def key(self):
        k = getattr(self, "_key", None)
        if k is None:
            k = self._make_key()
            object.__setattr__(self, "_key", k)
        return k

    def _make_key(self):
        raise NotImplementedError

    def __setattr__(self, name, value):
        raise AttributeError("Expr is immutable")

    def __hash__(self):
        h = getattr(self, "_hash", None)
        if h is None:
            h = hash(self.key())
            object.__setattr__(self, "_hash", h)
        return h

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            if isinstance(other, (int, Fraction)):
                return isinstance(self, Const) and self.value == other
            return NotImplemented
        return self.rank == other.rank and hash(self) == hash(other) and self.key() == other.key()

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __lt__(self, other):
        return self.key() < other.key()

    @property
    def children(self) -> tuple:
        return ()

    def free_symbols(self) -> frozenset:
        f = getattr(self, "_free", None)
        if f is None:
            f = self._make_free()
            object.__setattr__(self, "_free", f)
        return f

    def _make_free(self):
        out = set()
        for c in self.children:
            out |= c.free_symbols()
        return frozenset(out)

    def depends_on(self, var: str) -> bool:
        return var in self.free_symbols()

    # arithmetic sugar
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, pow_(as_expr(other), MINUS_ONE))

    def __rtruediv__(self, other):
        return mul(as_expr(other), pow_(self, MINUS_ONE))

    def __pow__(self, other):
        return pow_(self, as_expr(other))

    def __neg__(self):
        return neg(self)

    def __repr__(self):
        return f"Expr({render(self)!r})"

    def __str__(self):
        return render(self)


def _init(obj, **fields):
    for k, v in fields.items():
        object.__setattr__(obj, k, v)


class Const(Expr):
    __slots__ = ("value",)
    rank = _CONST

    def __init__(self, value):
        _init(self, value=Fraction(value))

    def _make_key(self):
        return (_CONST, self.value)

    def _make_free(self):
        return frozenset()


class Symbol(Expr):
    __slots__ = ("name",)
    rank = _SYMBOL

    def __init__(self, name: str):
        _init(self, name=name)

    def _make_key(self):
        return (_SYMBOL, self.name)

    def _make_free(self):
        return frozenset((self.name,))


class Func(Expr):
    """log, factorial, binomial, sum(body, k, lo, hi), prod(body, k, lo, hi)."""

    __slots__ = ("name", "args")
    rank = _FUNC

    def __init__(self, name: str, args: tuple):
        _init(self, name=name, args=tuple(args))

    @property
    def children(self):
        return self.args

    def _make_key(self):
        return (_FUNC, self.name, tuple(a.key() for a in self.args))

    def _make_free(self):
        if self.name in ("sum", "prod"):
            body, k, lo, hi = self.args
            return (body.free_symbols() - {k.name}) | lo.free_symbols() | hi.free_symbols()
        return Expr._make_free(self)


class Unknown(Expr):
    """Reference to the unknown sequence, e.g. ``x(n - 1)``."""

    __slots__ = ("name", "args")
    rank = _UNKNOWN

    def __init__(self, name: str, args: tuple):
        _init(self, name=name, args=tuple(args))

    @property
    def children(self):
        return self.args

    def _make_key(self):
        return (_UNKNOWN, self.name, tuple(a.key() for a in self.args))


class Pow(Expr):
    __slots__ = ("base", "exp")
    rank = _POW

    def __init__(self, base: Expr, exp: Expr):
        _init(self, base=base, exp=exp)

    @property
    def children(self):
        return (self.base, self.exp)

    def _make_key(self):
        return (_POW, self.base.key(), self.exp.key())


class Mul(Expr):
    __slots__ = ("args",)
    rank = _MUL

    def __init__(self, args: tuple):
        _init(self, args=tuple(args))

    @property
    def children(self):
        return self.args

    def _make_key(self):
        return (_MUL, tuple(a.key() for a in self.args))


class Add(Expr):
    __slots__ = ("args",)
    rank = _ADD

    def __init__(self, args: tuple):
        _init(self, args=tuple(args))

    @property
    def children(self):
        return self.args

    def _make_key(self):
        return (_ADD, tuple(a.key() for a in self.args))


ZERO = Const(0)
ONE = Const(1)
MINUS_ONE = Const(-1)
HALF = Const(Fraction(1, 2))


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Const(x)
    if isinstance(x, QuadSurd):
        return number_to_expr(x)
    if isinstance(x, str):
        return Symbol(x)
    raise TypeError(f"cannot convert {x!r} to Expr")


def sym(name: str) -> Symbol:
    return Symbol(name)


def const(v) -> Const:
    return Const(v)


# ---------------------------------------------------------------------------
# smart constructors


def _sorted(args):
    return tuple(sorted(args, key=Expr.key))


def split_coeff(e: Expr) -> tuple[Fraction, Expr]:
    """``e == c * rest`` with rational c and rest free of a constant factor."""
    if isinstance(e, Const):
        return e.value, ONE
    if isinstance(e, Mul) and isinstance(e.args[0], Const):
        rest = e.args[1:]
        return e.args[0].value, rest[0] if len(rest) == 1 else Mul(rest)
    return Fraction(1), e


def _make_term(c: Fraction, rest: Expr) -> Expr:
    if rest == ONE:
        return Const(c)
    if c == 1:
        return rest
    if isinstance(rest, Mul):
        return Mul((Const(c),) + rest.args)
    return Mul((Const(c), rest))


def add(*args) -> Expr:
    coeffs: dict[Expr, Fraction] = {}
    constant = Fraction(0)
    stack = list(args)
    while stack:
        a = as_expr(stack.pop())
        if isinstance(a, Add):
            stack.extend(a.args)
        elif isinstance(a, Const):
            constant += a.value
        else:
            c, rest = split_coeff(a)
            coeffs[rest] = coeffs.get(rest, 0) + c
    terms = [_make_term(c, r) for r, c in coeffs.items() if c != 0]
    if constant != 0:
        terms.append(Const(constant))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Add(_sorted(terms))


def neg(e: Expr) -> Expr:
    return mul(MINUS_ONE, e)


def sub(a, b) -> Expr:
    return add(a, neg(as_expr(b)))


def mul(*args) -> Expr:
    coeff = Fraction(1)
    groups: dict[Expr, list] = {}
    stack = list(args)
    while stack:
        a = as_expr(stack.pop())
        if isinstance(a, Mul):
            stack.extend(a.args)
        elif isinstance(a, Const):
            coeff *= a.value
        elif isinstance(a, Pow):
            groups.setdefault(a.base, []).append(a.exp)
        else:
            groups.setdefault(a, []).append(ONE)
    if coeff == 0:
        return ZERO
    factors = []
    redo = []
    for base, exps in groups.items():
        e = exps[0] if len(exps) == 1 else add(*exps)
        p = pow_(base, e) if not (len(exps) == 1 and e == ONE) else base
        if isinstance(p, Const):
            coeff *= p.value
        elif isinstance(p, Mul):
            redo.append(p)
        else:
            factors.append(p)
    if redo:
        return mul(Const(coeff), *factors, *redo)
    if coeff == 0:
        return ZERO
    if not factors:
        return Const(coeff)
    factors = _sorted(factors)
    if coeff == 1:
        return factors[0] if len(factors) == 1 else Mul(factors)
    return Mul((Const(coeff),) + factors)


def _raw_mul(coeff, factors) -> Expr:
    """Build a product without regrouping equal bases."""
    coeff = Fraction(coeff)
    if coeff == 0:
        return ZERO
    fs = []
    for f in factors:
        if isinstance(f, Const):
            coeff *= f.value
        elif isinstance(f, Mul):
            c, rest = split_coeff(f)
            coeff *= c
            fs.extend(rest.args if isinstance(rest, Mul) else [rest])
        elif f != ONE:
            fs.append(f)
    if coeff == 0:
        return ZERO
    if not fs:
        return Const(coeff)
    fs = _sorted(fs)
    if coeff == 1:
        return fs[0] if len(fs) == 1 else Mul(fs)
    return Mul((Const(coeff),) + fs)


def _surd_parts(q: Fraction):
    """sqrt(q) = s * sqrt(d) with d squarefree integer (q > 0)."""
    s, d = squarefree_decompose(q.numerator * q.denominator)
    return Fraction(s, q.denominator), d


def pow_(base, exp) -> Expr:
    base, exp = as_expr(base), as_expr(exp)
    if isinstance(exp, Const):
        v = exp.value
        if v == 0:
            return ONE
        if v == 1:
            return base
        if isinstance(base, Const):
            return _const_pow(base.value, v)
        if isinstance(base, Pow) and (v.denominator == 1 or _positive_const(base.base)):
            return pow_(base.base, mul(base.exp, exp))
        if isinstance(base, Mul):
            if v.denominator == 1:
                return mul(*(pow_(f, exp) for f in base.args))
            c, rest = split_coeff(base)
            if c > 0 and c != 1:
                return mul(pow_(Const(c), exp), pow_(rest, exp))
        return Pow(base, exp)
    if base == ONE:
        return ONE
    if isinstance(base, Pow) and _positive_const(base.base):
        return pow_(base.base, mul(base.exp, exp))
    if isinstance(base, Mul):
        c, rest = split_coeff(base)
        if c > 0 and c != 1:
            return mul(pow_(Const(c), exp), pow_(rest, exp))
    return Pow(base, exp)


def _positive_const(e: Expr) -> bool:
    return isinstance(e, Const) and e.value > 0


def _const_pow(b: Fraction, v: Fraction) -> Expr:
    if v.denominator == 1:
        if b == 0 and v < 0:
            raise DomainError("division by zero")
        return Const(b ** int(v))
    if b == 0:
        return ZERO
    if b == 1:
        return ONE
    if b < 0:
        return Pow(Const(b), Const(v))
    fl = math.floor(v)
    fr = v - fl
    root = rational_root(b, fr.denominator)
    if root is not None:
        return Const(b**fl * root**fr.numerator)
    if fr.denominator == 2:
        s, d = _surd_parts(b)
        return _raw_mul(b**fl * s, [Pow(Const(d), HALF)])
    lead = b**fl
    tail = Pow(Const(b), Const(fr))
    return tail if lead == 1 else _raw_mul(lead, [tail])


def func(name: str, *args) -> Expr:
    if name not in FUNC_NAMES:
        raise ValueError(f"unknown function {name}")
    return Func(name, tuple(as_expr(a) for a in args))


def log(e) -> Expr:
    return func("log", e)


def factorial(e) -> Expr:
    return func("factorial", e)


def unknown(name: str, *args) -> Unknown:
    return Unknown(name, tuple(as_expr(a) for a in args))


# ---------------------------------------------------------------------------
# traversal helpers


def rebuild(e: Expr, children) -> Expr:
    if isinstance(e, Add):
        return add(*children)
    if isinstance(e, Mul):
        return mul(*children)
    if isinstance(e, Pow):
        return pow_(*children)
    if isinstance(e, Func):
        return Func(e.name, tuple(children))
    if isinstance(e, Unknown):
        return Unknown(e.name, tuple(children))
    return e


def substitute(e: Expr, mapping: dict) -> Expr:
    """Replace free symbols (by name) with expressions."""
    mapping = {k: as_expr(v) for k, v in mapping.items()}
    if not mapping:
        return e

    def go(x: Expr, m) -> Expr:
        if isinstance(x, Symbol):
            return m.get(x.name, x)
        if not (x.free_symbols() & m.keys()):
            return x
        if isinstance(x, Func) and x.name in ("sum", "prod"):
            body, k, lo, hi = x.args
            inner = {a: b for a, b in m.items() if a != k.name}
            return Func(x.name, (go(body, inner), k, go(lo, m), go(hi, m)))
        return rebuild(x, [go(c, m) for c in x.children])

    return go(e, mapping)


def replace_unknowns(e: Expr, fn) -> Expr:
    """Replace every Unknown node u by ``fn(u)`` (children first)."""
    if isinstance(e, Unknown):
        return fn(Unknown(e.name, tuple(replace_unknowns(a, fn) for a in e.args)))
    if not e.children:
        return e
    if not has_unknown(e):
        return e
    return rebuild(e, [replace_unknowns(c, fn) for c in e.children])


def has_unknown(e: Expr, name: str | None = None) -> bool:
    if isinstance(e, Unknown):
        return name is None or e.name == name or any(has_unknown(a, name) for a in e.args)
    return any(has_unknown(c, name) for c in e.children)


def unknowns_in(e: Expr) -> list:
    out = []

    def go(x):
        if isinstance(x, Unknown):
            out.append(x)
        for c in x.children:
            go(c)

    go(e)
    return out


def has_func(e: Expr, names=None) -> bool:
    if isinstance(e, Func) and (names is None or e.name in names):
        return True
    return any(has_func(c, names) for c in e.children)


def is_numeric(e: Expr) -> bool:
    """True when e contains no symbols, functions or unknowns."""
    if isinstance(e, Const):
        return True
    if isinstance(e, (Symbol, Func, Unknown)):
        return False
    return all(is_numeric(c) for c in e.children)


# ---------------------------------------------------------------------------
# numbers <-> expressions


def as_number(e: Expr):
    """Value of a numeric expression in Q or a real quadratic field, else None."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, (Symbol, Func, Unknown)):
        return None
    try:
        if isinstance(e, Add):
            total = Fraction(0)
            for a in e.args:
                v = as_number(a)
                if v is None:
                    return None
                total = total + v
            return total
        if isinstance(e, Mul):
            total = Fraction(1)
            for a in e.args:
                v = as_number(a)
                if v is None:
                    return None
                total = total * v
            return total
        if isinstance(e, Pow):
            if not isinstance(e.exp, Const):
                return None
            b = as_number(e.base)
            if b is None:
                return None
            v = e.exp.value
            if v.denominator == 1:
                if b == 0 and v < 0:
                    return None
                return b ** int(v)
            if v.denominator == 2 and isinstance(b, Fraction) and b > 0:
                r = sqrt_number(b)
                return r ** v.numerator
            return None
    except (MixedFieldError, ZeroDivisionError):
        return None
    return None


def number_to_expr(x) -> Expr:
    if isinstance(x, QuadSurd):
        return add(Const(x.a), _raw_mul(x.b, [Pow(Const(x.d), HALF)]))
    return Const(x)


# ---------------------------------------------------------------------------
# normalization


def normalize(e: Expr) -> Expr:
    """Canonical simplification; idempotent."""
    e = as_expr(e)
    for _ in range(12):
        n = _norm(e)
        if n == e:
            return n
        e = n
    return e


_EXPAND_LIMIT = 24


def _norm(e: Expr) -> Expr:
    if isinstance(e, (Const, Symbol)):
        return e
    if is_numeric(e):
        v = as_number(e)
        if v is not None:
            return number_to_expr(v)
    if isinstance(e, Add):
        return add(*(_norm(a) for a in e.args))
    if isinstance(e, Mul):
        return _norm_mul([_norm(a) for a in e.args])
    if isinstance(e, Pow):
        return _norm_pow(_norm(e.base), _norm(e.exp))
    if isinstance(e, Func):
        return _norm_func(e.name, [_norm(a) for a in e.args])
    if isinstance(e, Unknown):
        return Unknown(e.name, tuple(_norm(a) for a in e.args))
    return e


def _norm_pow(b: Expr, x: Expr) -> Expr:
    if isinstance(b, Const) and b.value > 0 and not isinstance(x, Const):
        special = _log_ratio_power(b.value, x)
        if special is not None:
            return special
    p = pow_(b, x)
    if isinstance(p, Pow) and isinstance(p.exp, Const):
        v = p.exp.value
        if v.denominator == 1 and 1 < v <= _EXPAND_LIMIT and isinstance(p.base, Add):
            out = p.base
            for _ in range(int(v) - 1):
                out = _expand_product([out, p.base])
            return out
    if isinstance(p, Mul):
        return _norm_mul(list(p.args))
    if isinstance(p, Pow):
        return _literal_step(Fraction(1), [p])
    return p


def _log_ratio_power(b: Fraction, x: Expr):
    """``b**(r*log(a)/log(p)) -> a**(j*r)`` when ``b == p**j``."""
    if not isinstance(x, Mul):
        return None
    for i, f in enumerate(x.args):
        if (
            isinstance(f, Pow)
            and f.exp == MINUS_ONE
            and isinstance(f.base, Func)
            and f.base.name == "log"
            and isinstance(f.base.args[0], Const)
        ):
            p = f.base.args[0].value
            if p.denominator != 1 or p <= 1:
                continue
            j = _int_log(b, p)
            if j is None:
                continue
            rest = normalize(mul(*(x.args[:i] + x.args[i + 1 :])))
            lin = _prime_log_combination(rest)
            if lin is None:
                continue
            out = Fraction(1)
            pieces = []
            for q, c in lin.items():
                c = c * j
                if c.denominator == 1:
                    out *= Fraction(q) ** int(c)
                else:
                    pieces.append(pow_(Const(q), Const(c)))
            return mul(Const(out), *pieces)
    return None


def _int_log(b: Fraction, p: Fraction):
    return 0 if b == 1 else _exact_log(b, p)


def _prime_log_combination(e: Expr):
    """e as sum of c*log(q) with rational c and literal q, else None."""
    out: dict = {}
    terms = e.args if isinstance(e, Add) else (e,)
    for t in terms:
        c, rest = split_coeff(t)
        if not (isinstance(rest, Func) and rest.name == "log" and isinstance(rest.args[0], Const)):
            return None
        q = rest.args[0].value
        out[q] = out.get(q, 0) + c
    return out


def _norm_func(name: str, args: list) -> Expr:
    if name == "log":
        a = args[0]
        if isinstance(a, Const):
            q = a.value
            if q <= 0:
                return Func("log", (a,))
            if q == 1:
                return ZERO
            fac = factorint(q.numerator)
            for pr, ex in factorint(q.denominator).items():
                fac[pr] = fac.get(pr, 0) - ex
            if len(fac) == 1 and list(fac.values())[0] == 1:
                return Func("log", (a,))
            return add(*(mul(Const(ex), Func("log", (Const(pr),))) for pr, ex in sorted(fac.items())))
        if isinstance(a, Mul):
            c, rest = split_coeff(a)
            if c > 0 and c != 1:
                return add(_norm_func("log", [Const(c)]), _norm_func("log", [rest]))
        if isinstance(a, Pow) and isinstance(a.exp, Const):
            return mul(a.exp, _norm_func("log", [a.base]))
        return Func("log", (a,))
    if name == "factorial":
        a = args[0]
        if isinstance(a, Const) and a.value.denominator == 1 and a.value >= 0:
            return Const(math.factorial(int(a.value)))
        return Func("factorial", (a,))
    if name == "binomial":
        top, k = args
        if isinstance(k, Const) and k.value.denominator == 1:
            kk = int(k.value)
            if kk < 0:
                return ZERO
            if kk > _EXPAND_LIMIT:
                return Func("binomial", (top, k))
            terms = [add(top, Const(-i)) for i in range(kk)]
            return _norm_mul([Const(Fraction(1, math.factorial(kk)))] + terms)
        return Func("binomial", (top, k))
    if name in ("sum", "prod"):
        body, k, lo, hi = args
        if isinstance(lo, Const) and isinstance(hi, Const):
            if hi.value < lo.value:
                return ZERO if name == "sum" else ONE
            if hi.value - lo.value <= _EXPAND_LIMIT and lo.value.denominator == 1:
                items = [substitute(body, {k.name: Const(i)}) for i in range(int(lo.value), int(hi.value) + 1)]
                return normalize(add(*items) if name == "sum" else mul(*items))
        return Func(name, (body, k, lo, hi))
    return Func(name, tuple(args))


def _norm_mul(factors: list) -> Expr:
    m = mul(*factors)
    if not isinstance(m, Mul):
        if isinstance(m, Pow):
            return _norm_pow(m.base, m.exp) if _needs_pow_norm(m) else _literal_step(Fraction(1), [m])
        return m
    fs = list(m.args)
    fs = _factorial_ratios(fs)
    if any(isinstance(f, Add) or _is_expandable_pow(f) for f in fs):
        return _expand_product(fs)
    c, rest = split_coeff(mul(*fs))
    rest_f = list(rest.args) if isinstance(rest, Mul) else ([] if rest == ONE else [rest])
    return _literal_step(c, rest_f)


def _needs_pow_norm(p: Pow) -> bool:
    return _is_expandable_pow(p)


def _is_expandable_pow(f: Expr) -> bool:
    return (
        isinstance(f, Pow)
        and isinstance(f.base, Add)
        and isinstance(f.exp, Const)
        and f.exp.value.denominator == 1
        and 1 < f.exp.value <= _EXPAND_LIMIT
    )


def _expand_product(factors: list) -> Expr:
    expanded = []
    for f in factors:
        if _is_expandable_pow(f):
            expanded.extend([f.base] * int(f.exp.value))
        else:
            expanded.append(f)
    sums = [f.args if isinstance(f, Add) else (f,) for f in expanded]
    terms = []
    for combo in iproduct(*sums):
        m = mul(*combo)
        c, rest = split_coeff(m)
        rest_f = list(rest.args) if isinstance(rest, Mul) else ([] if rest == ONE else [rest])
        rest_f = _factorial_ratios(rest_f) if len(rest_f) > 1 else rest_f
        if any(isinstance(f, Add) or _is_expandable_pow(f) for f in rest_f):
            terms.append(_expand_product([Const(c)] + rest_f))
        else:
            terms.append(_literal_step(c, rest_f))
    return add(*terms)


def _factorial_ratios(fs: list) -> list:
    """factorial(A)^a * factorial(A-k)^b with a, b of opposite sign -> polynomial."""
    changed = True
    while changed:
        changed = False
        facts = []
        for i, f in enumerate(fs):
            b, x = (f.base, f.exp) if isinstance(f, Pow) else (f, ONE)
            if isinstance(b, Func) and b.name == "factorial" and isinstance(x, Const) and x.value.denominator == 1:
                facts.append((i, b.args[0], int(x.value)))
        for i, a_arg, ea in facts:
            for j, b_arg, eb in facts:
                if i == j or ea * eb >= 0:
                    continue
                diff = normalize(sub(a_arg, b_arg))
                if not (isinstance(diff, Const) and diff.value.denominator == 1):
                    continue
                k = int(diff.value)
                if not 0 < k <= _EXPAND_LIMIT:
                    continue
                # factorial(A) = factorial(A - k) * prod_{i<k} (A - i)
                new = [g for t, g in enumerate(fs) if t not in (i, j)]
                new.append(pow_(Func("factorial", (b_arg,)), Const(ea + eb)))
                for t in range(k):
                    new.append(pow_(add(a_arg, Const(-t)), Const(ea)))
                m = mul(*new)
                fs = list(m.args) if isinstance(m, Mul) else [m]
                changed = True
                break
            if changed:
                break
    return fs


def _numeric_base(e: Expr):
    """Value of a numeric power base (rational or quadratic surd), else None."""
    if isinstance(e, Const):
        return e.value
    if is_numeric(e):
        return as_number(e)
    return None


def _split_exponent(x: Expr):
    """x = j + k*R with rational j, k and R free of constant term/coefficient."""
    j = Fraction(0)
    rest = x
    if isinstance(x, Add) and isinstance(x.args[0], Const):
        j = x.args[0].value
        rest = add(*x.args[1:])
    elif isinstance(x, Const):
        return x.value, Fraction(0), ONE
    k, r = split_coeff(rest)
    return j, k, r


def _literal_step(coeff: Fraction, factors: list) -> Expr:
    """Canonical form for products containing powers of numeric bases.

    Numeric factors are folded into one coefficient in Q(sqrt d); powers of
    numeric bases are regrouped by their non-constant exponent, with integer
    exponent multiples pushed into the base.  A rational coefficient that is
    an exact integer power of a group's base is absorbed into its exponent.
    """
    number = Fraction(coeff)
    groups: dict[Expr, object] = {}
    keep_exp: dict[Expr, Expr] = {}
    others = []
    try:
        for f in factors:
            if is_numeric(f):
                v = as_number(f)
                if v is not None:
                    number = number * v
                    continue
                others.append(f)
                continue
            if isinstance(f, Pow):
                bv = _numeric_base(f.base)
                if bv is not None and bv != 0:
                    j, k, r = _split_exponent(f.exp)
                    ji = math.floor(j)
                    jf = j - ji
                    number = number * bv**ji
                    if jf:
                        fv = as_number(pow_(number_to_expr(bv), Const(jf))) if isinstance(bv, Fraction) else None
                        if fv is None:
                            others.append(pow_(number_to_expr(bv), Const(jf)))
                        else:
                            number = number * fv
                    if k.denominator == 1:
                        nb = bv ** int(k)
                        groups[r] = groups.get(r, Fraction(1)) * nb
                    else:
                        root = rational_root(bv, k.denominator) if isinstance(bv, Fraction) else None
                        if root is not None:
                            groups[r] = groups.get(r, Fraction(1)) * root**k.numerator
                        else:
                            others.append(Pow(number_to_expr(bv), mul(Const(k), r)))
                    continue
            others.append(f)
    except MixedFieldError:
        return mul(Const(coeff), *factors)
    pows = []
    absorbed = False
    for r, base in sorted(groups.items(), key=lambda kv: kv[0].key()):
        if base == 1:
            continue
        exponent = r
        if not absorbed and isinstance(number, Fraction) and abs(number) != 1 and isinstance(base, Fraction):
            # positive bases absorb |number| and leave the sign outside
            target = abs(number) if base > 0 else number
            m = _exact_log(target, base)
            if m is not None and m != 0:
                exponent = add(r, Const(m))
                number = number / target
                absorbed = True
        pows.append(Pow(number_to_expr(base), exponent) if exponent != ONE else number_to_expr(base))
    if isinstance(number, QuadSurd):
        sq = Pow(Const(number.d), HALF)
        parts = []
        if number.a:
            parts.append(_raw_mul(number.a, pows + others))
        parts.append(_raw_mul(number.b, pows + others + [sq]))
        return add(*parts)
    # numeric bases with exponent 1 are plain numbers
    fs = []
    for p in pows:
        if isinstance(p, Const):
            number = number * p.value
        elif is_numeric(p):
            v = as_number(p)
            if isinstance(v, QuadSurd):
                return _literal_step(number, [x for x in pows if x is not p] + others + [p])
            number = number * v
        else:
            fs.append(p)
    return _raw_mul(number, fs + others)


def _exact_log(n: Fraction, b: Fraction):
    """Integer m with b**m == n, else None."""
    n, b = Fraction(n), Fraction(b)
    if b in (0, 1) or n == 0:
        return None
    if b == -1:
        return 1 if n == -1 else None
    if abs(b) < 1:
        m = _exact_log(n, 1 / b)
        return -m if m is not None else None
    if abs(n) < 1:
        m = _exact_log(1 / n, b)
        return -m if m is not None else None
    # |b| > 1, |n| >= 1: m >= 0 and |b|**m grows past any bit length quickly
    acc = Fraction(1)
    limit = n.numerator.bit_length() + n.denominator.bit_length() + 1
    for m in range(limit + 1):
        if acc == n:
            return m
        if abs(acc) > abs(n):
            return None
        acc *= b
    return None


# ---------------------------------------------------------------------------
# rendering


def _render_const(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


_PREC_ADD, _PREC_MUL, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4


def render(e: Expr) -> str:
    """Canonical text: ``^`` powers, explicit ``*``, rationals as ``p/q``."""
    return _render(e)[0]


def _render(e: Expr):
    if isinstance(e, Const):
        v = e.value
        if v < 0:
            return _render_const(v), _PREC_ADD
        if v.denominator != 1:
            return _render_const(v), _PREC_MUL
        return _render_const(v), _PREC_ATOM
    if isinstance(e, Symbol):
        return e.name, _PREC_ATOM
    if isinstance(e, (Func, Unknown)):
        return f"{e.name}({', '.join(render(a) for a in e.args)})", _PREC_ATOM
    if isinstance(e, Add):
        out = ""
        terms = [t for t in e.args if not isinstance(t, Const)] + [t for t in e.args if isinstance(t, Const)]
        for i, t in enumerate(terms):
            c, rest = split_coeff(t)
            if c < 0:
                body = render(_make_term(-c, rest))
                out += ("-" if i == 0 else " - ") + _paren_if(body, _render(_make_term(-c, rest))[1] <= _PREC_ADD)
            else:
                out += ("" if i == 0 else " + ") + render(t)
        return out, _PREC_ADD
    if isinstance(e, Mul) or (isinstance(e, Pow) and _negative_exponent(e.exp)):
        factors = e.args if isinstance(e, Mul) else (e,)
        c = Fraction(1)
        num, den = [], []
        for f in factors:
            if isinstance(f, Const):
                c *= f.value
            elif isinstance(f, Pow) and _negative_exponent(f.exp):
                den.append(pow_(f.base, neg(f.exp)))
            else:
                num.append(f)
        sign = "-" if c < 0 else ""
        c = abs(c)
        num_s = [_wrap(x, _PREC_MUL) for x in num]
        if c.numerator != 1 or not num_s:
            num_s.insert(0, str(c.numerator))
        text = "*".join(num_s)
        den_items = ([str(c.denominator)] if c.denominator != 1 else []) + [_wrap(x, _PREC_POW) for x in den]
        if den_items:
            d = den_items[0] if len(den_items) == 1 else "(" + "*".join(den_items) + ")"
            text = f"{text}/{d}"
        if sign:
            return sign + text, _PREC_ADD
        return text, _PREC_MUL
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _PREC_ATOM)}^{_wrap(e.exp, _PREC_ATOM)}", _PREC_POW
    raise TypeError(e)


def _negative_exponent(x: Expr) -> bool:
    c, _ = split_coeff(x)
    return c < 0 and not isinstance(x, Add)


def _paren_if(s, cond):
    return f"({s})" if cond else s


def _wrap(e: Expr, need: int) -> str:
    s, p = _render(e)
    return f"({s})" if p < need else s


# ---------------------------------------------------------------------------
# exact evaluation


class _LogVal:
    """Laurent polynomial in logarithms of primes, with rational coefficients.

    Monomials are tuples of (prime, exponent) pairs; the empty tuple is the
    constant monomial.
    """

    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = {m: c for m, c in terms.items() if c != 0}

    @staticmethod
    def of_log(q: Fraction) -> "_LogVal":
        terms = {}
        for p, e in factorint(q.numerator).items():
            terms[((p, 1),)] = terms.get(((p, 1),), 0) + Fraction(e)
        for p, e in factorint(q.denominator).items():
            terms[((p, 1),)] = terms.get(((p, 1),), 0) - Fraction(e)
        return _LogVal(terms)

    def collapse(self):
        if not self.terms:
            return Fraction(0)
        if list(self.terms) == [()]:
            return self.terms[()]
        return self


def _lv(x):
    if isinstance(x, _LogVal):
        return x
    if isinstance(x, QuadSurd):
        raise IrrationalValue("logarithms mixed with surds")
    return _LogVal({(): Fraction(x)})


class _PowVal:
    """coeff * exp(expo): a rational or surd times a transcendental power.

    ``expo`` is a _LogVal with no linear log-of-prime monomials (those are
    folded into ``coeff``).  Products whose exponents cancel collapse back
    to exact numbers.
    """

    __slots__ = ("coeff", "expo")

    def __init__(self, coeff, expo: "_LogVal"):
        self.coeff = coeff
        self.expo = expo

    def collapse(self):
        return self.coeff if not self.expo.terms else self


def _exp_of(L: "_LogVal"):
    """exp(L) as an exact number when possible, else a _PowVal."""
    out = Fraction(1)
    rest = {}
    for m, c in L.terms.items():
        if len(m) == 1 and m[0][1] == 1:
            try:
                out = _v_mul(out, _v_pow(Fraction(m[0][0]), c))
                continue
            except IrrationalValue:
                pass
        rest[m] = c
    return _PowVal(out, _LogVal(rest)).collapse()


def _mono_mul(a, b):
    d = dict(a)
    for p, e in b:
        d[p] = d.get(p, 0) + e
    return tuple(sorted((p, e) for p, e in d.items() if e != 0))


def _v_add(a, b):
    if isinstance(a, _PowVal) or isinstance(b, _PowVal):
        if a == 0:
            return b
        if b == 0:
            return a
        if isinstance(a, _PowVal) and isinstance(b, _PowVal) and a.expo.terms == b.expo.terms:
            return _PowVal(a.coeff + b.coeff, a.expo).collapse() if a.coeff + b.coeff != 0 else Fraction(0)
        raise IrrationalValue("sum of transcendental powers")
    if not isinstance(a, _LogVal) and not isinstance(b, _LogVal):
        return a + b
    a, b = _lv(a), _lv(b)
    t = dict(a.terms)
    for m, c in b.terms.items():
        t[m] = t.get(m, 0) + c
    return _LogVal(t).collapse()


def _v_mul(a, b):
    if isinstance(a, _PowVal) or isinstance(b, _PowVal):
        if isinstance(a, _LogVal) or isinstance(b, _LogVal):
            raise IrrationalValue("logarithm times transcendental power")
        pa = a if isinstance(a, _PowVal) else _PowVal(a, _LogVal({}))
        pb = b if isinstance(b, _PowVal) else _PowVal(b, _LogVal({}))
        expo = _v_add(pa.expo, pb.expo)
        expo = expo if isinstance(expo, _LogVal) else _lv(expo)
        if () in expo.terms:
            raise IrrationalValue("exponential of a rational")
        coeff = pa.coeff * pb.coeff
        if coeff == 0:
            return Fraction(0)
        return _PowVal(coeff, expo).collapse()
    if not isinstance(a, _LogVal) and not isinstance(b, _LogVal):
        return a * b
    a, b = _lv(a), _lv(b)
    t: dict = {}
    for m1, c1 in a.terms.items():
        for m2, c2 in b.terms.items():
            m = _mono_mul(m1, m2)
            t[m] = t.get(m, 0) + c1 * c2
    return _LogVal(t).collapse()


def _v_pow_int(a, k: int):
    if isinstance(a, _PowVal):
        return _PowVal(_v_pow_int(a.coeff, k), _v_mul(a.expo, Fraction(k)) if k else _LogVal({})).collapse()
    if not isinstance(a, _LogVal):
        if a == 0 and k < 0:
            raise DomainError("division by zero")
        return a**k
    if k < 0:
        if len(a.terms) != 1:
            raise IrrationalValue("cannot invert a sum of logarithms exactly")
        (m, c), = a.terms.items()
        return _v_pow_int(_LogVal({tuple((p, -e) for p, e in m): 1 / c}), -k)
    out = Fraction(1)
    for _ in range(k):
        out = _v_mul(out, a)
    return out


def _to_int(v, what="value") -> int:
    if isinstance(v, Fraction) and v.denominator == 1:
        return int(v)
    if isinstance(v, int):
        return v
    raise EvaluationError(f"{what} must be an integer, got {v}")


def _v_pow(b, x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return _v_pow_int(b, int(x))
    if isinstance(x, Fraction):
        if isinstance(b, (_LogVal, QuadSurd, _PowVal)):
            raise IrrationalValue("fractional power of irrational value")
        if b < 0:
            raise NonIntegerExponent(f"non-integer power {x} of negative base {b}")
        root = rational_root(b, x.denominator)
        if root is not None:
            return root**x.numerator
        if x.denominator == 2:
            return sqrt_number(b) ** x.numerator
        raise IrrationalValue(f"{b}^{x} is irrational")
    if isinstance(x, _LogVal):
        if not isinstance(b, Fraction) or b <= 0:
            raise IrrationalValue("transcendental exponent of non-rational base")
        if b == 1:
            return Fraction(1)
        const_part = x.terms.get((), Fraction(0))
        rest = _LogVal({m: c for m, c in x.terms.items() if m != ()})
        prod_ = _v_mul(rest, _LogVal.of_log(b))
        prod_ = prod_ if isinstance(prod_, _LogVal) else _lv(prod_)
        out = _v_pow(b, const_part) if const_part else Fraction(1)
        if () in prod_.terms:
            raise IrrationalValue("power with transcendental exponent")
        return _v_mul(out, _exp_of(prod_))
    raise IrrationalValue("irrational exponent")


def eval_exact(e: Expr, bindings=None, unknowns=None) -> Fraction:
    """Exact rational value of e.

    ``bindings`` maps symbol names to rationals; ``unknowns`` is an optional
    callback ``(name, args) -> Fraction`` resolving Unknown nodes.
    """
    bindings = {k: Fraction(v) for k, v in (bindings or {}).items()}
    v = _ev(as_expr(e), bindings, unknowns)
    if isinstance(v, (_LogVal, _PowVal)):
        v = v.collapse()
    if not isinstance(v, Fraction):
        raise IrrationalValue(f"value of {render(e)} is irrational")
    return v


def eval_number(e: Expr, bindings=None, unknowns=None):
    """Like eval_exact but allows results in a real quadratic field."""
    bindings = {k: Fraction(v) for k, v in (bindings or {}).items()}
    v = _ev(as_expr(e), bindings, unknowns)
    if isinstance(v, (_LogVal, _PowVal)):
        raise IrrationalValue("value involves logarithms")
    return v


def _ev(e: Expr, b: dict, unknowns):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Symbol):
        if e.name not in b:
            raise UnboundSymbol(e.name)
        return b[e.name]
    try:
        if isinstance(e, Add):
            total = Fraction(0)
            for a in e.args:
                total = _v_add(total, _ev(a, b, unknowns))
            return total
        if isinstance(e, Mul):
            total = Fraction(1)
            for a in e.args:
                total = _v_mul(total, _ev(a, b, unknowns))
            return total
        if isinstance(e, Pow):
            return _v_pow(_ev(e.base, b, unknowns), _ev(e.exp, b, unknowns))
    except MixedFieldError as exc:
        raise IrrationalValue(str(exc)) from exc
    if isinstance(e, Func):
        return _ev_func(e, b, unknowns)
    if isinstance(e, Unknown):
        if unknowns is None:
            raise EvaluationError(f"unresolved reference {render(e)}")
        args = tuple(_to_int(_ev(a, b, unknowns), "index") for a in e.args)
        return Fraction(unknowns(e.name, args))
    raise TypeError(e)


def _ev_func(e: Func, b: dict, unknowns):
    name = e.name
    if name == "log":
        v = _ev(e.args[0], b, unknowns)
        if isinstance(v, (_LogVal, QuadSurd, _PowVal)):
            raise IrrationalValue("log of irrational value")
        if v <= 0:
            raise DomainError(f"log of non-positive value {v}")
        return _LogVal.of_log(v).collapse()
    if name == "factorial":
        v = _to_int(_ev(e.args[0], b, unknowns), "factorial argument")
        if v < 0:
            raise DomainError("factorial of negative integer")
        return Fraction(math.factorial(v))
    if name == "binomial":
        top = _ev(e.args[0], b, unknowns)
        k = _to_int(_ev(e.args[1], b, unknowns), "binomial index")
        if k < 0:
            return Fraction(0)
        out = Fraction(1)
        for i in range(k):
            out = out * (top - i)
        return out / math.factorial(k)
    if name in ("sum", "prod"):
        body, k, lo, hi = e.args
        lo_v = _to_int(_ev(lo, b, unknowns), "range bound")
        hi_v = _to_int(_ev(hi, b, unknowns), "range bound")
        unit = Fraction(0) if name == "sum" else Fraction(1)
        if hi_v < lo_v:
            return unit
        key = None
        if unknowns is None:
            outer = body.free_symbols() - {k.name}
            if outer <= b.keys():
                key = (name, body, k.name, lo_v, tuple(sorted((s, b[s]) for s in outer)))
                try:
                    hash(key)
                except TypeError:
                    key = None
        # prefix values for a repeated range (nested sums re-walk the same prefix)
        prefix = _RANGE_CACHE.get(key, ()) if key is not None else ()
        if hi_v - lo_v < len(prefix):
            return prefix[hi_v - lo_v]
        acc = prefix[-1] if prefix else unit
        grown = list(prefix)
        inner = dict(b)
        for i in range(lo_v + len(prefix), hi_v + 1):
            inner[k.name] = Fraction(i)
            v = _ev(body, inner, unknowns)
            acc = _v_add(acc, v) if name == "sum" else _v_mul(acc, v)
            grown.append(acc)
        if key is not None:
            if len(_RANGE_CACHE) >= _RANGE_CACHE_MAX:
                _RANGE_CACHE.clear()
            _RANGE_CACHE[key] = tuple(grown)
        return acc
    raise TypeError(name)


_RANGE_CACHE: dict = {}
_RANGE_CACHE_MAX = 2048


# ---------------------------------------------------------------------------
# interval evaluation


def eval_interval(e: Expr, bindings=None, prec: int = 64, unknowns=None) -> Interval:
    """Outward-rounded rational enclosure of the value of e."""
    bindings = {k: Fraction(v) for k, v in (bindings or {}).items()}
    return _iv(as_expr(e), bindings, prec, unknowns)


def _iv(e: Expr, b: dict, prec: int, unknowns) -> Interval:
    if isinstance(e, Const):
        return Interval.point(e.value)
    if isinstance(e, Symbol):
        if e.name not in b:
            raise UnboundSymbol(e.name)
        return Interval.point(b[e.name])
    if isinstance(e, Add):
        total = Interval.point(0)
        for a in e.args:
            total = total + _iv(a, b, prec, unknowns)
        return total.round(prec + 16)
    if isinstance(e, Mul):
        total = Interval.point(1)
        for a in e.args:
            total = (total * _iv(a, b, prec, unknowns)).round(prec + 16)
        return total
    if isinstance(e, Pow):
        base = _iv(e.base, b, prec, unknowns)
        x = _iv(e.exp, b, prec, unknowns)
        if x.lo == x.hi and x.lo.denominator == 1:
            return (base ** int(x.lo)).round(prec + 16)
        if base.lo <= 0:
            if base.lo == base.hi == 0 and x.lo > 0:
                return Interval.point(0)
            raise NonIntegerExponent("non-integer power of a non-positive base")
        return power_interval(base, x, prec + 16)
    if isinstance(e, Func):
        if e.name == "log":
            return log_interval(_iv(e.args[0], b, prec, unknowns), prec + 16)
        if e.name in ("sum", "prod"):
            body, k, lo, hi = e.args
            lo_v = _to_int(eval_exact(lo, b), "range bound")
            hi_v = _to_int(eval_exact(hi, b), "range bound")
            acc = Interval.point(0 if e.name == "sum" else 1)
            inner = dict(b)
            for i in range(lo_v, hi_v + 1):
                inner[k.name] = Fraction(i)
                v = _iv(body, inner, prec, unknowns)
                acc = acc + v if e.name == "sum" else acc * v
            return acc.round(prec + 16)
        return Interval.point(eval_exact(e, b, unknowns))
    if isinstance(e, Unknown):
        return Interval.point(eval_exact(e, b, unknowns))
    raise TypeError(e)
