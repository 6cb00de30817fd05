"""Recursive-descent parser for recurrences, systems and initial conditions."""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import DuplicateCondition, InconsistentArity, MixedForm, ParseError
from .expr import (
    FUNC_NAMES,
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
    as_expr,
    func,
    has_unknown,
    mul,
    neg,
    normalize,
    pow_,
    split_coeff,
    sub,
    sym,
    unknown,
)
from .model import RecurrenceSpec, RecurrenceSystem

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.items = []  # (kind, value, pos)
        for m in _TOKEN.finditer(text):
            num, ident, op = m.groups()
            if num is not None:
                self.items.append(("num", int(num), m.start(1)))
            elif ident is not None:
                self.items.append(("id", ident, m.start(2)))
            elif op is not None:
                if op not in "+-*/^(),;=":
                    raise ParseError(f"unexpected character {op!r}", m.start(3), None, text)
                self.items.append(("op", op, m.start(3)))
        self.items.append(("end", None, len(text.rstrip())))
        self.i = 0

    def peek(self):
        return self.items[self.i]

    def next(self):
        tok = self.items[self.i]
        self.i += 1
        return tok

    def at(self, value) -> bool:
        kind, v, _ = self.peek()
        return kind == "op" and v == value

    def expect(self, value):
        kind, v, pos = self.next()
        if kind != "op" or v != value:
            raise ParseError(f"expected {value!r}", pos, value, self.text)

    def fail(self, message, expected=None):
        raise ParseError(message, self.peek()[2], expected, self.text)


class _ExprParser:
    """Expression grammar; names in ``unknowns`` parse as sequence references."""

    def __init__(self, toks: _Tokens, unknowns=(), bound=()):
        self.t = toks
        self.unknowns = set(unknowns)
        self.bound = set(bound)

    def expr(self) -> Expr:
        out = self.term()
        while self.t.at("+") or self.t.at("-"):
            op = self.t.next()[1]
            rhs = self.term()
            out = add(out, rhs) if op == "+" else sub(out, rhs)
        return out

    def term(self) -> Expr:
        out = self.factor()
        while self.t.at("*") or self.t.at("/"):
            op = self.t.next()[1]
            rhs = self.factor()
            if op == "*":
                out = mul(out, rhs)
            else:
                if rhs == ZERO:
                    self.t.fail("division by zero")
                out = mul(out, pow_(rhs, -1))
        return out

    def factor(self) -> Expr:
        if self.t.at("-"):
            self.t.next()
            return neg(self.factor())
        base = self.base()
        if self.t.at("^"):
            self.t.next()
            exp = self.factor()
            if base == ZERO and isinstance(exp, Const) and exp.value < 0:
                self.t.fail("division by zero")
            return pow_(base, exp)
        return base

    def base(self) -> Expr:
        kind, v, pos = self.t.next()
        if kind == "num":
            return Const(v)
        if kind == "op" and v == "(":
            e = self.expr()
            self.t.expect(")")
            return e
        if kind == "id":
            if self.t.at("("):
                return self.call(v, pos)
            return Symbol(v)
        self.t.i -= 1
        self.t.fail("expected a number, name or '('", "operand")

    def call(self, name: str, pos: int) -> Expr:
        self.t.expect("(")
        if name in ("sum", "prod"):
            return self.big_operator(name, pos)
        args = [self.expr()]
        while self.t.at(","):
            self.t.next()
            args.append(self.expr())
        self.t.expect(")")
        if name in self.unknowns:
            return unknown(name, *args)
        if name not in FUNC_NAMES:
            raise ParseError(f"unknown function {name!r}", pos, "function name", self.t.text)
        arity = {"log": 1, "factorial": 1, "binomial": 2}[name]
        if len(args) != arity:
            raise ParseError(f"{name} takes {arity} argument(s)", pos, None, self.t.text)
        return func(name, *args)

    def big_operator(self, name: str, pos: int) -> Expr:
        # body, k, lo, hi -- a bare unknown name as body means unknown(k)
        start = self.t.i
        kind, v, _ = self.t.peek()
        bare = None
        if kind == "id" and v in self.unknowns and self.t.items[self.t.i + 1][1] == ",":
            bare = v
            self.t.next()
        else:
            # parse the body after we know the bound variable: find it first
            depth = 0
            j = self.t.i
            while True:
                k2, v2, _ = self.t.items[j]
                if k2 == "end":
                    raise ParseError("unterminated sum", pos, ")", self.t.text)
                if k2 == "op" and v2 == "(":
                    depth += 1
                elif k2 == "op" and v2 == ")":
                    depth -= 1
                elif k2 == "op" and v2 == "," and depth == 0:
                    break
                j += 1
            self.t.i = j
        self.t.expect(",")
        kind, k, kpos = self.t.next()
        if kind != "id":
            raise ParseError("expected summation variable", kpos, "name", self.t.text)
        self.t.expect(",")
        lo = self.expr()
        self.t.expect(",")
        hi = self.expr()
        self.t.expect(")")
        end = self.t.i
        if bare is not None:
            body = unknown(bare, sym(k))
        else:
            self.t.i = start
            body = _ExprParser(self.t, self.unknowns, self.bound | {k}).expr()
            self.t.i = end
        return func(name, body, sym(k), lo, hi)


# ---------------------------------------------------------------------------
# equations


def _classify_arg(arg: Expr, var: str, text, pos):
    """Index argument -> ('shift', s) for var - s, or ('div', beta)."""
    a = normalize(arg)
    if a == Symbol(var):
        return ("shift", 0)
    if isinstance(a, Add) and len(a.args) == 2 and isinstance(a.args[0], Const) and a.args[1] == Symbol(var):
        c = a.args[0].value
        if c.denominator == 1:
            return ("shift", int(-c))
    c, rest = split_coeff(a)
    if rest == Symbol(var) and 0 < c < 1:
        return ("div", 1 / c)
    raise ParseError(f"unsupported index argument {arg}", pos, f"{var} - k, {var} + k or {var}/b", text)


def _reference_key(u: Unknown, index_vars, text, pos):
    forms = [_classify_arg(a, v, text, pos) for a, v in zip(u.args, index_vars)]
    if any(f[0] == "div" for f in forms):
        if len(forms) != 1:
            raise ParseError("divisor arguments need a single index", pos, None, text)
        return ("div", forms[0][1])
    return tuple(f[1] for f in forms)


def _is_prefix_sum(f: Expr, names, var) -> str | None:
    if not (isinstance(f, Func) and f.name == "sum"):
        return None
    body, k, lo, hi = f.args
    if isinstance(body, Unknown) and body.name in names and body.args == (k,):
        if lo == ZERO and normalize(hi) == normalize(sub(sym(var), 1)):
            return body.name
    return None


def _decompose(rhs: Expr, names, index_vars, text, pos):
    """Split a normalized right-hand side into linear references and the rest."""
    terms: dict = {}
    forcing = []
    prefix = []
    nonlinear = []
    var = index_vars[0]
    parts = rhs.args if isinstance(rhs, Add) else (rhs,)
    for t in parts:
        if not has_unknown(t):
            forcing.append(t)
            continue
        factors = t.args if isinstance(t, Mul) else (t,)
        hits = [i for i, f in enumerate(factors) if has_unknown(f)]
        if len(hits) == 1:
            f = factors[hits[0]]
            coeff = mul(*(factors[:hits[0]] + factors[hits[0] + 1:]))
            if isinstance(f, Unknown) and not any(has_unknown(a) for a in f.args):
                key = _reference_key(f, index_vars, text, pos)
                k = (f.name, key)
                terms[k] = add(terms.get(k, ZERO), coeff)
                continue
            if _is_prefix_sum(f, names, var) is not None:
                prefix.append(coeff)
                continue
        nonlinear.append(t)
    terms = {k: normalize(c) for k, c in terms.items()}
    terms = {k: c for k, c in terms.items() if c != ZERO}
    pcoeff = normalize(add(*prefix)) if prefix else None
    if pcoeff == ZERO:
        pcoeff = None
    return terms, normalize(add(*forcing)), pcoeff, tuple(nonlinear)


def _check_references(e: Expr, arity: dict, index_vars_of: dict, text, pos):
    """Arity consistency and shift/divisor mixing for every reference."""
    forms: dict = {}

    def walk(x):
        if isinstance(x, Unknown):
            n = len(x.args)
            if arity.setdefault(x.name, n) != n:
                raise InconsistentArity(f"{x.name} used with {arity[x.name]} and {n} arguments", pos, None, text)
            if x.name in index_vars_of:
                ivars = index_vars_of[x.name]
                if all(isinstance(a, Symbol) and a.name not in ivars for a in x.args):
                    pass  # bound variable of a sum
                else:
                    key = _reference_key(x, ivars, text, pos)
                    kind = "div" if key and key[0] == "div" else "shift"
                    if forms.setdefault(x.name, kind) != kind:
                        raise MixedForm(f"{x.name} referenced both with shifts and with a divisor", pos, None, text)
        for c in x.children:
            walk(c)

    walk(e)


def _split_top(text: str, sep=";"):
    out, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == sep and depth == 0:
            out.append((start, text[start:i]))
            start = i + 1
    out.append((start, text[start:]))
    return [(s, t) for s, t in out if t.strip()]


def _parse_lhs(toks: _Tokens):
    kind, name, pos = toks.next()
    if kind != "id":
        raise ParseError("expected the unknown on the left-hand side", pos, "name", toks.text)
    toks.expect("(")
    ivars = []
    while True:
        kind, v, p = toks.next()
        if kind != "id":
            raise ParseError("expected an index variable", p, "name", toks.text)
        if v in ivars:
            raise ParseError(f"repeated index variable {v}", p, None, toks.text)
        ivars.append(v)
        if toks.at(","):
            toks.next()
            continue
        toks.expect(")")
        break
    toks.expect("=")
    return name, tuple(ivars), pos


def parse(text: str):
    """Parse one recurrence or a ';'-separated system."""
    chunks = _split_top(text)
    if not chunks:
        raise ParseError("empty input", 0, "equation", text)
    heads = []
    for offset, chunk in chunks:
        toks = _Tokens(chunk)
        name, ivars, pos = _parse_lhs(toks)
        heads.append((name, ivars, toks, offset))
    names = [h[0] for h in heads]
    if len(set(names)) != len(names):
        raise ParseError("unknown defined twice", 0, None, text)
    ivars0 = heads[0][1]
    if len(heads) > 1 and any(h[1] != ivars0 for h in heads):
        raise ParseError("system equations must share index variables", 0, None, text)
    arity = {name: len(iv) for name, iv, _, _ in heads}
    index_vars_of = {name: iv for name, iv, _, _ in heads}
    specs = []
    for name, ivars, toks, offset in heads:
        start = toks.peek()[2]
        rhs = _ExprParser(toks, names).expr()
        kind, v, p = toks.peek()
        if kind != "end":
            raise ParseError(f"unexpected {v!r}", offset + p, "operator or end of input", text)
        _check_references(rhs, arity, index_vars_of, text, offset + start)
        rhs = normalize(rhs)
        terms, forcing, pcoeff, nonlinear = _decompose(rhs, names, ivars, text, offset + start)
        for (rname, key), _ in terms.items():
            if rname == name and all(s == 0 for s in key if not isinstance(s, str)) and key[0] != "div":
                raise ParseError("right-hand side refers to the value being defined", offset + start, None, text)
        specs.append(RecurrenceSpec(name, ivars, terms, forcing, rhs, pcoeff, nonlinear))
    if len(specs) == 1:
        return specs[0]
    return RecurrenceSystem(tuple(specs))


def parse_expr(text: str, unknowns=()) -> Expr:
    toks = _Tokens(text)
    e = _ExprParser(toks, unknowns).expr()
    kind, v, p = toks.peek()
    if kind != "end":
        raise ParseError(f"unexpected {v!r}", p, "operator or end of input", text)
    return normalize(e)


def parse_conditions_by_unknown(text: str) -> dict:
    """``x(0)=1;y(0)=2`` -> {'x': {(0,): 1}, 'y': {(0,): 2}}."""
    out: dict = {}
    for offset, chunk in _split_top(text):
        toks = _Tokens(chunk)
        kind, name, pos = toks.next()
        if kind != "id":
            raise ParseError("expected a condition like x(0)=1", offset + pos, "name", text)
        toks.expect("(")
        key = []
        while True:
            neg_sign = False
            if toks.at("-"):
                toks.next()
                neg_sign = True
            kind, v, p = toks.next()
            if kind == "num":
                key.append(-v if neg_sign else v)
            elif kind == "id" and not neg_sign:
                key.append(v)
            else:
                raise ParseError("expected an integer index or index variable", offset + p, "index", text)
            if toks.at(","):
                toks.next()
                continue
            toks.expect(")")
            break
        toks.expect("=")
        value = _ExprParser(toks, ()).expr()
        kind, v, p = toks.peek()
        if kind != "end":
            raise ParseError(f"unexpected {v!r}", offset + p, "end of condition", text)
        key = tuple(key)
        conds = out.setdefault(name, {})
        if key in conds:
            idx = ",".join(map(str, key))
            raise DuplicateCondition(f"duplicate condition for {name}({idx})", offset + pos, None, text)
        conds[key] = normalize(value)
    return out


def parse_initial_conditions(text: str) -> dict:
    """``x(0)=0;x(1)=1`` -> {(0,): 0, (1,): 1}; ``x(0,n)=9`` -> {(0, 'n'): 9}.

    The unknown's name is not part of the key; mixing names is rejected.
    """
    by_name = parse_conditions_by_unknown(text)
    if len(by_name) > 1:
        names = sorted(by_name)
        raise ParseError(f"conditions mix unknowns {names[0]} and {names[1]}", 0, names[0], text)
    return next(iter(by_name.values()), {})


def ics_from_values(values: dict) -> dict:
    """Accept {0: 1, 1: 'c'} style dicts as well as parsed condition maps."""
    out = {}
    for k, v in values.items():
        key = k if isinstance(k, tuple) else (k,)
        out[key] = normalize(as_expr(v) if not isinstance(v, str) else parse_expr(v))
    return out
