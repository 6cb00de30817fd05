"""Recurrence and solution data types."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .expr import (
    Expr,
    Unknown,
    add,
    as_expr,
    func,
    mul,
    render,
    sym,
    unknown,
)

# A shift key is either a tuple of ints (x(n - s) has key (s,)) or
# ("div", beta) for a divide-and-conquer reference x(n/beta).


def is_div_key(key) -> bool:
    return isinstance(key, tuple) and len(key) == 2 and key[0] == "div"


def reference(name: str, index_vars, key) -> Unknown:
    """The Unknown node denoted by a shift key."""
    if is_div_key(key):
        return unknown(name, mul(Fraction(1) / key[1], sym(index_vars[0])))
    return unknown(name, *(add(sym(v), -s) for v, s in zip(index_vars, key)))


@dataclass(frozen=True)
class RecurrenceSpec:
    """One recurrence ``unknown(index_vars) = rhs``.

    ``terms`` maps (unknown name, shift key) to the coefficient of every
    reference that occurs linearly; ``forcing`` collects the terms free of
    unknowns.  ``nonlinear_terms`` keeps whatever did not fit that shape.
    """

    unknown: str
    index_vars: tuple
    terms: dict
    forcing: Expr
    rhs: Expr
    prefix_sum_coeff: Expr | None = None
    nonlinear_terms: tuple = ()
    initial_conditions: dict = field(default_factory=dict)

    @property
    def shift_terms(self) -> dict:
        return {k: c for (name, k), c in self.terms.items() if name == self.unknown}

    @property
    def cross_terms(self) -> dict:
        return {(name, k): c for (name, k), c in self.terms.items() if name != self.unknown}

    @property
    def var(self) -> str:
        return self.index_vars[0]

    @property
    def is_linear(self) -> bool:
        return not self.nonlinear_terms

    @property
    def is_divide_conquer(self) -> bool:
        return any(is_div_key(k) for k in self.shift_terms)

    @property
    def divisor(self):
        for k in self.shift_terms:
            if is_div_key(k):
                return k[1]
        return None

    @property
    def order(self) -> int:
        """Largest backward shift of the unknown (univariate shift form)."""
        shifts = [k[0] for k in self.shift_terms if not is_div_key(k)]
        return max(shifts, default=0)

    def coefficient(self, shift) -> Expr:
        key = shift if isinstance(shift, tuple) else (shift,)
        return self.shift_terms.get(key, as_expr(0))

    def with_initial_conditions(self, ics: dict) -> "RecurrenceSpec":
        return RecurrenceSpec(
            self.unknown,
            self.index_vars,
            self.terms,
            self.forcing,
            self.rhs,
            self.prefix_sum_coeff,
            self.nonlinear_terms,
            dict(ics),
        )

    def __eq__(self, other):
        if not isinstance(other, RecurrenceSpec):
            return NotImplemented
        return (
            self.unknown == other.unknown
            and self.index_vars == other.index_vars
            and self.terms == other.terms
            and self.forcing == other.forcing
            and self.rhs == other.rhs
            and self.prefix_sum_coeff == other.prefix_sum_coeff
            and self.initial_conditions == other.initial_conditions
        )

    def __hash__(self):
        return hash((self.unknown, self.index_vars, self.rhs))

    def lhs(self) -> Unknown:
        return unknown(self.unknown, *(sym(v) for v in self.index_vars))

    def render(self) -> str:
        return f"{render(self.lhs())} = {render(self.rhs)}"

    def __str__(self):
        return self.render()


@dataclass(frozen=True)
class RecurrenceSystem:
    equations: tuple

    @property
    def unknowns(self):
        return [eq.unknown for eq in self.equations]

    @property
    def var(self):
        return self.equations[0].var

    def equation(self, name) -> RecurrenceSpec:
        for eq in self.equations:
            if eq.unknown == name:
                return eq
        raise KeyError(name)

    def render(self) -> str:
        return "; ".join(eq.render() for eq in self.equations)

    def __str__(self):
        return self.render()


def build_spec(name, index_vars, terms: dict, forcing, prefix_sum_coeff=None, ics=None) -> RecurrenceSpec:
    """Assemble a linear spec from its parts; terms maps (name, key) -> coeff."""
    from .expr import normalize

    index_vars = tuple(index_vars)
    terms = {k: normalize(as_expr(c)) for k, c in terms.items()}
    terms = {k: c for k, c in terms.items() if c != 0}
    parts = [as_expr(forcing)]
    parts += [mul(c, reference(n, index_vars, key)) for (n, key), c in terms.items()]
    if prefix_sum_coeff is not None:
        parts.append(mul(prefix_sum_coeff, prefix_sum(name, index_vars[0])))
    return RecurrenceSpec(
        name,
        index_vars,
        terms,
        normalize(as_expr(forcing)),
        normalize(add(*parts)),
        normalize(as_expr(prefix_sum_coeff)) if prefix_sum_coeff is not None else None,
        (),
        dict(ics or {}),
    )


def prefix_sum(name: str, var: str, bound: str = "k") -> Expr:
    return func("sum", unknown(name, sym(bound)), sym(bound), 0, add(sym(var), -1))


def render_conditions(ics: dict, name: str = "x") -> str:
    parts = []
    for key in sorted(ics, key=lambda k: tuple((0, x) if isinstance(x, int) else (1, x) for x in k)):
        idx = ",".join(str(x) for x in key)
        parts.append(f"{name}({idx})={render(ics[key])}")
    return ";".join(parts)


# ---------------------------------------------------------------------------
# solutions

EXACT, BOUNDS, UNSOLVED = "exact", "bounds", "unsolved"


@dataclass(frozen=True)
class Verification:
    checked_up_to: int
    ok: bool
    verdict: str = ""  # certified / sampled / refuted / ...
    detail: str = ""


@dataclass(frozen=True)
class Solution:
    kind: str
    expr: Expr | None = None
    lower: Expr | None = None
    upper: Expr | None = None
    reason: str = ""
    domain: str = ""
    assumptions: tuple = ()
    classification: str = ""
    verification: Verification | None = None
    extra: dict = field(default_factory=dict, compare=False)

    @staticmethod
    def exact(expr, domain="all n >= 0", assumptions=(), **kw):
        return Solution(EXACT, expr=as_expr(expr), domain=domain, assumptions=tuple(assumptions), **kw)

    @staticmethod
    def bounds(lower, upper, domain="all n >= 0", assumptions=(), **kw):
        return Solution(
            BOUNDS, lower=as_expr(lower), upper=as_expr(upper), domain=domain, assumptions=tuple(assumptions), **kw
        )

    @staticmethod
    def unsolved(reason, **kw):
        return Solution(UNSOLVED, reason=reason, **kw)

    @property
    def is_exact(self):
        return self.kind == EXACT

    @property
    def is_bounds(self):
        return self.kind == BOUNDS

    def replace(self, **changes) -> "Solution":
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update(changes)
        return Solution(**d)

