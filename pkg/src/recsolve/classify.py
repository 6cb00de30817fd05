"""Classification of recurrences and the verifying solve entry point."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .approxbounds import DEFAULT_WIDTH, sandwich_solution
from .dcbounds import dc_bounds, dc_spec, domain_text, _chain_form
from .errors import (
    EvaluationError,
    IrrationalValue,
    MissingInitialCondition,
    NotReducible,
    RecsolveError,
    SymbolicBlocked,
    Unsupported,
)
from .expr import (
    Expr,
    as_expr,
    as_number,
    eval_exact,
    eval_interval,
    eval_number,
    is_numeric,
    normalize,
    render,
    substitute,
)
from .linsolve import (
    default_system_conditions,
    eliminate_system,
    ic_symbol,
    shift_gcd,
    solve_by_reduction,
    solve_constant,
)
from .model import RecurrenceSpec, RecurrenceSystem, Solution, Verification, is_div_key
from .transforms import linearize_nonlinear, reduce_infinite_order, rewrite_multivariate
from .varsolve import solve_first_order_var
from .verify import (
    REFUTED,
    check_bounds_numeric,
    check_solution_symbolic,
    default_bindings,
    dc_points,
    eval_factored,
    iterate_oracle_factored,
    oracle_at,
    spec_parameters,
)

DEFAULT_HORIZON = 64
MODES = ("auto", "exact", "bounds")


@dataclass(frozen=True)
class Classification:
    kind: str
    order: int | None = None
    alpha: Fraction | None = None
    beta: Fraction | None = None
    reason: str = ""

    def __str__(self):
        if self.kind in ("LinearConstCoeff", "LinearVarCoeff"):
            return f"{self.kind}({self.order})"
        if self.kind == "DivideConquer":
            return f"DivideConquer({self.alpha}, {self.beta})"
        if self.kind == "Unsupported":
            return f"Unsupported({self.reason})"
        return self.kind


def classify(spec) -> Classification:
    if isinstance(spec, RecurrenceSystem):
        return Classification("System")
    if len(spec.index_vars) > 1:
        return Classification("Multivariate")
    if spec.prefix_sum_coeff is not None:
        return Classification("InfiniteOrder")
    if spec.nonlinear_terms:
        return Classification("NonLinear")
    if spec.cross_terms:
        return Classification("Unsupported", reason="references to other unknowns")
    if spec.is_divide_conquer:
        keys = list(spec.shift_terms)
        if len(keys) != 1:
            return Classification("Unsupported", reason="more than one divided reference")
        c = spec.shift_terms[keys[0]]
        alpha = as_number(c) if is_numeric(c) else None
        if not isinstance(alpha, Fraction):
            return Classification("Unsupported", reason=f"coefficient {render(c)} is not a literal rational")
        beta = Fraction(keys[0][1])
        if alpha <= 0 or beta <= 1:
            return Classification("Unsupported", reason="need alpha > 0 and beta > 1")
        return Classification("DivideConquer", alpha=alpha, beta=beta)
    shifts = spec.shift_terms
    if not shifts:
        return Classification("Unsupported", reason="no reference to the unknown")
    if any(k[0] <= 0 for k in shifts):
        return Classification("Unsupported", reason="forward references")
    order = spec.order
    var = spec.var
    if any(c.depends_on(var) for c in shifts.values()):
        return Classification("LinearVarCoeff", order)
    return Classification("LinearConstCoeff", order)


# ---------------------------------------------------------------------------
# dispatch


def _reason(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def _default_conditions(spec: RecurrenceSpec, ics: dict, start: int = 0) -> dict:
    """Symbolic x0, x1, ... when no conditions are given."""
    if ics or len(spec.index_vars) != 1:
        return dict(ics)
    if spec.is_divide_conquer:
        return {(1,): ic_symbol(spec.unknown, 1)}
    if spec.prefix_sum_coeff is not None:
        return {}
    return {(i,): ic_symbol(spec.unknown, i) for i in range(start, start + max(spec.order, 1))}


def _solve_exact(spec, cls: Classification, ics: dict, width) -> Solution:
    k = cls.kind
    if k == "LinearConstCoeff":
        try:
            res = solve_constant(spec, ics)
            conds = {(i,): v for i, v in res.conditions.items()}
            return Solution.exact(res.to_expr(), domain=f"all {spec.var} >= {res.start}", extra={"conditions": conds})
        except Unsupported as first:
            try:
                shift_gcd(spec) > 1 or _raise(NotReducible("gcd 1"))
                red = solve_by_reduction(spec, ics)
            except RecsolveError:
                if cls.order == 1:
                    return _solve_exact(spec, Classification("LinearVarCoeff", 1), ics, width)
                raise first
            if red.combined is not None:
                return Solution.exact(red.combined, domain=f"all {spec.var} >= {red.start}")
            return Solution("exact", domain=f"all {spec.var} >= {red.start}", extra={"reduced": red})
    if k == "LinearVarCoeff":
        if cls.order != 1:
            raise Unsupported("higher-order variable coefficients")
        sol = solve_first_order_var(spec, ics)
        return sol
    if k == "NonLinear":
        tr = linearize_nonlinear(spec, ics)
        inner = _solve_exact(tr.transformed, classify(tr.transformed), tr.transformed.initial_conditions, width)
        expr = tr.apply_inverse(inner.expr)
        return Solution.exact(expr, domain=f"all {spec.var} >= {tr.first_index}", assumptions=tr.assumptions, extra={"transform": tr.inverse})
    if k == "InfiniteOrder":
        tr = reduce_infinite_order(spec, ics)
        inner = solve_first_order_var(tr.transformed)
        expr = inner.expr
        start = 1
        x0 = ics.get((0,), None)
        x0 = as_expr(x0) if x0 is not None else normalize(substitute(spec.forcing, {spec.var: 0}))
        try:
            if eval_number(expr, {spec.var: 0}) == eval_number(x0):
                start = 0
        except (EvaluationError, RecsolveError, ZeroDivisionError):
            pass
        dom = f"all {spec.var} >= {start}" + ("" if start == 0 else f"; {spec.unknown}(0) = {render(x0)}")
        return Solution.exact(expr, domain=dom, assumptions=tr.assumptions, extra={"transform": tr.inverse, "reduced": tr.transformed})
    if k == "DivideConquer":
        d = dc_spec(spec, ics)
        if len(d.bases) != 1:
            raise Unsupported("several base chains; only bounds are available")
        return Solution.exact(_chain_form(d, *d.bases[0]), domain=domain_text(d))
    if k == "Multivariate":
        tr = rewrite_multivariate(spec, ics)
        inner = _solve_exact(tr.transformed, classify(tr.transformed), tr.transformed.initial_conditions, width)
        if inner.expr is None:
            raise Unsupported("piecewise chain solution")
        return Solution.exact(tr.apply_inverse(inner.expr), domain=f"all {spec.index_vars} with {tr.transformed.var} >= {tr.first_index}", extra={"transform": tr.inverse})
    if k == "System":
        derived = eliminate_system(spec, conds=ics or None)
        inner_cls = classify(derived)
        inner = _solve_exact(derived, inner_cls, derived.initial_conditions, width)
        return inner.replace(extra={**inner.extra, "derived": derived})
    raise Unsupported(cls.reason or k)


def _raise(exc):
    raise exc


def _solve_bounds(spec, cls: Classification, ics: dict, width) -> Solution:
    k = cls.kind
    if k == "DivideConquer":
        return dc_bounds(spec, ics)
    if k == "LinearConstCoeff":
        return sandwich_solution(spec, ics, width)
    if k == "System":
        derived = eliminate_system(spec, conds=ics or None)
        inner = _solve_bounds(derived, classify(derived), derived.initial_conditions, width)
        return inner.replace(extra={**inner.extra, "derived": derived})
    sol = _solve_exact(spec, cls, ics, width)
    if sol.expr is None:
        raise Unsupported("no single expression to use as bounds")
    return Solution.bounds(sol.expr, sol.expr, domain=sol.domain, assumptions=sol.assumptions, extra={**sol.extra, "tight": True})


def solve(spec, ics=None, mode: str = "auto", horizon: int = DEFAULT_HORIZON, width=DEFAULT_WIDTH) -> Solution:
    """Classify, solve or bound, and verify.

    auto tries an exact solution first and falls back to bounds.  Every
    result carries a Verification; solver failures become Unsolved.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    cls = classify(spec)
    if isinstance(spec, RecurrenceSystem):
        ics = dict(ics or {})
    else:
        ics = dict(spec.initial_conditions if ics is None else ics)
        ics = _default_conditions(spec, ics)
    label = str(cls)
    if cls.kind == "Unsupported":
        return Solution.unsolved(f"Unsupported: {cls.reason}", classification=label)
    attempts = {"exact": [_solve_exact], "bounds": [_solve_bounds], "auto": [_solve_exact, _solve_bounds]}[mode]
    errors = []
    for attempt in attempts:
        try:
            sol = attempt(spec, cls, ics, width)
        except RecursionError:
            errors.append("RecursionError: expression too deep")
            continue
        except (RecsolveError, ZeroDivisionError) as exc:
            errors.append(_reason(exc))
            continue
        sol = sol.replace(classification=label)
        return sol.replace(verification=verify_solution(spec, sol, ics, horizon))
    return Solution.unsolved(errors[0] if len(errors) == 1 else "; ".join(dict.fromkeys(errors)), classification=label)


# ---------------------------------------------------------------------------
# verification


def _bindings_for(spec, sol: Solution, ics) -> dict:
    names = set()
    for e in (sol.expr, sol.lower, sol.upper):
        if e is not None:
            names |= e.free_symbols()
    if isinstance(spec, RecurrenceSystem):
        for eq in spec.equations:
            names |= spec_parameters(eq, {})
        for c in (ics or {}).values():
            for v in c.values():
                names |= as_expr(v).free_symbols()
        return default_bindings(names - {spec.var})
    names |= spec_parameters(spec, ics)
    return default_bindings(names - set(spec.index_vars))


def _agree(expr: Expr, env: dict, want) -> bool:
    """expr(env) == want; irrational values must keep want in every enclosure."""
    try:
        return eval_number(expr, env) == want
    except IrrationalValue:
        pass
    except EvaluationError:
        return False
    prec = 256
    while prec <= 4096:
        iv = eval_interval(expr, env, prec)
        if not iv.lo <= want <= iv.hi:
            return False
        prec *= 2
    return True


def _start_of(domain: str) -> int:
    import re

    m = re.search(r">= (-?\d+)", domain or "")
    return int(m.group(1)) if m else 0


def verify_solution(spec, sol: Solution, ics: dict, horizon: int = DEFAULT_HORIZON) -> Verification:
    """Symbolic check where possible plus exact oracle comparison up to the horizon."""
    try:
        bind = _bindings_for(spec, sol, ics)
        if sol.is_bounds:
            return _verify_bounds(spec, sol, ics, horizon, bind)
        return _verify_exact(spec, sol, ics, horizon, bind)
    except (SymbolicBlocked, MissingInitialCondition) as exc:
        return Verification(0, True, "unchecked", _reason(exc))


def _verify_bounds(spec, sol, ics, horizon, bind) -> Verification:
    if isinstance(spec, RecurrenceSystem):
        return _verify_system(spec, sol, ics, horizon, bind)
    if spec.is_divide_conquer:
        k = min(horizon, 30)
        rep = check_bounds_numeric(spec, ics, sol, k, bind)
        return Verification(k, rep.ok, "sampled", _bounds_detail(rep, "k"))
    rep = check_bounds_numeric(spec, ics, sol, horizon, bind)
    return Verification(horizon, rep.ok, "sampled", _bounds_detail(rep, spec.var))


def _bounds_detail(rep, label) -> str:
    if rep.first_violation:
        n, side, x = rep.first_violation
        return f"{side} bound fails at {n} (value {x})"
    if rep.undecided:
        return f"undecided at {rep.undecided[0]}"
    return f"{rep.checked} points checked"


def _verify_exact(spec, sol, ics, horizon, bind) -> Verification:
    if isinstance(spec, RecurrenceSystem):
        return _verify_system(spec, sol, ics, horizon, bind)
    if "reduced" in sol.extra and sol.expr is None:
        red = sol.extra["reduced"]
        vals = oracle_at(spec, ics, list(range(red.start, horizon + 1)), bind)
        for n, want in vals.items():
            if not _agree(red.piece_at(n), bind, want):
                return Verification(horizon, False, "refuted", f"piece disagrees with the oracle at {n}")
        return Verification(horizon, True, "sampled", "pieces agree with the oracle")
    verdict = check_solution_symbolic(spec, sol.expr, ics)
    if verdict.status == REFUTED and "reduced" in sol.extra and hasattr(sol.extra["reduced"], "rhs"):
        # infinite order: the sum includes x(0) given separately
        verdict = check_solution_symbolic(sol.extra["reduced"], sol.expr)
    if verdict.status == REFUTED:
        return Verification(horizon, False, REFUTED, f"residual nonzero at {verdict.witness}")
    if spec.is_divide_conquer:
        chains = dc_points(spec, ics, None, min(horizon, 30))
        pts = sorted({n for ch in chains.values() for n in ch})
        vals = oracle_at(spec, ics, pts, bind)
        checked = min(horizon, 30)
    elif len(spec.index_vars) > 1:
        from itertools import product

        lim = 20
        pts = [p for p in product(range(lim + 1), repeat=len(spec.index_vars)) if sum(p) <= lim]
        vals = oracle_at(spec, ics, pts, bind)
        checked = lim
    elif spec.nonlinear_terms:
        return _verify_factored(spec, sol, ics, horizon, bind, verdict.status)
    else:
        start = _start_of(sol.domain)
        pts = list(range(start, horizon + 1))
        vals = oracle_at(spec, ics, pts, bind)
        checked = horizon
    for p, want in vals.items():
        idx = p if isinstance(p, tuple) else (p,)
        env = dict(bind)
        env.update({v: Fraction(i) for v, i in zip(spec.index_vars, idx)})
        if not _agree(sol.expr, env, want):
            return Verification(checked, False, "refuted", f"disagrees with the oracle at {p}")
    return Verification(checked, True, verdict.status, "oracle agrees")


def _verify_factored(spec, sol, ics, horizon, bind, status) -> Verification:
    start = _start_of(sol.domain)
    vals = iterate_oracle_factored(spec, ics, horizon, bind)
    for n in range(start, horizon + 1):
        if vals[n] is None:
            continue
        if eval_factored(sol.expr, {**bind, spec.var: Fraction(n)}) != vals[n]:
            return Verification(horizon, False, "refuted", f"disagrees with the oracle at {n}")
    return Verification(horizon, True, status, "oracle agrees (factored values)")


def _verify_system(system, sol, ics, horizon, bind) -> Verification:
    from .linsolve import _co_iterate
    from .verify import compare_ge, compare_le

    target = system.unknowns[0]
    conds = {**default_system_conditions(system), **(ics or {})}
    vals = _co_iterate(system, conds, horizon)[target]
    start = _start_of(sol.domain)
    for n in range(start, horizon + 1):
        want = eval_exact(vals[n], bind)
        env = {**bind, system.var: Fraction(n)}
        if sol.is_bounds:
            ok = compare_le(sol.lower, want, env) and compare_ge(sol.upper, want, env)
        else:
            ok = _agree(sol.expr, env, want)
        if not ok:
            return Verification(horizon, False, "refuted", f"disagrees with the system at {n}")
    derived = sol.extra.get("derived")
    status = "sampled"
    if derived is not None and sol.is_exact:
        status = check_solution_symbolic(derived, sol.expr).status
    return Verification(horizon, True, status, "agrees with the co-iterated system")


def render_solution(spec, sol: Solution) -> str:
    """Single-line rendering of the result (closed form, bounds or reason)."""
    lhs = _lhs(spec)
    if sol.is_exact:
        if sol.expr is not None:
            return f"{lhs} = {render(sol.expr)}"
        red = sol.extra["reduced"]
        name = lhs.split("(")[0]
        g, m = red.modulus, red.sub_var
        return "; ".join(f"{name}({g}*{m} + {r}) = {render(p)}" if r else f"{name}({g}*{m}) = {render(p)}" for r, p in red.pieces)
    if sol.is_bounds:
        return f"{render(sol.lower)} <= {lhs} <= {render(sol.upper)}"
    return f"unsolved: {sol.reason}"


def _lhs(spec) -> str:
    if isinstance(spec, RecurrenceSystem):
        return render(spec.equations[0].lhs())
    return render(spec.lhs())
