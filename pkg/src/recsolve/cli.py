"""Command line front end.

    recsolve solve "x(n)=5*x(n-1)-6*x(n-2)+n^2" --init "x(0)=0;x(1)=1"
    recsolve batch stanzas.txt

Exit codes: 0 solved and verified, 1 usage or parse error, 2 unsolved,
3 verification failed (the result is still printed).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .approxbounds import DEFAULT_WIDTH
from .classify import DEFAULT_HORIZON, MODES, render_solution, solve
from .errors import ParseError, RecsolveError
from .expr import render
from .model import RecurrenceSystem
from .parser import parse, parse_conditions_by_unknown
from .verify import dc_points, default_bindings, oracle_at, spec_parameters

EXIT_OK, EXIT_USAGE, EXIT_UNSOLVED, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational p/q, got {text!r}") from None
    if q <= 0:
        raise argparse.ArgumentTypeError("root width must be positive")
    return q


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def load(text: str, init: str | None):
    """Parse a recurrence and its conditions; ParseError on bad input."""
    spec = parse(text)
    by_name = parse_conditions_by_unknown(init) if init and init.strip() else {}
    if isinstance(spec, RecurrenceSystem):
        stray = sorted(set(by_name) - set(spec.unknowns))
        if stray:
            raise ParseError(f"condition for {stray[0]}, which is not an unknown of the system", 0, None, init)
        return spec, by_name
    stray = sorted(set(by_name) - {spec.unknown})
    if stray:
        raise ParseError(f"condition for {stray[0]}, but the unknown is {spec.unknown}", 0, None, init)
    ics = by_name.get(spec.unknown)
    return spec, ics


def exit_code(sol) -> int:
    if sol.kind == "unsolved":
        return EXIT_UNSOLVED
    if sol.verification is not None and not sol.verification.ok:
        return EXIT_VERIFY
    return EXIT_OK


def to_json(spec, sol) -> dict:
    out = {"classification": sol.classification, "status": sol.kind}
    if sol.is_exact:
        out["closed_form"] = render(sol.expr) if sol.expr is not None else render_solution(spec, sol)
    elif sol.is_bounds:
        out["lower"] = render(sol.lower)
        out["upper"] = render(sol.upper)
    else:
        out["reason"] = sol.reason
    out["domain"] = sol.domain
    out["assumptions"] = list(sol.assumptions)
    v = sol.verification
    out["verification"] = {"checked_up_to": v.checked_up_to if v else 0, "ok": bool(v and v.ok)}
    return out


def to_text(spec, sol) -> str:
    lines = [f"classification: {sol.classification}", render_solution(spec, sol)]
    if sol.kind != "unsolved":
        lines.append(f"domain: {sol.domain}")
        if sol.assumptions:
            lines.append("assumptions: " + "; ".join(sol.assumptions))
        v = sol.verification
        if v is not None:
            lines.append(f"verification: {v.verdict}, checked up to {v.checked_up_to} ({v.detail})")
            if not v.ok:
                lines.append("warning: the result failed verification")
    return "\n".join(lines)


def table(spec, ics, N: int) -> list:
    """(n, value) rows from the iteration oracle."""
    if isinstance(spec, RecurrenceSystem) or len(spec.index_vars) != 1:
        raise UsageError("--table needs a single univariate recurrence")
    ics = spec.initial_conditions if ics is None else ics
    if spec_parameters(spec, ics):
        raise UsageError("--table needs numeric parameters and initial conditions")
    if spec.is_divide_conquer:
        chains = dc_points(spec, ics, N)
        points = sorted({n for ch in chains.values() for n in ch})
    else:
        if not ics:
            raise UsageError("--table needs initial conditions")
        start = min(k[0] for k in ics)
        points = list(range(start, N + 1))
    vals = oracle_at(spec, ics, points, default_bindings(()))
    return [(n, vals[n]) for n in points]


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def run_one(text, init, mode, horizon, width):
    spec, ics = load(text, init)
    sol = solve(spec, ics, mode=mode, horizon=horizon, width=width)
    return spec, ics, sol


def cmd_solve(args, out, err) -> int:
    try:
        spec, ics, sol = run_one(args.recurrence, args.init, args.mode, args.verify, args.root_width)
        rows = table(spec, ics, args.table) if args.table is not None else None
    except ParseError as exc:
        print(exc.diagnostic(), file=err)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    if args.format == "json":
        doc = to_json(spec, sol)
        if rows is not None:
            doc["table"] = [[n, _fmt(v)] for n, v in rows]
        print(json.dumps(doc, sort_keys=False), file=out)
    else:
        print(to_text(spec, sol), file=out)
        if rows is not None:
            print("n,value", file=out)
            for n, v in rows:
                print(f"{n},{_fmt(v)}", file=out)
    return exit_code(sol)


def read_stanzas(text: str):
    """Blank-line separated stanzas: the recurrence on the first line,
    conditions on the following lines ('#' starts a comment line)."""
    stanzas, cur = [], []
    for line in text.splitlines() + [""]:
        s = line.strip()
        if s.startswith("#"):
            continue
        if not s:
            if cur:
                stanzas.append((cur[0], ";".join(cur[1:])))
                cur = []
            continue
        cur.append(s)
    return stanzas


def cmd_batch(args, out, err) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            stanzas = read_stanzas(fh.read())
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    worst = EXIT_OK
    for i, (rec, init) in enumerate(stanzas, 1):
        try:
            spec, _, sol = run_one(rec, init, args.mode, args.verify, args.root_width)
        except ParseError as exc:
            print(f"stanza {i}: {exc.diagnostic()}", file=err)
            print(json.dumps({"stanza": i, "status": "error", "reason": str(exc)}), file=out)
            worst = max(worst, EXIT_USAGE)
            continue
        doc = {"stanza": i, **to_json(spec, sol)}
        print(json.dumps(doc), file=out)
        worst = max(worst, exit_code(sol))
    return worst


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="recsolve", description="Solve and bound recurrence relations exactly.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(q):
        q.add_argument("--mode", choices=MODES, default="auto")
        q.add_argument("--verify", type=_nonneg, default=DEFAULT_HORIZON, metavar="N", help="oracle check horizon")
        q.add_argument("--root-width", type=_fraction, default=DEFAULT_WIDTH, metavar="P/Q", help="root enclosure width")

    s = sub.add_parser("solve", help="solve one recurrence or system")
    s.add_argument("recurrence")
    s.add_argument("--init", default=None, metavar="CONDS", help='e.g. "x(0)=0;x(1)=1"')
    s.add_argument("--format", choices=("text", "json"), default="text")
    s.add_argument("--table", type=_nonneg, default=None, metavar="N", help="print oracle values up to N")
    common(s)
    s.set_defaults(handler=cmd_solve)

    b = sub.add_parser("batch", help="solve every stanza of a file, one JSON line each")
    b.add_argument("file")
    common(b)
    b.set_defaults(handler=cmd_batch)
    return p


def run(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.handler(args, out, err)
    except RecsolveError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
