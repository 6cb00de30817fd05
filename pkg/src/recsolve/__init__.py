"""Exact classification, solving and bounding of recurrence relations."""

from .classify import Classification, classify, render_solution, solve
from .model import RecurrenceSpec, RecurrenceSystem, Solution, Verification
from .parser import parse, parse_expr, parse_initial_conditions
from .verify import check_bounds_numeric, check_solution_symbolic, iterate_oracle

__all__ = [
    "Classification",
    "RecurrenceSpec",
    "RecurrenceSystem",
    "Solution",
    "Verification",
    "check_bounds_numeric",
    "check_solution_symbolic",
    "classify",
    "iterate_oracle",
    "parse",
    "parse_expr",
    "parse_initial_conditions",
    "render_solution",
    "solve",
]

__version__ = "0.1.0"
