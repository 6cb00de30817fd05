"""Gaussian elimination over exact fields (Fraction / QuadSurd entries)."""

from __future__ import annotations

from fractions import Fraction

from .errors import SingularSystem


def _is_zero(x) -> bool:
    return x == 0


def rref(rows, ncols):
    """Reduced row echelon form of an augmented matrix; returns (rows, pivots)."""
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if not _is_zero(m[i][c])), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and not _is_zero(m[i][c]):
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def solve_any(A, b):
    """One solution of A x = b (free variables set to 0), or None."""
    n = len(A[0]) if A else 0
    aug = [list(row) + [rhs] for row, rhs in zip(A, b)]
    m, pivots = rref(aug, n)
    for row in m[len(pivots):]:
        if not _is_zero(row[n]):
            return None
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = m[i][n]
    return x


def inverse(A):
    n = len(A)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    m, pivots = rref(aug, n)
    if len(pivots) != n:
        raise SingularSystem("matrix is singular")
    return [row[n:] for row in m]


def solve(A, b):
    """Unique solution of a square system, else SingularSystem."""
    x = solve_any(A, b)
    n = len(A)
    _, pivots = rref([list(r) for r in A], n)
    if x is None or len(pivots) != n:
        raise SingularSystem("system has no unique solution")
    return x
