"""Exact number types: rationals, real quadratic surds and rational intervals.

Rationals are :class:`fractions.Fraction`.  A :class:`QuadSurd` is an element
``a + b*sqrt(d)`` of a real quadratic field; operations between surds over
different fields raise :class:`MixedFieldError`.  :class:`Interval` gives
outward-rounded rational enclosures used wherever a quantity (a logarithm,
an irrational power) has no exact rational value.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering

from .errors import DomainError


class MixedFieldError(ArithmeticError):
    pass


def squarefree_decompose(n: int) -> tuple[int, int]:
    """Return ``(s, d)`` with ``n == s*s*d`` and ``d`` squarefree (n > 0)."""
    if n <= 0:
        raise ValueError("n must be positive")
    s, d = 1, 1
    for p, e in factorint(n).items():
        s *= p ** (e // 2)
        if e % 2:
            d *= p
    return s, d


def factorint(n: int, limit: int = 10**7) -> dict[int, int]:
    """Trial-division factorization; cofactors above ``limit**2`` are kept whole."""
    n = abs(n)
    out: dict[int, int] = {}
    p = 2
    while p * p <= n and p <= limit:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def int_root(n: int, k: int) -> int | None:
    """Exact integer k-th root of n >= 0, or None."""
    if n < 0:
        return None
    if n < 2:
        return n
    # Newton from above; 2^ceil(bits/k) is never below the root
    r = 1 << -(-n.bit_length() // k)
    while True:
        nr = ((k - 1) * r + n // r ** (k - 1)) // k
        if nr >= r:
            break
        r = nr
    for c in (r - 1, r, r + 1):
        if c >= 0 and c**k == n:
            return c
    return None


def rational_root(q: Fraction, k: int) -> Fraction | None:
    """Exact k-th root of a non-negative rational, or None."""
    if q < 0:
        if k % 2 == 1:
            r = rational_root(-q, k)
            return None if r is None else -r
        return None
    a = int_root(q.numerator, k)
    b = int_root(q.denominator, k)
    if a is None or b is None:
        return None
    return Fraction(a, b)


@total_ordering
class QuadSurd:
    """``a + b*sqrt(d)`` with rational a, b (b != 0) and squarefree d > 1."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d: int):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.d = d

    @staticmethod
    def make(a, b, d: int):
        """Canonical constructor: collapses to Fraction when b == 0."""
        a, b = Fraction(a), Fraction(b)
        if b == 0:
            return a
        if d <= 1:
            raise ValueError("surd radicand must be > 1")
        s, sf = squarefree_decompose(d)
        if sf == 1:
            return a + b * s
        return QuadSurd(a, b * s, sf)

    def _coerce(self, other):
        if isinstance(other, QuadSurd):
            if other.d != self.d:
                raise MixedFieldError(f"sqrt({self.d}) and sqrt({other.d})")
            return other.a, other.b
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0)
        return None

    def __add__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return QuadSurd.make(self.a + c[0], self.b + c[1], self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadSurd(-self.a, -self.b, self.d)

    def __sub__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return QuadSurd.make(self.a - c[0], self.b - c[1], self.d)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b = c
        return QuadSurd.make(self.a * a + self.b * b * self.d, self.a * b + self.b * a, self.d)

    __rmul__ = __mul__

    def conjugate(self):
        return QuadSurd(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    def inverse(self):
        n = self.norm()
        return QuadSurd.make(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        if isinstance(other, QuadSurd):
            if other.d != self.d:
                raise MixedFieldError(f"sqrt({self.d}) and sqrt({other.d})")
            return self * other.inverse()
        if isinstance(other, (int, Fraction)):
            return QuadSurd.make(self.a / other, self.b / other, self.d)
        return NotImplemented

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k):
        if not isinstance(k, int):
            if isinstance(k, Fraction) and k.denominator == 1:
                k = int(k)
            else:
                return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = Fraction(1)
        base = self
        while k:
            if k & 1:
                result = base * result
            base = base * base
            k >>= 1
        return result

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == 0 or sa == sb:
            return sb if sa == 0 else sa
        if sb == 0:
            return sa
        # opposite signs: compare a^2 with b^2 d
        diff = self.a * self.a - self.b * self.b * self.d
        return sa if diff > 0 else sb

    def __eq__(self, other):
        if isinstance(other, QuadSurd):
            return (self.a, self.b, self.d) == (other.a, other.b, other.d)
        if isinstance(other, (int, Fraction)):
            return False
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __lt__(self, other):
        if isinstance(other, (QuadSurd, int, Fraction)):
            return num_sign(self - other) < 0
        return NotImplemented

    def __le__(self, other):
        if isinstance(other, (QuadSurd, int, Fraction)):
            return num_sign(self - other) <= 0
        return NotImplemented

    def __gt__(self, other):
        if isinstance(other, (QuadSurd, int, Fraction)):
            return num_sign(self - other) > 0
        return NotImplemented

    def __ge__(self, other):
        if isinstance(other, (QuadSurd, int, Fraction)):
            return num_sign(self - other) >= 0
        return NotImplemented

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __repr__(self):
        return f"QuadSurd({self.a}, {self.b}, {self.d})"

    def __str__(self):
        return f"{self.a}+{self.b}*sqrt({self.d})"

    def enclosure(self, prec: int = 64) -> "Interval":
        r = isqrt_interval(Fraction(self.d), prec)
        return Interval.point(self.a) + Interval.point(self.b) * r


Number = "Fraction | QuadSurd"


def num_sign(x) -> int:
    if isinstance(x, QuadSurd):
        return x.sign()
    return (x > 0) - (x < 0)


def is_rational(x) -> bool:
    return isinstance(x, (int, Fraction))


def num_pow(x, k: int):
    if isinstance(x, QuadSurd):
        return x**k
    return Fraction(x) ** k


def sqrt_number(q):
    """Square root of a non-negative rational as Fraction or QuadSurd."""
    q = Fraction(q)
    if q < 0:
        raise DomainError(f"square root of negative number {q}")
    r = rational_root(q, 2)
    if r is not None:
        return r
    # sqrt(p/q) = sqrt(p*q)/q
    s, d = squarefree_decompose(q.numerator * q.denominator)
    return QuadSurd.make(0, Fraction(s, q.denominator), d)


# ---------------------------------------------------------------------------
# Intervals


def _floor_to(x: Fraction, prec: int) -> Fraction:
    scale = 1 << prec
    return Fraction(math.floor(x * scale), scale)


def _ceil_to(x: Fraction, prec: int) -> Fraction:
    scale = 1 << prec
    return Fraction(math.ceil(x * scale), scale)


class Interval:
    """Closed rational interval ``[lo, hi]`` with outward-rounded operations."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo, hi = Fraction(lo), Fraction(hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @staticmethod
    def point(x):
        return Interval(x, x)

    @staticmethod
    def of(x, prec: int = 64):
        if isinstance(x, Interval):
            return x
        if isinstance(x, QuadSurd):
            return x.enclosure(prec)
        return Interval.point(x)

    def round(self, prec: int) -> "Interval":
        """Coarsen endpoints to a dyadic grid, never shrinking the interval."""
        return Interval(_floor_to(self.lo, prec), _ceil_to(self.hi, prec))

    def width(self) -> Fraction:
        return self.hi - self.lo

    def __add__(self, other):
        other = Interval.of(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-Interval.of(other))

    def __rsub__(self, other):
        return Interval.of(other) - self

    def __mul__(self, other):
        other = Interval.of(other)
        ps = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(ps), max(ps))

    __rmul__ = __mul__

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def inverse(self):
        if self.contains_zero():
            raise ZeroDivisionError("interval contains zero")
        return Interval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * Interval.of(other).inverse()

    def __rtruediv__(self, other):
        return Interval.of(other) * self.inverse()

    def __pow__(self, k: int):
        if k == 0:
            return Interval.point(1)
        if k < 0:
            return self.inverse() ** (-k)
        if k % 2 == 1 or self.lo >= 0:
            return Interval(min(self.lo**k, self.hi**k), max(self.lo**k, self.hi**k))
        if self.hi <= 0:
            return Interval(self.hi**k, self.lo**k)
        return Interval(0, max(self.lo**k, self.hi**k))

    def __repr__(self):
        return f"Interval({self.lo}, {self.hi})"

    def __eq__(self, other):
        return isinstance(other, Interval) and (self.lo, self.hi) == (other.lo, other.hi)

    def __hash__(self):
        return hash((self.lo, self.hi))


def isqrt_interval(q: Fraction, prec: int) -> Interval:
    if q < 0:
        raise DomainError("square root of negative number")
    scale = 1 << (2 * prec)
    lo = math.isqrt(math.floor(q * scale))
    hi = lo if lo * lo == q * scale else lo + 1
    return Interval(Fraction(lo, 1 << prec), Fraction(hi, 1 << prec))


def _atanh_enclosure(z: Fraction, prec: int) -> Interval:
    # 0 <= z <= 1/3; tail after N terms <= z^(2N+1) / ((2N+1)(1 - z^2))
    total = Fraction(0)
    power = z
    k = 0
    eps = Fraction(1, 1 << (prec + 2))
    while True:
        total += power / (2 * k + 1)
        power = power * z * z
        k += 1
        tail = power / ((2 * k + 1) * (1 - z * z))
        if tail <= eps:
            break
    return Interval(_floor_to(total, prec + 2), _ceil_to(total + tail, prec + 2))


def log_enclosure(q, prec: int = 64) -> Interval:
    """Enclosure of the natural log of a positive rational."""
    q = Fraction(q)
    if q <= 0:
        raise DomainError(f"log of non-positive value {q}")
    if q == 1:
        return Interval.point(0)
    e = q.numerator.bit_length() - q.denominator.bit_length()
    m = q / Fraction(2) ** e
    while m >= 2:
        m /= 2
        e += 1
    while m < 1:
        m *= 2
        e -= 1
    log2 = _atanh_enclosure(Fraction(1, 3), prec + 8) * 2
    z = (m - 1) / (m + 1)
    logm = _atanh_enclosure(z, prec + 8) * 2 if z else Interval.point(0)
    return (log2 * e + logm).round(prec)


def _exp_point(x: Fraction, prec: int) -> Interval:
    s = 0
    ax = abs(x)
    while ax > Fraction(1, 2):
        ax /= 2
        s += 1
    y = _floor_to(x / (1 << s), prec + s + 8)
    y_hi = _ceil_to(x / (1 << s), prec + s + 8)
    # |y| <= 1/2: Taylor tail after the term y^k/k! is at most 2*|y|^(k+1)/(k+1)!
    total = Fraction(0)
    term = Fraction(1)
    k = 0
    eps = Fraction(1, 1 << (prec + s + 8))
    while True:
        total += term
        k += 1
        term = term * y / k
        if abs(term) * 2 <= eps:
            break
    slack = abs(term) * 2
    enc = Interval(_floor_to(total - slack, prec + s + 8), _ceil_to(total + slack, prec + s + 8))
    if y_hi != y:
        # exp is increasing: widen by exp(y_hi - y) <= 1 + 2*(y_hi - y)
        enc = Interval(enc.lo, enc.hi * (1 + 2 * (y_hi - y)))
    for _ in range(s):
        enc = (enc * enc).round(prec + s + 8)
    return enc.round(prec)


def exp_enclosure(x, prec: int = 64) -> Interval:
    iv = Interval.of(x, prec)
    lo = _exp_point(iv.lo, prec)
    hi = lo if iv.hi == iv.lo else _exp_point(iv.hi, prec)
    return Interval(lo.lo, hi.hi)


def log_interval(iv: Interval, prec: int = 64) -> Interval:
    if iv.lo <= 0:
        raise DomainError("log of interval reaching non-positive values")
    lo = log_enclosure(iv.lo, prec)
    hi = lo if iv.hi == iv.lo else log_enclosure(iv.hi, prec)
    return Interval(lo.lo, hi.hi)


def power_interval(base: Interval, exponent: Interval, prec: int = 64) -> Interval:
    """``base**exponent`` for a positive base via exp(exponent * log(base))."""
    if exponent.lo == exponent.hi and exponent.lo.denominator == 1:
        return base ** int(exponent.lo)
    return exp_enclosure(exponent * log_interval(base, prec), prec)
