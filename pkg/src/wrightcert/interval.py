"""Outward-rounded interval arithmetic on binary64 endpoints.

Every operation returns an interval guaranteed to contain the exact
mathematical image of its arguments.  Outward rounding is realized by
directed post-operation endpoint nudging (``math.nextafter`` steps)
rather than switching the hardware rounding mode, which keeps the
kernel portable and thread-agnostic.  Additions and subtractions use an
exact error term (TwoSum) and multiplications an exact split (Dekker)
to skip the nudge when the float result is already exact, so identities
like ``[0,0] + x == x`` hold bit-for-bit.

Endpoints may be +/-inf, but only as the result of explicitly unbounded
constructions; ordinary arithmetic on finite operands stays finite
(overflow saturates at the largest finite float on the inward side,
which is still a valid enclosure).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_INF = math.inf
_REALMAX = math.nextafter(_INF, 0.0)
_SPLITTER = 134217729.0  # 2**27 + 1, Veltkamp split constant

# Documented enclosure margins for libm transcendentals, in units in the
# last place.  Validated against a high-precision oracle in the tests.
EXP_ULPS = 2
LOG_ULPS = 2

# Below this magnitude the libm ulp-error contract is not trusted
# (subnormal range); enclosures degrade to crude but sound bounds.
_TINY = 1e-300


class IntervalError(ValueError):
    """Base class for interval arithmetic errors."""


class DivisionByZeroInterval(IntervalError):
    """Denominator interval contains zero."""


class LogNonPositive(IntervalError):
    """Logarithm of an interval whose lower endpoint is not positive."""


class EmptyIntersection(IntervalError):
    """Raised by ``intersect_strict`` when the intersection is empty."""


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _dn(x: float) -> float:
    return math.nextafter(x, -_INF)


def add_up(a: float, b: float) -> float:
    """Smallest convenient float >= the exact sum a + b."""
    s = a + b
    if s == -_INF and math.isfinite(a) and math.isfinite(b):
        return -_REALMAX
    if math.isinf(s):
        return s
    bv = s - a
    err = (a - (s - bv)) + (b - bv)
    return _up(s) if err > 0.0 else s


def add_dn(a: float, b: float) -> float:
    """Largest convenient float <= the exact sum a + b."""
    s = a + b
    if s == _INF and math.isfinite(a) and math.isfinite(b):
        return _REALMAX
    if math.isinf(s):
        return s
    bv = s - a
    err = (a - (s - bv)) + (b - bv)
    return _dn(s) if err < 0.0 else s


def sub_up(a: float, b: float) -> float:
    return add_up(a, -b)


def sub_dn(a: float, b: float) -> float:
    return add_dn(a, -b)


def _prod_err_sign(a: float, b: float, p: float) -> int:
    """Sign of the exact error a*b - p, or 0; requires p finite normal-ish."""
    aa = a * _SPLITTER
    ah = aa - (aa - a)
    al = a - ah
    bb = b * _SPLITTER
    bh = bb - (bb - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    if err > 0.0:
        return 1
    if err < 0.0:
        return -1
    return 0


def mul_up(a: float, b: float) -> float:
    """Smallest convenient float >= the exact product a * b."""
    p = a * b
    if p != p:  # 0 * inf: set-product with a zero factor is {0}
        return 0.0
    if p == -_INF and math.isfinite(a) and math.isfinite(b):
        return -_REALMAX
    if math.isinf(p):
        return p
    if 2.0 ** -500 < abs(p) < 2.0 ** 500:
        return _up(p) if _prod_err_sign(a, b, p) > 0 else p
    if p == 0.0 and (a == 0.0 or b == 0.0):
        return 0.0
    return _up(p)


def mul_dn(a: float, b: float) -> float:
    """Largest convenient float <= the exact product a * b."""
    p = a * b
    if p != p:
        return 0.0
    if p == _INF and math.isfinite(a) and math.isfinite(b):
        return _REALMAX
    if math.isinf(p):
        return p
    if 2.0 ** -500 < abs(p) < 2.0 ** 500:
        return _dn(p) if _prod_err_sign(a, b, p) < 0 else p
    if p == 0.0 and (a == 0.0 or b == 0.0):
        return 0.0
    return _dn(p)


def div_up(a: float, b: float) -> float:
    """Smallest convenient float >= the exact quotient a / b (b != 0)."""
    if a == 0.0:
        return 0.0
    q = a / b
    if q != q:  # inf / inf: ratios of that sign are unbounded
        return _INF if (a > 0) == (b > 0) else 0.0
    if q == -_INF and math.isfinite(a) and math.isfinite(b):
        return -_REALMAX
    if math.isinf(q):
        return q
    return _up(q)


def div_dn(a: float, b: float) -> float:
    """Largest convenient float <= the exact quotient a / b (b != 0)."""
    if a == 0.0:
        return 0.0
    q = a / b
    if q != q:
        return -_INF if (a > 0) != (b > 0) else 0.0
    if q == _INF and math.isfinite(a) and math.isfinite(b):
        return _REALMAX
    if math.isinf(q):
        return q
    return _dn(q)


def exp_up(x: float) -> float:
    """Float >= exp(x)."""
    if x == -_INF:
        return 0.0
    if x == _INF:
        return _INF
    if x == 0.0:
        return 1.0
    v = math.exp(x)
    if v == _INF:
        return _INF
    if v < _TINY:
        return v * 2.0 if v > 0.0 else 5e-324
    for _ in range(EXP_ULPS):
        v = _up(v)
    return v


def exp_dn(x: float) -> float:
    """Float <= exp(x), clamped at 0 (exp is positive)."""
    if x == -_INF:
        return 0.0
    if x == _INF:
        return _INF
    if x == 0.0:
        return 1.0
    v = math.exp(x)
    if v == _INF:
        return _REALMAX
    if v < _TINY:
        return 0.0
    for _ in range(EXP_ULPS):
        v = _dn(v)
    return max(0.0, v)


def log_up(x: float) -> float:
    """Float >= log(x) for x > 0."""
    if x == _INF:
        return _INF
    if x == 1.0:
        return 0.0
    v = math.log(x)
    for _ in range(LOG_ULPS):
        v = _up(v)
    return v


def log_dn(x: float) -> float:
    """Float <= log(x) for x > 0."""
    if x == _INF:
        return _INF
    if x == 1.0:
        return 0.0
    v = math.log(x)
    for _ in range(LOG_ULPS):
        v = _dn(v)
    return v


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed extended-real interval [lo, hi] with lo <= hi."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        lo, hi = float(self.lo), float(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo != lo or hi != hi:
            raise IntervalError(f"NaN endpoint in [{lo}, {hi}]")
        if lo > hi:
            raise IntervalError(f"inverted interval [{lo}, {hi}]")
        if lo == _INF or hi == -_INF:
            raise IntervalError(f"degenerate infinite interval [{lo}, {hi}]")

    # -- constructors -------------------------------------------------

    @staticmethod
    def point(v: float) -> "Interval":
        return Interval(v, v)

    @staticmethod
    def entire() -> "Interval":
        return Interval(-_INF, _INF)

    @staticmethod
    def from_rational(num: int, den: int) -> "Interval":
        """Tightest float interval containing the real num/den."""
        from fractions import Fraction

        if den == 0:
            raise IntervalError("zero denominator")
        v = num / den
        exact = Fraction(num, den)
        if Fraction(v) == exact:
            return Interval(v, v)
        if Fraction(v) < exact:
            return Interval(v, _up(v))
        return Interval(_dn(v), v)

    # -- queries ------------------------------------------------------

    def width(self) -> float:
        """hi - lo, rounded up."""
        if self.lo == self.hi:
            return 0.0
        return sub_up(self.hi, self.lo)

    def sup(self) -> float:
        return self.hi

    def inf(self) -> float:
        return self.lo

    def mid(self) -> float:
        """A point inside the interval (not rigorous, for bisection)."""
        m = 0.5 * (self.lo + self.hi)
        if not math.isfinite(m):
            m = 0.5 * self.lo + 0.5 * self.hi
        if m < self.lo:
            m = self.lo
        if m > self.hi:
            m = self.hi
        return m

    def contains(self, v: float) -> bool:
        return self.lo <= v <= self.hi

    def is_subset(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(add_dn(self.lo, other.lo), add_up(self.hi, other.hi))

    def __sub__(self, other: "Interval") -> "Interval":
        return Interval(sub_dn(self.lo, other.hi), sub_up(self.hi, other.lo))

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other: "Interval") -> "Interval":
        a, b, c, d = self.lo, self.hi, other.lo, other.hi
        lo = min(mul_dn(a, c), mul_dn(a, d), mul_dn(b, c), mul_dn(b, d))
        hi = max(mul_up(a, c), mul_up(a, d), mul_up(b, c), mul_up(b, d))
        return Interval(lo, hi)

    def __truediv__(self, other: "Interval") -> "Interval":
        c, d = other.lo, other.hi
        if c <= 0.0 <= d:
            raise DivisionByZeroInterval(f"denominator {other} contains 0")
        a, b = self.lo, self.hi
        lo = min(div_dn(a, c), div_dn(a, d), div_dn(b, c), div_dn(b, d))
        hi = max(div_up(a, c), div_up(a, d), div_up(b, c), div_up(b, d))
        return Interval(lo, hi)

    def scale(self, c: float) -> "Interval":
        """Multiply by the exact scalar c."""
        if c >= 0.0:
            return Interval(mul_dn(self.lo, c), mul_up(self.hi, c))
        return Interval(mul_dn(self.hi, c), mul_up(self.lo, c))

    def exp(self) -> "Interval":
        return Interval(exp_dn(self.lo), exp_up(self.hi))

    def log(self) -> "Interval":
        if self.lo <= 0.0:
            raise LogNonPositive(f"log of {self} with non-positive lower endpoint")
        return Interval(log_dn(self.lo), log_up(self.hi))

    def __abs__(self) -> "Interval":
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return Interval(-self.hi, -self.lo)
        return Interval(0.0, max(-self.lo, self.hi))

    def abs(self) -> "Interval":
        return self.__abs__()

    def min_elt(self, other: "Interval") -> "Interval":
        """Enclosure of {min(u, v) : u in self, v in other}."""
        return Interval(min(self.lo, other.lo), min(self.hi, other.hi))

    def max_elt(self, other: "Interval") -> "Interval":
        """Enclosure of {max(u, v) : u in self, v in other}."""
        return Interval(max(self.lo, other.lo), max(self.hi, other.hi))

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: "Interval") -> "Interval | None":
        """Set intersection, or None when empty.

        Emptiness is a value, not a fault: it signals infeasibility to
        callers (the step-5 contradiction of the pruning pass).
        """
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            return None
        return Interval(lo, hi)

    def intersect_strict(self, other: "Interval") -> "Interval":
        r = self.intersect(other)
        if r is None:
            raise EmptyIntersection(f"{self} and {other} are disjoint")
        return r

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"


# Module-level functional aliases matching the operation names used
# throughout the algorithms.
def add(x: Interval, y: Interval) -> Interval:
    return x + y


def sub(x: Interval, y: Interval) -> Interval:
    return x - y


def mul(x: Interval, y: Interval) -> Interval:
    return x * y


def div(x: Interval, y: Interval) -> Interval:
    return x / y


def neg(x: Interval) -> Interval:
    return -x


def exp(x: Interval) -> Interval:
    return x.exp()


def log(x: Interval) -> Interval:
    return x.log()


def iabs(x: Interval) -> Interval:
    return abs(x)


def min_elt(x: Interval, y: Interval) -> Interval:
    return x.min_elt(y)


def max_elt(x: Interval, y: Interval) -> Interval:
    return x.max_elt(y)


def hull(x: Interval, y: Interval) -> Interval:
    return x.hull(y)


def intersect(x: Interval, y: Interval) -> Interval | None:
    return x.intersect(y)


def scale(x: Interval, c: float) -> Interval:
    return x.scale(c)


def width(x: Interval) -> float:
    return x.width()


def sup(x: Interval) -> float:
    return x.sup()


def inf(x: Interval) -> float:
    return x.inf()


# Enclosure of pi (math.pi is the nearest double, which lies below pi).
PI = Interval(math.pi, _up(math.pi))
HALF_PI = PI.scale(0.5)
