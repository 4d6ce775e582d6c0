"""Arbitrary-precision dyadic rationals m * 2**e.

Dyadics are the endpoint type for intervals: exact and closed under
+, -, *.  Division is deliberately absent (1/3 is not dyadic); interval
reciprocals live in `interval` and round outward instead.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt


class Dyadic:
    """Immutable dyadic rational, canonical form: mantissa odd or zero.

    Zero is (0, 0).  Comparisons, hashing and arithmetic are exact.
    """

    __slots__ = ("m", "e", "_h")

    def __init__(self, m: int, e: int = 0):
        self._h = None
        if m == 0:
            self.m, self.e = 0, 0
            return
        # strip trailing zero bits into the exponent
        s = (m & -m).bit_length() - 1
        self.m = m >> s
        self.e = e + s

    # -- constructors ------------------------------------------------

    @staticmethod
    def from_int(n: int) -> "Dyadic":
        return Dyadic(n, 0)

    @staticmethod
    def from_fraction(q: Fraction) -> "Dyadic":
        den = q.denominator
        if den & (den - 1):
            raise ValueError(f"{q} is not a dyadic rational")
        return Dyadic(q.numerator, -(den.bit_length() - 1))

    # -- queries -----------------------------------------------------

    def is_zero(self) -> bool:
        return self.m == 0

    def sign(self) -> int:
        return (self.m > 0) - (self.m < 0)

    def bit_length(self) -> int:
        return self.m.bit_length()

    def as_fraction(self) -> Fraction:
        if self.e >= 0:
            return Fraction(self.m << self.e, 1)
        return Fraction(self.m, 1 << -self.e)

    def __float__(self) -> float:
        try:
            return self.m * 2.0 ** self.e
        except OverflowError:
            return float(self.as_fraction())

    # -- arithmetic (exact) -------------------------------------------

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.m, self.e)

    def __add__(self, other: "Dyadic") -> "Dyadic":
        if self.m == 0:
            return other
        if other.m == 0:
            return self
        if self.e >= other.e:
            return Dyadic((self.m << (self.e - other.e)) + other.m, other.e)
        return Dyadic(self.m + (other.m << (other.e - self.e)), self.e)

    def __sub__(self, other: "Dyadic") -> "Dyadic":
        return self + (-other)

    def __mul__(self, other: "Dyadic") -> "Dyadic":
        return Dyadic(self.m * other.m, self.e + other.e)

    def scale2(self, k: int) -> "Dyadic":
        """Exact multiplication by 2**k."""
        if self.m == 0:
            return self
        return Dyadic(self.m, self.e + k)

    # -- total order ---------------------------------------------------

    def _cmp(self, other: "Dyadic") -> int:
        sa = (self.m > 0) - (self.m < 0)
        sb = (other.m > 0) - (other.m < 0)
        if sa != sb:
            return (sa > sb) - (sa < sb)
        if sa == 0:
            return 0
        # same nonzero sign: magnitudes live in [2^(h-1), 2^h)
        ha = self.e + self.m.bit_length()
        hb = other.e + other.m.bit_length()
        if ha != hb:
            return sa if ha > hb else -sa
        if self.e >= other.e:
            a, b = self.m << (self.e - other.e), other.m
        else:
            a, b = self.m, other.m << (other.e - self.e)
        return (a > b) - (a < b)

    def __lt__(self, other): return self._cmp(other) < 0
    def __le__(self, other): return self._cmp(other) <= 0
    def __gt__(self, other): return self._cmp(other) > 0
    def __ge__(self, other): return self._cmp(other) >= 0

    def __eq__(self, other):
        return isinstance(other, Dyadic) and self.m == other.m and self.e == other.e

    def __hash__(self):
        if self._h is None:
            self._h = hash((self.m, self.e))
        return self._h

    def __repr__(self):
        return f"Dyadic({self.m}, {self.e})"

    def __str__(self):
        return str(float(self))


ZERO = Dyadic(0)
ONE = Dyadic(1)
TWO = Dyadic(2)
HALF = Dyadic(1, -1)


def round_down(d: Dyadic, bits: int) -> Dyadic:
    """Largest dyadic with <= `bits` mantissa bits that is <= d."""
    excess = d.m.bit_length() - bits
    if excess <= 0:
        return d
    return Dyadic(d.m >> excess, d.e + excess)  # floor shift rounds to -inf


def round_up(d: Dyadic, bits: int) -> Dyadic:
    """Smallest dyadic with <= `bits` mantissa bits that is >= d."""
    excess = d.m.bit_length() - bits
    if excess <= 0:
        return d
    return Dyadic(-((-d.m) >> excess), d.e + excess)


def div_dyadic(num: Dyadic, den: Dyadic, bits: int, toward_up: bool) -> Dyadic:
    """num/den rounded in the requested direction to `bits` mantissa bits.

    den must be nonzero; the result is a directed bound on the exact
    rational quotient.
    """
    if num.m == 0:
        return ZERO
    n, d = num.m, den.m
    if d < 0:
        n, d = -n, -d
    # scale so the integer quotient carries at least `bits` significant bits
    shift = bits + d.bit_length() - n.bit_length() + 2
    if shift < 0:
        shift = 0
    if toward_up:
        q = -((-(n << shift)) // d)  # ceil
        return round_up(Dyadic(q, num.e - den.e - shift), bits)
    q = (n << shift) // d  # floor
    return round_down(Dyadic(q, num.e - den.e - shift), bits)


def fraction_to_dyadic(q: Fraction, bits: int, toward_up: bool) -> Dyadic:
    return div_dyadic(Dyadic(q.numerator), Dyadic(q.denominator), bits, toward_up)


def sqrt_down(d: Dyadic, bits: int) -> Dyadic:
    """Directed lower bound for sqrt(d), d >= 0."""
    if d.m == 0:
        return ZERO
    m, e = d.m, d.e
    if e & 1:
        m <<= 1
        e -= 1
    # scale so isqrt yields > bits significant bits
    t = max(0, bits + 2 - (m.bit_length() + 1) // 2)
    s = isqrt(m << (2 * t))
    return round_down(Dyadic(s, e // 2 - t), bits)


def sqrt_up(d: Dyadic, bits: int) -> Dyadic:
    """Directed upper bound for sqrt(d), d >= 0."""
    if d.m == 0:
        return ZERO
    m, e = d.m, d.e
    if e & 1:
        m <<= 1
        e -= 1
    t = max(0, bits + 2 - (m.bit_length() + 1) // 2)
    shifted = m << (2 * t)
    s = isqrt(shifted)
    if s * s != shifted:
        s += 1
    return round_up(Dyadic(s, e // 2 - t), bits)
