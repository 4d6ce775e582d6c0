"""Outward-rounded interval arithmetic over dyadic endpoints.

An interval is a closed set [lo, hi] with lo <= hi; either endpoint may
be infinite (None).  The full line is the bottom element: the sound
answer carrying no information.  Every operation here is an interval
extension: the image of any member points is contained in the result,
with endpoints rounded outward to the working precision.

Transcendental endpoint kernels (exp, sin, cos) delegate to MPFR via
gmpy2 with directed rounding; sin/cos bound the true image with
critical-point analysis against an interval enclosure of pi.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import gmpy2

from .dyadic import (
    Dyadic, ZERO, ONE, round_down, round_up, div_dyadic, sqrt_down, sqrt_up,
)


class Trichotomy(enum.Enum):
    LESS = -1
    UNKNOWN = 0
    GREATER = 1


class SoundnessError(AssertionError):
    """Disjoint meet: some enclosure along the way was wrong."""


class Interval:
    """Closed interval with dyadic-or-infinite endpoints (None = infinite)."""

    __slots__ = ("lo", "hi", "_h")

    def __init__(self, lo: Optional[Dyadic], hi: Optional[Dyadic]):
        self.lo = lo
        self.hi = hi
        self._h = None

    # -- constructors --------------------------------------------------

    @staticmethod
    def point(d: Dyadic) -> "Interval":
        return Interval(d, d)

    @staticmethod
    def from_int(n: int) -> "Interval":
        return Interval.point(Dyadic(n))

    # -- queries ---------------------------------------------------------

    def is_bottom(self) -> bool:
        return self.lo is None and self.hi is None

    def is_point(self) -> bool:
        return self.lo is not None and self.lo == self.hi

    def is_finite(self) -> bool:
        return self.lo is not None and self.hi is not None

    def width(self) -> Optional[Fraction]:
        """Exact width, or None when unbounded."""
        if not self.is_finite():
            return None
        return (self.hi - self.lo).as_fraction()

    def contains(self, q: Fraction) -> bool:
        if self.lo is not None and self.lo.as_fraction() > q:
            return False
        if self.hi is not None and self.hi.as_fraction() < q:
            return False
        return True

    def strictly_positive(self) -> bool:
        return self.lo is not None and self.lo.sign() > 0

    def strictly_negative(self) -> bool:
        return self.hi is not None and self.hi.sign() < 0

    def contains_zero(self) -> bool:
        return not (self.strictly_positive() or self.strictly_negative())

    def midpoint(self) -> Dyadic:
        if self.lo is None or self.hi is None:
            raise ValueError("midpoint of unbounded interval")
        return (self.lo + self.hi).scale2(-1)

    def __eq__(self, other):
        return (isinstance(other, Interval)
                and self.lo == other.lo and self.hi == other.hi)

    def __hash__(self):
        if self._h is None:
            self._h = hash((self.lo, self.hi))
        return self._h

    def __repr__(self):
        lo = "-inf" if self.lo is None else float(self.lo)
        hi = "inf" if self.hi is None else float(self.hi)
        return f"[{lo}, {hi}]"


BOTTOM = Interval(None, None)
IV_ZERO = Interval.point(ZERO)
IV_ONE = Interval.point(ONE)
UNIT = Interval(ZERO, ONE)


# -- order-theoretic / exact operations -------------------------------


def iv_hull(a: Interval, b: Interval) -> Interval:
    lo = None if (a.lo is None or b.lo is None) else min(a.lo, b.lo)
    hi = None if (a.hi is None or b.hi is None) else max(a.hi, b.hi)
    return Interval(lo, hi)


def iv_meet(a: Interval, b: Interval) -> Interval:
    """Intersection; disjoint inputs are a soundness bug, not a domain case."""
    if a.lo is None:
        lo = b.lo
    elif b.lo is None:
        lo = a.lo
    else:
        lo = max(a.lo, b.lo)
    if a.hi is None:
        hi = b.hi
    elif b.hi is None:
        hi = a.hi
    else:
        hi = min(a.hi, b.hi)
    if lo is not None and hi is not None and lo > hi:
        raise SoundnessError(f"disjoint meet: {a} and {b}")
    return Interval(lo, hi)


def iv_max(a: Interval, b: Interval) -> Interval:
    if a.lo is None:
        lo = b.lo
    elif b.lo is None:
        lo = a.lo
    else:
        lo = max(a.lo, b.lo)
    hi = None if (a.hi is None or b.hi is None) else max(a.hi, b.hi)
    return Interval(lo, hi)


def iv_min(a: Interval, b: Interval) -> Interval:
    if a.lo is None or b.lo is None:
        lo = None
    else:
        lo = min(a.lo, b.lo)
    if a.hi is None:
        hi = b.hi
    elif b.hi is None:
        hi = a.hi
    else:
        hi = min(a.hi, b.hi)
    return Interval(lo, hi)


def iv_compare(a: Interval, b: Interval) -> Trichotomy:
    """Decidable-only-apart order test; overlap (incl. equality) is UNKNOWN."""
    if a.hi is not None and b.lo is not None and a.hi < b.lo:
        return Trichotomy.LESS
    if a.lo is not None and b.hi is not None and a.lo > b.hi:
        return Trichotomy.GREATER
    return Trichotomy.UNKNOWN


def iv_subset(a: Interval, b: Interval) -> bool:
    """a refines b (a is contained in b): b is a sound, coarser answer."""
    if b.lo is not None and (a.lo is None or a.lo < b.lo):
        return False
    if b.hi is not None and (a.hi is None or a.hi > b.hi):
        return False
    return True


def iv_neg(a: Interval) -> Interval:
    lo = None if a.hi is None else -a.hi
    hi = None if a.lo is None else -a.lo
    return Interval(lo, hi)


def iv_scale2(a: Interval, k: int) -> Interval:
    """Exact scaling by 2**k."""
    lo = None if a.lo is None else a.lo.scale2(k)
    hi = None if a.hi is None else a.hi.scale2(k)
    return Interval(lo, hi)


# -- rounded arithmetic -------------------------------------------------


def iv_add(a: Interval, b: Interval, p: int) -> Interval:
    lo = None if (a.lo is None or b.lo is None) else round_down(a.lo + b.lo, p)
    hi = None if (a.hi is None or b.hi is None) else round_up(a.hi + b.hi, p)
    return Interval(lo, hi)


def iv_sub(a: Interval, b: Interval, p: int) -> Interval:
    return iv_add(a, iv_neg(b), p)


def iv_mul(a: Interval, b: Interval, p: int) -> Interval:
    # any endpoint product involving an infinity makes the result bottom:
    # containment semantics over the unbounded interval (0 * bottom = bottom)
    if not (a.is_finite() and b.is_finite()):
        return BOTTOM
    products = [a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi]
    return Interval(round_down(min(products), p), round_up(max(products), p))


def iv_recip(a: Interval, p: int) -> Interval:
    if a.contains_zero():
        return BOTTOM
    # endpoints have a common sign; 1/x is monotone decreasing on either side
    hi = ZERO if a.lo is None else div_dyadic(ONE, a.lo, p, toward_up=True)
    lo = ZERO if a.hi is None else div_dyadic(ONE, a.hi, p, toward_up=False)
    return Interval(lo, hi)


def iv_div(a: Interval, b: Interval, p: int) -> Interval:
    return iv_mul(a, iv_recip(b, p), p)


def iv_sqrt(a: Interval, p: int) -> Interval:
    """Image enclosure of sqrt on a; negative-lo inputs are clamped at 0.

    An interval entirely below 0 has empty intersection with the domain
    and yields bottom.  The clamp keeps refinement sequences for a true
    value >= 0 sound when they transiently dip below 0.
    """
    if a.hi is not None and a.hi.sign() < 0:
        return BOTTOM
    lo = ZERO if (a.lo is None or a.lo.sign() <= 0) else sqrt_down(a.lo, p)
    hi = None if a.hi is None else sqrt_up(a.hi, p)
    return Interval(lo, hi)


# -- transcendental kernels (MPFR endpoints + image analysis) -----------


@lru_cache(maxsize=256)
def _ctx(p: int, toward_up: bool):
    rnd = gmpy2.RoundUp if toward_up else gmpy2.RoundDown
    return gmpy2.context(precision=p, round=rnd, emin=-(1 << 40), emax=1 << 40)


def _to_mpfr(d: Dyadic):
    with gmpy2.context(precision=max(2, d.m.bit_length()), emin=-(1 << 40), emax=1 << 40):
        v = gmpy2.mpfr(d.m)
        return gmpy2.mul_2exp(v, d.e) if d.e >= 0 else gmpy2.div_2exp(v, -d.e)


def _from_mpfr(x) -> Dyadic:
    if x == 0:
        return ZERO
    m, e = x.as_mantissa_exp()
    return Dyadic(int(m), int(e))


def _mpfr_dir(fn, d: Dyadic, p: int, toward_up: bool) -> Optional[Dyadic]:
    x = _to_mpfr(d)
    with _ctx(p, toward_up):
        y = fn(x)
        if not gmpy2.is_finite(y):
            return None  # overflow: no finite directed bound
        return _from_mpfr(y)


def iv_exp(a: Interval, p: int) -> Interval:
    lo = ZERO if a.lo is None else (_mpfr_dir(gmpy2.exp, a.lo, p, False) or ZERO)
    hi = None if a.hi is None else _mpfr_dir(gmpy2.exp, a.hi, p, True)
    return Interval(lo, hi)


@lru_cache(maxsize=256)
def pi_enclosure(p: int) -> Interval:
    with _ctx(p, False):
        lo = _from_mpfr(gmpy2.const_pi())
    with _ctx(p, True):
        hi = _from_mpfr(gmpy2.const_pi())
    return Interval(lo, hi)


_FULL_WAVE = Interval(Dyadic(-1), Dyadic(1))


def _crosses(a: Interval, centers_offset: Fraction, p: int) -> bool:
    """Conservatively: could some pi*(2k + offset) lie inside the finite a?

    offset is in units of pi (1/2 for sin maxima, etc.).  Answers True
    unless the nearest candidates are provably outside a.
    """
    pi = pi_enclosure(p + 32)
    fa, fb = a.lo.as_fraction(), a.hi.as_fraction()
    if max(abs(fa), abs(fb)) > Fraction(1 << 52):
        return True
    pi_lo, pi_hi = pi.lo.as_fraction(), pi.hi.as_fraction()
    # candidate indices near the interval, via rational bounds on a/(2 pi)
    k_min = int((fa / (2 * pi_hi) - centers_offset / 2)) - 2
    k_max = int((fb / (2 * pi_lo) - centers_offset / 2)) + 2
    if k_max - k_min > 16:
        return True
    for k in range(k_min, k_max + 1):
        c = 2 * k + centers_offset
        # candidate point c*pi as a rational interval
        if c >= 0:
            c_lo, c_hi = c * pi_lo, c * pi_hi
        else:
            c_lo, c_hi = c * pi_hi, c * pi_lo
        if c_hi >= fa and c_lo <= fb:
            return True
    return False


def _sin_cos_image(a: Interval, p: int, fn, max_off: Fraction, min_off: Fraction) -> Interval:
    if not a.is_finite():
        return _FULL_WAVE
    if (a.hi - a.lo).as_fraction() >= 7:  # > 2*pi: full wave
        return _FULL_WAVE
    va = _mpfr_dir(fn, a.lo, p, False), _mpfr_dir(fn, a.lo, p, True)
    vb = _mpfr_dir(fn, a.hi, p, False), _mpfr_dir(fn, a.hi, p, True)
    hi = Dyadic(1) if _crosses(a, max_off, p) else max(va[1], vb[1])
    lo = Dyadic(-1) if _crosses(a, min_off, p) else min(va[0], vb[0])
    return Interval(lo, hi)


def iv_sin(a: Interval, p: int) -> Interval:
    # maxima at pi/2 + 2k pi, minima at -pi/2 + 2k pi
    return _sin_cos_image(a, p, gmpy2.sin, Fraction(1, 2), Fraction(-1, 2))


def iv_cos(a: Interval, p: int) -> Interval:
    # maxima at 2k pi, minima at pi + 2k pi
    return _sin_cos_image(a, p, gmpy2.cos, Fraction(0), Fraction(1))


# -- boxes ---------------------------------------------------------------


class IntervalBox:
    """Fixed-length vector of intervals; the carrier for R^n enclosures."""

    __slots__ = ("coords", "_h")

    def __init__(self, coords: Sequence[Interval]):
        self.coords = tuple(coords)
        self._h = None

    @property
    def dims(self) -> int:
        return len(self.coords)

    def __getitem__(self, i: int) -> Interval:
        return self.coords[i]

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def __add__(self, other: "IntervalBox") -> "IntervalBox":
        return IntervalBox(self.coords + other.coords)

    def __eq__(self, other):
        return isinstance(other, IntervalBox) and self.coords == other.coords

    def __hash__(self):
        if self._h is None:
            self._h = hash(self.coords)
        return self._h

    def __repr__(self):
        return "Box(" + ", ".join(map(repr, self.coords)) + ")"


def box_point(*ds: Dyadic) -> IntervalBox:
    return IntervalBox([Interval.point(d) for d in ds])


def box_zeros(n: int) -> IntervalBox:
    return IntervalBox([IV_ZERO] * n)


def box_add(a: IntervalBox, b: IntervalBox, p: int) -> IntervalBox:
    return IntervalBox([iv_add(x, y, p) for x, y in zip(a, b)])


def box_meet(a: IntervalBox, b: IntervalBox) -> IntervalBox:
    return IntervalBox([iv_meet(x, y) for x, y in zip(a, b)])


def box_subset(a: IntervalBox, b: IntervalBox) -> bool:
    return all(iv_subset(x, y) for x, y in zip(a, b))
