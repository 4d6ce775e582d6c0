"""Refinement sequences: monotonicity, determinism, convergence."""

from fractions import Fraction

import pytest

from smoothish.creal import (
    NonConvergence, eval_to_eps, monotonize, precision_bits, refine_schedule,
    subdivisions,
)
from smoothish.dyadic import Dyadic
from smoothish.interval import Interval, IntervalBox, iv_subset
from smoothish.tower import SQRT, compose, const_dyadic, t_add, t_mul, t_sqrt

EMPTY = IntervalBox([])


def test_schedule():
    assert refine_schedule(0) == (30, 1)
    assert refine_schedule(3) == (90, 8)
    bits = [precision_bits(n) for n in range(10)]
    subs = [subdivisions(n) for n in range(25)]
    assert bits == sorted(bits)
    assert subs == sorted(subs)
    assert subdivisions(24) == 1 << 20          # capped


def test_monotonize_constant():
    cr = monotonize(lambda n: Interval(Dyadic(0), Dyadic(1)))
    for n in range(5):
        assert cr.approx(n) == Interval(Dyadic(0), Dyadic(1))


def test_monotonize_meets():
    seq = [Interval(Dyadic(0), Dyadic(2)), Interval(Dyadic(1), Dyadic(3))]
    cr = monotonize(lambda n: seq[min(n, 1)])
    assert cr.approx(1) == Interval(Dyadic(1), Dyadic(2))


def test_monotonize_shrinking():
    cr = monotonize(lambda n: Interval(Dyadic(-1, -n), Dyadic(1, -n)))
    for n in range(6):
        assert cr.approx(n).width() == Fraction(2, 1 << n)


def test_eval_to_eps_sqrt2():
    t = t_sqrt(const_dyadic([Dyadic(2)]))
    cr = monotonize(lambda n: t.value(n, EMPTY)[0])
    iv, steps = eval_to_eps(cr, Fraction(1, 10 ** 12), budget=60)
    assert iv.width() <= Fraction(1, 10 ** 12)
    # 1.41421356237309 from the transcript digits
    assert iv.contains(Fraction(141421356237309504880168872420969808, 10 ** 35))


def test_engine_sequences_are_monotone():
    x = const_dyadic([Dyadic(2)])
    exprs = [
        t_sqrt(x),
        t_add(t_mul(t_sqrt(x), t_sqrt(x)), t_sqrt(const_dyadic([Dyadic(3)]))),
    ]
    for t in exprs:
        cr = monotonize(lambda n: t.value(n, EMPTY)[0])
        prev = cr.approx(0)
        for n in range(1, 13):
            cur = cr.approx(n)
            assert iv_subset(cur, prev)
            prev = cur


def test_eval_to_eps_deterministic():
    def make():
        t = t_sqrt(const_dyadic([Dyadic(2)]))
        return monotonize(lambda n: t.value(n, EMPTY)[0])
    a, _ = eval_to_eps(make(), Fraction(1, 10 ** 9), budget=60)
    b, _ = eval_to_eps(make(), Fraction(1, 10 ** 9), budget=60)
    assert a == b


def test_eval_to_eps_budget():
    cr = monotonize(lambda n: Interval(Dyadic(0), Dyadic(1)))
    with pytest.raises(NonConvergence) as err:
        eval_to_eps(cr, Fraction(1, 10), budget=7)
    assert err.value.best == Interval(Dyadic(0), Dyadic(1))
    assert err.value.steps == 7


def test_width_decays_geometrically_on_arithmetic():
    # regression corpus: plain arithmetic expressions must tighten by at
    # least a factor 2 per index once past the first few steps
    two = const_dyadic([Dyadic(2)])
    three = const_dyadic([Dyadic(3)])
    exprs = [
        t_sqrt(two),
        t_mul(t_sqrt(two), t_sqrt(three)),
        t_add(t_sqrt(t_add(two, three)), t_mul(two, t_sqrt(three))),
    ]
    for t in exprs:
        cr = monotonize(lambda n: t.value(n, EMPTY)[0])
        widths = [cr.approx(n).width() for n in range(2, 8)]
        for a, b in zip(widths, widths[1:]):
            if a == 0:
                assert b == 0
            else:
                assert b <= a / 2
