"""Derivative towers: composition, the derivative operator, Clarke cases.

The polynomial-composition suite computes expected derivatives with
sympy (symbolic differentiation is the independent oracle); finite
differences use high-precision interval evaluation of the value map
only, so both routes stay independent of the tower path they check.
"""

import random
from fractions import Fraction

import pytest
import sympy

from smoothish.dyadic import Dyadic, ZERO, ONE
from smoothish.interval import (
    BOTTOM, Interval, IntervalBox, box_point, iv_hull,
)
from smoothish.tower import (
    ADD, COS, DIV, EXP, MAX, MIN, MUL, RECIP, SIN, SQRT, SUB,
    ComposeTower, SelectTower, Tower, compose, const_dyadic, coord, deriv_op,
    fold_der, identity, linear_tower, pair, pi_tower, rational_const,
    relu_tower, set_partitions, t_add, t_div, t_exp, t_max, t_min, t_mul,
    t_neg, t_sin, t_sqrt, t_sub, weaken,
)

EMPTY = IntervalBox([])


def pt(*vals) -> IntervalBox:
    return box_point(*[v if isinstance(v, Dyadic) else Dyadic(v) for v in vals])


def assert_encloses(box: IntervalBox, *vals, idx=0):
    for v in vals:
        q = v if isinstance(v, Fraction) else Fraction(v)
        assert box[idx].contains(q), f"{box[idx]} should contain {q}"


def width_below(box: IntervalBox, bound: Fraction, idx=0) -> bool:
    w = box[idx].width()
    return w is not None and w <= bound


# -- set partitions ------------------------------------------------------


def test_set_partitions_bell_numbers():
    assert [len(set_partitions(k)) for k in range(6)] == [1, 1, 2, 5, 15, 52]
    for part in set_partitions(4):
        items = sorted(i for block in part for i in block)
        assert items == [0, 1, 2, 3]


# -- constructors ---------------------------------------------------------


def test_const_tower():
    c = const_dyadic([Dyadic(2)], dom=3)
    anything = IntervalBox([Interval(Dyadic(-5), Dyadic(7))] * 3)
    assert c.value(2, anything) == pt(2)
    assert c.deriv_eval(2, anything, (pt(1, 1, 1),)) == pt(0)
    assert c.tail().value(2, anything + anything) == pt(0)


def test_pi_const_tightens():
    p = pi_tower()
    w0 = p.value(0, EMPTY)[0].width()
    w3 = p.value(3, EMPTY)[0].width()
    assert w3 < w0
    assert p.value(3, EMPTY)[0].contains(Fraction(
        31415926535897932384626433832795028841971693993751, 10 ** 49))
    assert p.tail().value(3, EMPTY) == pt(0)


def test_coord_tower():
    c0 = coord(0, 2)
    assert c0.value(1, pt(3, 5)) == pt(3)
    # first derivative selects the direction's coordinate
    assert c0.deriv_eval(1, pt(3, 5), (pt(1, 0),)) == pt(1)
    assert c0.deriv_eval(1, pt(3, 5), (pt(1, 0), pt(0, 1))) == pt(0)
    with pytest.raises(ValueError):
        coord(2, 2)


def test_linear_tower():
    ident = linear_tower([[ONE, ZERO], [ZERO, ONE]])
    assert ident.value(1, pt(2, 3)) == pt(2, 3)
    twice = linear_tower([[Dyadic(2)]])
    assert twice.deriv_eval(1, pt(5), (pt(7),)) == pt(14)
    assert twice.deriv_eval(1, pt(5), (pt(7), pt(1))) == pt(0)
    neg = linear_tower([[Dyadic(-1)]])
    assert neg.value(1, pt(4)) == pt(-4)


def test_fold_der_constant_rebuild():
    z = const_dyadic([ZERO], dom=2)
    f = fold_der(lambda n, x: pt(9), z, dom=1)
    assert f.value(1, pt(5)) == pt(9)
    for k in range(1, 4):
        assert f.deriv_eval(1, pt(5), tuple(pt(1) for _ in range(k))) == pt(0)


def test_fold_der_mutual_recursion_terminates():
    for k in range(5):
        SIN.deriv_eval(1, pt(0), tuple(pt(1) for _ in range(k)))


# -- arithmetic towers ----------------------------------------------------


def test_mul_tower():
    assert MUL.tail().value(2, pt(2, 3, 1, 0)) == pt(3)      # product rule
    d2 = MUL.deriv_eval(2, pt(11, -4), (pt(1, 0), pt(0, 1)))
    assert d2 == pt(1)                                        # d2(xy)/dxdy = 1
    assert MUL.deriv_eval(2, pt(5, 6), (pt(1, 1), pt(1, 1), pt(1, 1))) == pt(0)


def test_div_tower_bottom_at_zero_denominator():
    v = DIV.value(2, IntervalBox([Interval.point(Dyadic(1)),
                                  Interval(Dyadic(-1), Dyadic(1))]))
    assert v[0].is_bottom()
    assert DIV.value(2, pt(1, 4)) == pt(Dyadic(1, -2))


def test_recip_derivative():
    # d(1/x)/dx at 2 = -1/4
    d = RECIP.tail().value(3, pt(2, 1))
    assert_encloses(d, Fraction(-1, 4))
    assert width_below(d, Fraction(1, 1 << 40))


def test_sqrt_tower():
    d = SQRT.tail().value(3, pt(4, 1))
    assert_encloses(d, Fraction(1, 4))
    v = SQRT.tail().value(3, IntervalBox([Interval(Dyadic(-1), Dyadic(1)),
                                          Interval.point(ONE)]))
    assert v[0].is_bottom()    # derivative blows up where the arg encloses 0


def test_exp_third_derivative():
    d = EXP.deriv_eval(3, pt(0), (pt(1), pt(1), pt(1)))
    assert_encloses(d, 1)
    assert width_below(d, Fraction(1, 1 << 30))


def test_cos_derivative_at_zero():
    assert_encloses(COS.tail().value(3, pt(0, 1)), 0)


# -- max / min: Clarke behavior -------------------------------------------


def test_max_first_derivative_cases():
    assert MAX.tail().value(2, pt(3, 1, 7, 9)) == pt(7)       # left wins
    assert MAX.tail().value(2, pt(1, 3, 7, 9)) == pt(9)       # right wins
    assert MAX.tail().value(2, pt(1, 1, 2, 5)) == IntervalBox(
        [Interval(Dyadic(2), Dyadic(5))])                     # tie: hull


def test_max_second_derivative_cases():
    apart = MAX.deriv_eval(2, pt(0, 1), (pt(1, 1), pt(1, 1)))
    assert apart == pt(0)
    tied = MAX.deriv_eval(2, pt(1, 1), (pt(1, 1), pt(1, 1)))
    assert tied[0].is_bottom()


def test_relu_derivative_hull():
    relu = relu_tower()
    assert relu.tail().value(2, pt(0, 1)) == IntervalBox(
        [Interval(ZERO, ONE)])
    assert relu.tail().value(2, pt(2, 1)) == pt(1)
    assert relu.tail().value(2, pt(-2, 1)) == pt(0)


def test_identity_clarke_hull():
    # max(x,0) + min(0,x) is the identity; its Clarke derivative at 0 is
    # the hull [0,2], which contains the true derivative 1
    x = coord(0, 1)
    zero = const_dyadic([ZERO], dom=1)
    f = t_add(t_max(x, zero), t_min(zero, x))
    assert f.value(2, pt(5)) == pt(5)
    d = f.tail().value(2, pt(0, 1))
    assert d == IntervalBox([Interval(ZERO, Dyadic(2))])


def test_clarke_containment_sampled():
    rng = random.Random(5)
    for _ in range(300):
        a = Fraction(rng.randrange(-100, 100), 16)
        b = Fraction(rng.randrange(-100, 100), 16)
        da = Fraction(rng.randrange(-50, 50), 8)
        db = Fraction(rng.randrange(-50, 50), 8)
        box = IntervalBox([
            Interval.point(Dyadic.from_fraction(a)),
            Interval.point(Dyadic.from_fraction(b))])
        d = MAX.deriv_eval(2, box, (IntervalBox([
            Interval.point(Dyadic.from_fraction(da)),
            Interval.point(Dyadic.from_fraction(db))]),))
        # Clarke directional derivative by case analysis
        if a > b:
            expected = {da}
        elif a < b:
            expected = {db}
        else:
            expected = {da, db}  # hull endpoints
        for v in expected:
            assert d[0].contains(v)


# -- derivative operator ----------------------------------------------------


def test_deriv_op_identity():
    idt = identity(1)
    assert deriv_op(idt).value(1, pt(5, 9)) == pt(9)


def test_deriv_op_constant():
    c = const_dyadic([Dyadic(3)], dom=1)
    dc = deriv_op(c)
    assert dc.value(1, pt(5, 1)) == pt(0)
    assert dc.deriv_eval(1, pt(5, 1), (pt(1, 1),)) == pt(0)


def test_deriv_op_sin_second_order():
    # (sin')^(1)((x,v);(dx,dv)) = -sin(x) v dx + cos(x) dv
    x = Dyadic(2458, -13)  # ~0.300049
    d = deriv_op(SIN).deriv_eval(3, box_point(x, ONE), (pt(1, 0),))
    import math
    target = Fraction(-math.sin(2458 / 8192)).limit_denominator(10 ** 12)
    lo, hi = d[0].lo.as_fraction(), d[0].hi.as_fraction()
    assert lo <= target + Fraction(1, 10 ** 9)
    assert target - Fraction(1, 10 ** 9) <= hi


# -- composition: Faa di Bruno against the symbolic oracle -------------------


def _poly_tower(coeffs: list[Fraction]) -> Tower:
    """Univariate polynomial as a tower via repeated multiply-add."""
    x = coord(0, 1)
    acc = const_dyadic([Dyadic.from_fraction(coeffs[-1])], dom=1)
    for c in reversed(coeffs[:-1]):
        acc = t_add(t_mul(acc, x),
                    const_dyadic([Dyadic.from_fraction(c)], dom=1))
    return acc


def _rand_poly(rng, degree: int) -> list[Fraction]:
    return [Fraction(rng.randrange(-8, 9), 1 << rng.randrange(0, 3))
            for _ in range(degree + 1)]


def test_faa_di_bruno_polynomial_oracle():
    rng = random.Random(424242)
    z = sympy.Symbol("z")
    for _ in range(6):
        p = _rand_poly(rng, rng.randrange(2, 5))
        q = _rand_poly(rng, rng.randrange(2, 5))
        sp = sum(sympy.Rational(c.numerator, c.denominator) * z ** i
                 for i, c in enumerate(p))
        sq = sum(sympy.Rational(c.numerator, c.denominator) * z ** i
                 for i, c in enumerate(q))
        scomp = sp.subs(z, sq)
        tower = compose(_poly_tower(p), _poly_tower(q))
        points = [Fraction(rng.randrange(-32, 33), 8) for _ in range(20)]
        for k in range(5):
            dk = sympy.diff(scomp, z, k)
            for x0 in points:
                expected = Fraction(
                    dk.subs(z, sympy.Rational(x0.numerator, x0.denominator)))
                box = pt(Dyadic.from_fraction(x0))
                got = tower.deriv_eval(4, box, tuple(pt(1) for _ in range(k)))
                assert got[0].contains(expected), (p, q, k, x0)


def test_compose_square_square():
    sq = t_mul(coord(0, 1), coord(0, 1))
    q = compose(sq, sq)
    d2 = q.deriv_eval(3, pt(2), (pt(1), pt(1)))
    assert_encloses(d2, 48)   # (x^4)'' = 12 x^2


def test_linear_postcompose_shortcut():
    # linear(g) after f: (g . f)^(k) = g(f^(k))
    f = t_mul(t_sin(coord(0, 1)), coord(0, 1))
    g = linear_tower([[Dyadic(3)]])
    comp = compose(g, f)
    for k in range(4):
        dirs = tuple(pt(1) for _ in range(k))
        a = comp.deriv_eval(3, pt(Dyadic(1, -1)), dirs)[0]
        b = f.deriv_eval(3, pt(Dyadic(1, -1)), dirs)[0]
        scaled = Interval(
            None if b.lo is None else b.lo * Dyadic(3),
            None if b.hi is None else b.hi * Dyadic(3))
        assert a.lo is not None
        # both enclose the same value; check overlap both ways
        assert a.lo <= scaled.hi and scaled.lo <= a.hi


# -- category laws (observational, against a high-precision oracle) ----------


CORPUS = [
    ("sin", t_sin(coord(0, 1))),
    ("exp-ish", t_mul(t_exp(coord(0, 1)), coord(0, 1))),
    ("poly", _poly_tower([Fraction(1), Fraction(-2), Fraction(1, 2)])),
]

LAW_POINTS = [Dyadic(1, -1), Dyadic(-3, -2), Dyadic(1)]


@pytest.mark.parametrize("name,f", CORPUS)
def test_identity_laws(name, f):
    left = compose(identity(1), f)
    right = compose(f, identity(1))
    for x0 in LAW_POINTS:
        for k in range(5):
            dirs = tuple(pt(1) for _ in range(k))
            a = f.deriv_eval(3, pt(x0), dirs)[0]
            b = left.deriv_eval(3, pt(x0), dirs)[0]
            c = right.deriv_eval(3, pt(x0), dirs)[0]
            # same real value enclosed by all three
            assert max(x.lo for x in (a, b, c)) <= min(x.hi for x in (a, b, c))


def test_compose_associativity_observational():
    f = t_add(coord(0, 1), const_dyadic([ONE], dom=1))
    g = t_mul(coord(0, 1), coord(0, 1))
    h = t_sin(coord(0, 1))
    left = compose(h, compose(g, f))
    right = compose(compose(h, g), f)
    for x0 in LAW_POINTS:
        for k in range(4):
            dirs = tuple(pt(1) for _ in range(k))
            a = left.deriv_eval(3, pt(x0), dirs)[0]
            b = right.deriv_eval(3, pt(x0), dirs)[0]
            assert a.lo <= b.hi and b.lo <= a.hi


def test_product_beta_law():
    f = t_sin(coord(0, 1))
    g = t_exp(coord(0, 1))
    fst = SelectTower(2, [0])
    paired = pair(f, g)
    projected = compose(fst, paired)
    for x0 in LAW_POINTS:
        for k in range(4):
            dirs = tuple(pt(1) for _ in range(k))
            a = projected.deriv_eval(3, pt(x0), dirs)[0]
            b = f.deriv_eval(3, pt(x0), dirs)[0]
            assert a.lo <= b.hi and b.lo <= a.hi


def test_pair_of_coords_is_identity():
    p = pair(coord(0, 2), coord(1, 2))
    box = pt(3, 5)
    assert p.value(1, box) == box
    assert p.deriv_eval(1, box, (pt(1, 0),)) == pt(1, 0)


def test_pair_of_constants_is_constant():
    p = pair(const_dyadic([ONE], dom=1), const_dyadic([Dyadic(2)], dom=1))
    assert p.value(1, pt(9)) == pt(1, 2)
    assert p.deriv_eval(1, pt(9), (pt(1),)) == pt(0, 0)


# -- weaken -------------------------------------------------------------------


def test_weaken():
    c = weaken(const_dyadic([Dyadic(2)]), 1)
    assert c.value(1, pt(42)) == pt(2)
    w = weaken(coord(0, 1), 1)
    assert w.value(1, pt(7, 9)) == pt(7)
    # perturbations in dropped coordinates are ignored
    assert w.deriv_eval(1, pt(7, 9), (pt(0, 5),)) == pt(0)
    assert w.deriv_eval(1, pt(7, 9), (pt(2, 5),)) == pt(2)


# -- finite differences and multilinearity ------------------------------------


def _center(iv: Interval) -> Fraction:
    return (iv.lo.as_fraction() + iv.hi.as_fraction()) / 2


FD_CORPUS = [
    ("sin", t_sin(coord(0, 1)), None),
    ("exp", t_exp(coord(0, 1)), None),
    ("x*sin", t_mul(coord(0, 1), t_sin(coord(0, 1))), None),
    ("sqrt", t_sqrt(coord(0, 1)), "positive"),
]


@pytest.mark.parametrize("name,f,domain", FD_CORPUS)
def test_finite_difference_consistency(name, f, domain):
    rng = random.Random(hash(name) % 1000)
    h = Fraction(1, 1 << 20)
    n = 5  # 130 bits: discretization error dominates rounding
    for _ in range(25):
        x0 = Fraction(rng.randrange(-(1 << 12), 1 << 12), 1 << 10)
        if domain == "positive":
            x0 = abs(x0) + Fraction(1, 4)
        d = f.tail().value(n, pt(Dyadic.from_fraction(x0), ONE))[0]
        f_hi = f.value(n, pt(Dyadic.from_fraction(x0 + h)))[0]
        f_lo = f.value(n, pt(Dyadic.from_fraction(x0 - h)))[0]
        fd = (_center(f_hi) - _center(f_lo)) / (2 * h)
        slack = (f_hi.width() + f_lo.width()) / (2 * h)
        tol = Fraction(1, 10 ** 6) + slack + d.width()
        assert abs(_center(d) - fd) <= 60 * h * h / 6 + tol, (name, x0)


@pytest.mark.parametrize("name,f", CORPUS)
def test_multilinearity_scaling(name, f):
    # f^(k)(x; c v1, v2..) == c f^(k)(x; v1, v2..) up to rounding
    for k in (1, 2, 3):
        x0 = pt(Dyadic(1, -1))
        dirs = tuple(pt(1) for _ in range(k))
        base = f.deriv_eval(4, x0, dirs)[0]
        scaled_dirs = (pt(Dyadic(3)),) + dirs[1:]
        scaled = f.deriv_eval(4, x0, scaled_dirs)[0]
        three = Dyadic(3)
        lo, hi = base.lo * three, base.hi * three
        assert scaled.lo <= hi and lo <= scaled.hi
        assert (scaled.hi - scaled.lo).as_fraction() <= \
            4 * (hi - lo).as_fraction() + Fraction(1, 1 << 40)
