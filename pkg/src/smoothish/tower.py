"""Derivative towers: interval-valued maps carrying all their derivatives.

A tower is a map R^n -> R^m given by an interval-extension value map
together with, lazily, its derivative tower on the doubled domain: the
tail's input (x, v) reads "directional derivative at x in direction v".
Unrolling k tails and packing perturbations evaluates the k-th
derivative.  Composition is Faa di Bruno's formula over set partitions;
max/min carry Clarke-style hull derivatives, so nonsmooth primitives
stay total.

Everything is immutable and pure; per-instance memo tables are a cache
of pure results and are safe to replay.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Optional, Sequence, Union

from .creal import precision_bits
from .dyadic import Dyadic, ZERO, ONE
from .interval import (
    BOTTOM, IV_ZERO, Interval, IntervalBox, Trichotomy,
    box_add, box_zeros, iv_add, iv_compare, iv_cos, iv_div, iv_exp, iv_hull,
    iv_max, iv_min, iv_mul, iv_neg, iv_recip, iv_sin, iv_sqrt, iv_sub,
)

Dirs = tuple[IntervalBox, ...]

_MEMO_LIMIT = 1 << 18


@lru_cache(maxsize=None)
def set_partitions(k: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """All partitions of {0..k-1} as nested tuples, deterministic order."""
    if k == 0:
        return ((),)
    out = []
    for smaller in set_partitions(k - 1):
        last = k - 1
        for i in range(len(smaller)):
            out.append(smaller[:i] + (smaller[i] + (last,),) + smaller[i + 1:])
        out.append(smaller + ((last,),))
    return tuple(out)


class Tower:
    """Base class; subclasses implement `_eval` (the k-th derivative map)."""

    __slots__ = ("dom", "cod", "_tail", "_memo")

    # cheap towers opt out: a memo lookup costs more than re-evaluating
    _memoize = True

    def __init__(self, dom: int, cod: int):
        self.dom = dom
        self.cod = cod
        self._tail: Optional[Tower] = None
        self._memo: dict = {}

    # -- derivative queries -------------------------------------------

    def deriv_eval(self, n: int, x: IntervalBox, dirs: Dirs = ()) -> IntervalBox:
        """Enclosure of the len(dirs)-th derivative at x in those directions."""
        if not self._memoize:
            return self._eval(n, x, dirs)
        key = (n, x, dirs)
        memo = self._memo
        hit = memo.get(key)
        if hit is not None:
            return hit
        out = self._eval(n, x, dirs)
        if len(memo) > _MEMO_LIMIT:
            memo.clear()
        memo[key] = out
        return out

    def value(self, n: int, x: IntervalBox) -> IntervalBox:
        return self.deriv_eval(n, x, ())

    def _eval(self, n: int, x: IntervalBox, dirs: Dirs) -> IntervalBox:
        raise NotImplementedError

    def tail(self) -> "Tower":
        """The derivative tower on the doubled domain (the ' operator)."""
        if self._tail is None:
            self._tail = DerivTower(self)
        return self._tail

    def _bottom(self) -> IntervalBox:
        return IntervalBox([BOTTOM] * self.cod)

    def _zeros(self) -> IntervalBox:
        return box_zeros(self.cod)


def deriv_op(f: Tower) -> Tower:
    return f.tail()


class DerivTower(Tower):
    """Generic tail: all orders of f' from orders of f.

    f'^(k)((x,v); (dx_i,dv_i)) = f^(k+1)(x; v, dx_1..dx_k)
                                 + sum_j f^(k)(x; dx_1,..,dv_j,..,dx_k)
    """

    __slots__ = ("f",)

    def __init__(self, f: Tower):
        super().__init__(2 * f.dom, f.cod)
        self.f = f

    def _eval(self, n, x, dirs):
        d = self.f.dom
        base = IntervalBox(x.coords[:d])
        v = IntervalBox(x.coords[d:])
        dxs = [IntervalBox(D.coords[:d]) for D in dirs]
        dvs = [IntervalBox(D.coords[d:]) for D in dirs]
        acc = self.f.deriv_eval(n, base, (v, *dxs))
        p = precision_bits(n)
        for j in range(len(dirs)):
            term = self.f.deriv_eval(
                n, base, tuple(dvs[j] if i == j else dxs[i] for i in range(len(dirs))))
            acc = box_add(acc, term, p)
        return acc


class FoldDerTower(Tower):
    """Cons a value map onto a derivative tower (lazily constructed)."""

    __slots__ = ("value_fn", "tail_thunk")

    def __init__(self, dom: int, cod: int,
                 value_fn: Callable[[int, IntervalBox], IntervalBox],
                 tail_thunk: Callable[[], Tower]):
        super().__init__(dom, cod)
        self.value_fn = value_fn
        self.tail_thunk = tail_thunk

    def tail(self) -> Tower:
        if self._tail is None:
            self._tail = self.tail_thunk()
        return self._tail

    def _eval(self, n, x, dirs):
        if not dirs:
            return self.value_fn(n, x)
        zeros = box_zeros(self.dom)
        return self.tail().deriv_eval(
            n, x + dirs[0], tuple(d + zeros for d in dirs[1:]))


def fold_der(value_fn, tail: Union[Tower, Callable[[], Tower]],
             dom: int, cod: int = 1) -> Tower:
    thunk = tail if callable(tail) and not isinstance(tail, Tower) else (lambda: tail)
    return FoldDerTower(dom, cod, value_fn, thunk)


class ConstTower(Tower):
    """Constant map; derivative identically zero."""

    __slots__ = ("const_fn",)
    _memoize = False

    def __init__(self, dom: int, const_fn: Callable[[int], IntervalBox], cod: int):
        super().__init__(dom, cod)
        self.const_fn = const_fn

    def _eval(self, n, x, dirs):
        if dirs:
            return self._zeros()
        return self.const_fn(n)


def const_dyadic(ds: Sequence[Dyadic], dom: int = 0) -> Tower:
    box = IntervalBox([Interval.point(d) for d in ds])
    return ConstTower(dom, lambda n: box, len(ds))


def const_interval_fn(fn: Callable[[int], Interval], dom: int = 0) -> Tower:
    return ConstTower(dom, lambda n: IntervalBox([fn(n)]), 1)


Entry = Union[int, Dyadic]


class SelectTower(Tower):
    """Affine reshuffle: each output is an input coordinate or a constant.

    Covers projections, weakening, coordinate towers and the constant
    paddings the implicit-function plumbing needs, all with exact (zero)
    higher derivatives.
    """

    __slots__ = ("entries",)
    _memoize = False

    def __init__(self, dom: int, entries: Sequence[Entry]):
        super().__init__(dom, len(entries))
        for ent in entries:
            if isinstance(ent, int) and not 0 <= ent < dom:
                raise ValueError(f"coordinate {ent} out of range for dom {dom}")
        self.entries = tuple(entries)

    def _eval(self, n, x, dirs):
        k = len(dirs)
        if k == 0:
            return IntervalBox([
                x[e] if isinstance(e, int) else Interval.point(e)
                for e in self.entries])
        if k == 1:
            v = dirs[0]
            return IntervalBox([
                v[e] if isinstance(e, int) else IV_ZERO for e in self.entries])
        return self._zeros()


def coord(i: int, dom: int) -> Tower:
    return SelectTower(dom, [i])


def identity(dom: int) -> Tower:
    return SelectTower(dom, list(range(dom)))


def weaken(f: Tower, extra: int) -> Tower:
    """Extend the context by `extra` trailing coordinates f ignores."""
    if extra == 0:
        return f
    return ComposeTower(f, SelectTower(f.dom + extra, list(range(f.dom))))


class LinearTower(Tower):
    """linear(f) for a dyadic matrix: value and first derivative apply f."""

    __slots__ = ("matrix",)

    def __init__(self, matrix: Sequence[Sequence[Dyadic]]):
        cod = len(matrix)
        dom = len(matrix[0]) if cod else 0
        for row in matrix:
            if len(row) != dom:
                raise ValueError("ragged matrix")
        super().__init__(dom, cod)
        self.matrix = tuple(tuple(row) for row in matrix)

    def _apply(self, n: int, v: IntervalBox) -> IntervalBox:
        p = precision_bits(n)
        out = []
        for row in self.matrix:
            acc = None
            for c, iv in zip(row, v):
                if c.m == 0:
                    continue
                if c.m == 1 and c.e == 0:
                    term = iv
                elif c.m == -1 and c.e == 0:
                    term = iv_neg(iv)
                else:
                    term = iv_mul(Interval.point(c), iv, p)
                acc = term if acc is None else iv_add(acc, term, p)
            out.append(IV_ZERO if acc is None else acc)
        return IntervalBox(out)

    def _eval(self, n, x, dirs):
        if not dirs:
            return self._apply(n, x)
        if len(dirs) == 1:
            return self._apply(n, dirs[0])
        return self._zeros()


def linear_tower(matrix: Sequence[Sequence[Dyadic]]) -> Tower:
    return LinearTower(matrix)


def scale_by(c: Dyadic) -> Tower:
    return LinearTower([[c]])


class PairTower(Tower):
    """Componentwise pairing of towers with a common domain."""

    __slots__ = ("parts",)
    _memoize = False

    def __init__(self, parts: Sequence[Tower]):
        dom = parts[0].dom
        if any(t.dom != dom for t in parts):
            raise ValueError("pairing requires a common domain")
        super().__init__(dom, sum(t.cod for t in parts))
        self.parts = tuple(parts)

    def _eval(self, n, x, dirs):
        coords: list[Interval] = []
        for t in self.parts:
            coords.extend(t.deriv_eval(n, x, dirs).coords)
        return IntervalBox(coords)


def pair(*parts: Tower) -> Tower:
    return PairTower(parts)


class ComposeTower(Tower):
    """g after f via Faa di Bruno over set partitions of the directions."""

    __slots__ = ("g", "f")

    def __init__(self, g: Tower, f: Tower):
        if g.dom != f.cod:
            raise ValueError(f"compose mismatch: {g.dom} vs {f.cod}")
        super().__init__(f.dom, g.cod)
        self.g = g
        self.f = f

    def _eval(self, n, x, dirs):
        k = len(dirs)
        fx = self.f.deriv_eval(n, x, ())
        if k == 0:
            return self.g.deriv_eval(n, fx, ())
        p = precision_bits(n)
        block_memo: dict[tuple[int, ...], IntervalBox] = {}

        def block(ids: tuple[int, ...]) -> IntervalBox:
            got = block_memo.get(ids)
            if got is None:
                got = self.f.deriv_eval(n, x, tuple(dirs[i] for i in ids))
                block_memo[ids] = got
            return got

        acc = None
        for partition in set_partitions(k):
            term = self.g.deriv_eval(n, fx, tuple(block(b) for b in partition))
            acc = term if acc is None else box_add(acc, term, p)
        return acc


def compose(g: Tower, f: Tower) -> Tower:
    return ComposeTower(g, f)


def compose_chain(*towers: Tower) -> Tower:
    out = towers[-1]
    for t in reversed(towers[:-1]):
        out = ComposeTower(t, out)
    return out


# -- pointwise primitive towers -----------------------------------------


def _sel(dom: int, *entries: Entry) -> Tower:
    return SelectTower(dom, entries)


ADD = LinearTower([[ONE, ONE]])
SUB = LinearTower([[ONE, Dyadic(-1)]])
NEG = LinearTower([[Dyadic(-1)]])


def _mul_value(n: int, x: IntervalBox) -> IntervalBox:
    return IntervalBox([iv_mul(x[0], x[1], precision_bits(n))])


def _mul_tail() -> Tower:
    # (x, y, dx, dy) |-> x*dy + y*dx
    return compose(ADD, pair(
        compose(MUL, _sel(4, 0, 3)),
        compose(MUL, _sel(4, 1, 2))))


MUL: Tower = FoldDerTower(2, 1, _mul_value, _mul_tail)


def _recip_value(n: int, x: IntervalBox) -> IntervalBox:
    return IntervalBox([iv_recip(x[0], precision_bits(n))])


def _recip_tail() -> Tower:
    # (x, dx) |-> -((1/x)*(1/x))*dx
    rx = compose(RECIP, _sel(2, 0))
    return compose(NEG, compose(MUL, pair(compose(MUL, pair(rx, rx)), _sel(2, 1))))


RECIP: Tower = FoldDerTower(1, 1, _recip_value, _recip_tail)

DIV: Tower = compose(MUL, pair(_sel(2, 0), compose(RECIP, _sel(2, 1))))


class MaxTower(Tower):
    """Binary max with the Clarke-interval derivative.

    First derivative: the winning side's perturbation when the order is
    provable, else the hull of both.  Higher orders: 0 when provably
    apart, bottom at a possible tie.
    """

    __slots__ = ("is_max",)

    def __init__(self, is_max: bool):
        super().__init__(2, 1)
        self.is_max = is_max

    def _eval(self, n, x, dirs):
        k = len(dirs)
        a, b = x[0], x[1]
        if k == 0:
            f = iv_max if self.is_max else iv_min
            return IntervalBox([f(a, b)])
        cmp = iv_compare(a, b)
        first_wins = Trichotomy.GREATER if self.is_max else Trichotomy.LESS
        if k == 1:
            da, db = dirs[0][0], dirs[0][1]
            if cmp is first_wins:
                return IntervalBox([da])
            if cmp is not Trichotomy.UNKNOWN:
                return IntervalBox([db])
            return IntervalBox([iv_hull(da, db)])
        if cmp is Trichotomy.UNKNOWN:
            return self._bottom()
        return self._zeros()


MAX: Tower = MaxTower(True)
MIN: Tower = MaxTower(False)


def _sqrt_value(n: int, x: IntervalBox) -> IntervalBox:
    return IntervalBox([iv_sqrt(x[0], precision_bits(n))])


def _sqrt_tail() -> Tower:
    # (x, dx) |-> dx / (2 * sqrt x)
    return compose(DIV, pair(
        _sel(2, 1),
        compose(scale_by(Dyadic(2)), compose(SQRT, _sel(2, 0)))))


SQRT: Tower = FoldDerTower(1, 1, _sqrt_value, _sqrt_tail)


def _lift1(iv_fn) -> Callable[[int, IntervalBox], IntervalBox]:
    def value(n: int, x: IntervalBox) -> IntervalBox:
        return IntervalBox([iv_fn(x[0], precision_bits(n))])
    return value


def _sin_tail() -> Tower:
    return compose(MUL, pair(compose(COS, _sel(2, 0)), _sel(2, 1)))


def _cos_tail() -> Tower:
    return compose(NEG, compose(MUL, pair(compose(SIN, _sel(2, 0)), _sel(2, 1))))


def _exp_tail() -> Tower:
    return compose(MUL, pair(compose(EXP, _sel(2, 0)), _sel(2, 1)))


SIN: Tower = FoldDerTower(1, 1, _lift1(iv_sin), _sin_tail)
COS: Tower = FoldDerTower(1, 1, _lift1(iv_cos), _cos_tail)
EXP: Tower = FoldDerTower(1, 1, _lift1(iv_exp), _exp_tail)


def relu_tower() -> Tower:
    return compose(MAX, pair(const_dyadic([ZERO], dom=1), identity(1)))


# -- pointwise combinators over a shared context -------------------------


def _binary(op: Tower, f: Tower, g: Tower) -> Tower:
    if f.dom != g.dom:
        raise ValueError("operands must share a context")
    return compose(op, pair(f, g))


def t_add(f: Tower, g: Tower) -> Tower: return _binary(ADD, f, g)
def t_sub(f: Tower, g: Tower) -> Tower: return _binary(SUB, f, g)
def t_mul(f: Tower, g: Tower) -> Tower: return _binary(MUL, f, g)
def t_div(f: Tower, g: Tower) -> Tower: return _binary(DIV, f, g)
def t_max(f: Tower, g: Tower) -> Tower: return _binary(MAX, f, g)
def t_min(f: Tower, g: Tower) -> Tower: return _binary(MIN, f, g)
def t_neg(f: Tower) -> Tower: return compose(NEG, f)
def t_sqrt(f: Tower) -> Tower: return compose(SQRT, f)
def t_sin(f: Tower) -> Tower: return compose(SIN, f)
def t_cos(f: Tower) -> Tower: return compose(COS, f)
def t_exp(f: Tower) -> Tower: return compose(EXP, f)


def rational_const(num: int, den: int, dom: int = 0) -> Tower:
    """Constant tower for num/den, exact when den is a power of two."""
    if den < 0:
        num, den = -num, -den
    if den & (den - 1) == 0:
        return const_dyadic([Dyadic(num, -(den.bit_length() - 1))], dom)
    return t_div(const_dyadic([Dyadic(num)], dom), const_dyadic([Dyadic(den)], dom))


def pi_tower(dom: int = 0) -> Tower:
    from .interval import pi_enclosure
    return const_interval_fn(lambda n: pi_enclosure(precision_bits(n)), dom)
