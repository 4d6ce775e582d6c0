"""Semantic values for the surface language and the Python-side libraries.

Scalars are towers over their free-variable context; contexts only ever
grow rightward (new binders append coordinates), so a tower over a
shorter context silently weakens into a longer one.  Functions and
pairs live at the meta level: a function value takes the argument value
plus the context depth at the application site, which is all a binder-
introducing primitive needs to reify its argument into a tower with the
bound variable as the last coordinate.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Optional, Union

from .dyadic import Dyadic
from .hoprims import (
    DEFAULT_CONFIG, HoConfig, argmax01, cut_root, first_root, integral01, max01,
)
from .tower import (
    SelectTower, Tower, compose, const_dyadic, coord, identity, pair,
    pi_tower, rational_const, t_add, t_cos, t_div, t_exp, t_max, t_min,
    t_mul, t_neg, t_sin, t_sqrt, t_sub, weaken,
)


class LangError(Exception):
    """Scope/shape error while elaborating an expression."""


class TowerVal:
    __slots__ = ("tower",)

    def __init__(self, tower: Tower):
        self.tower = tower

    def __repr__(self):
        return f"<real over {self.tower.dom} vars>"


class PairVal:
    __slots__ = ("fst", "snd")

    def __init__(self, fst: "Value", snd: "Value"):
        self.fst = fst
        self.snd = snd

    def __repr__(self):
        return f"({self.fst!r}, {self.snd!r})"


class FunVal:
    """Meta-level function: called with (argument value, context depth)."""

    __slots__ = ("fn", "name")

    def __init__(self, fn: Callable[["Value", int], "Value"], name: str = "<fun>"):
        self.fn = fn
        self.name = name

    def __repr__(self):
        return f"<function {self.name}>"


class UnitVal:
    __slots__ = ()

    def __repr__(self):
        return "()"


UNIT_VALUE = UnitVal()
Value = Union[TowerVal, PairVal, FunVal, UnitVal]


def scalar(t: Tower) -> TowerVal:
    if t.cod != 1:
        raise LangError("scalar value must have one output")
    return TowerVal(t)


def as_tower(v: Value, dim: int) -> Tower:
    """View a scalar value in a context of `dim` coordinates."""
    if not isinstance(v, TowerVal):
        raise LangError(f"expected a real-valued expression, got {v!r}")
    t = v.tower
    if t.dom > dim:
        raise LangError("scalar escapes its binder scope")
    return weaken(t, dim - t.dom)


def _lift2(op) -> Callable[[Value, Value], Value]:
    def go(a: Value, b: Value) -> Value:
        if not isinstance(a, TowerVal) or not isinstance(b, TowerVal):
            raise LangError("arithmetic needs real operands")
        d = max(a.tower.dom, b.tower.dom)
        return TowerVal(op(as_tower(a, d), as_tower(b, d)))
    return go


_add = _lift2(t_add)
_sub = _lift2(t_sub)
_mul = _lift2(t_mul)
_div = _lift2(t_div)
v_max = _lift2(t_max)
v_min = _lift2(t_min)


def v_add(a: Value, b: Value) -> Value:
    if isinstance(a, PairVal) and isinstance(b, PairVal):
        return PairVal(v_add(a.fst, b.fst), v_add(a.snd, b.snd))
    return _add(a, b)


def v_sub(a: Value, b: Value) -> Value:
    if isinstance(a, PairVal) and isinstance(b, PairVal):
        return PairVal(v_sub(a.fst, b.fst), v_sub(a.snd, b.snd))
    return _sub(a, b)


def v_neg(a: Value) -> Value:
    if isinstance(a, PairVal):
        return PairVal(v_neg(a.fst), v_neg(a.snd))
    if not isinstance(a, TowerVal):
        raise LangError("negation needs a real or pair operand")
    return TowerVal(t_neg(a.tower))


def v_mul(a: Value, b: Value) -> Value:
    return _mul(a, b)


def v_div(a: Value, b: Value) -> Value:
    return _div(a, b)


def _lift1(op) -> FunVal:
    def go(a: Value, depth: int) -> Value:
        if not isinstance(a, TowerVal):
            raise LangError("expected a real argument")
        return TowerVal(op(a.tower))
    return FunVal(go)


def v_proj(v: Value, i: int) -> Value:
    if not isinstance(v, PairVal):
        raise LangError("projection needs a pair")
    return v.fst if i == 0 else v.snd


def v_apply(f: Value, arg: Value, depth: int) -> Value:
    if not isinstance(f, FunVal):
        raise LangError(f"cannot apply a non-function: {f!r}")
    return f.fn(arg, depth)


def const_rational(q: Fraction) -> TowerVal:
    return TowerVal(rational_const(q.numerator, q.denominator))


def reify1(f: Value, depth: int) -> Tower:
    """Turn a function value into a tower whose LAST coordinate is the binder."""
    if not isinstance(f, FunVal):
        raise LangError("higher-order primitive expects a function argument")
    x = TowerVal(coord(depth, depth + 1))
    body = f.fn(x, depth + 1)
    return as_tower(body, depth + 1)


def deriv_value(f: Value) -> FunVal:
    """Derivative of a real function: f'((ctx,x); (0,1)) at the argument."""
    def at(x: Value, depth: int) -> Value:
        ft = reify1(f, depth)
        base = pair(identity(depth), as_tower(x, depth))
        unit_dir = SelectTower(depth, [Dyadic(0)] * depth + [Dyadic(1)])
        return TowerVal(compose(ft.tail(), pair(base, unit_dir)))
    return FunVal(at, "deriv")


def gradient2(f: Tower) -> tuple[Tower, Tower]:
    """Componentwise derivative towers in the last two coordinates."""
    if f.dom < 2:
        raise LangError("gradient2 needs two bound coordinates")
    d = f.dom

    def partial(i: int) -> Tower:
        entries = [Dyadic(0)] * d
        entries[d - 2 + i] = Dyadic(1)
        return compose(f.tail(), pair(identity(d), SelectTower(d, entries)))

    return partial(0), partial(1)


def make_builtins(cfg: HoConfig = DEFAULT_CONFIG) -> dict[str, Value]:
    """Primitive environment shared by the REPL and the Python libraries."""

    def xform(make) -> FunVal:
        def go(f: Value, depth: int) -> Value:
            return TowerVal(make(reify1(f, depth), cfg))
        return FunVal(go)

    def binop(op) -> FunVal:
        return FunVal(lambda a, d: FunVal(lambda b, d2: op(a, b)))

    return {
        "max": binop(v_max),
        "min": binop(v_min),
        "sqrt": _lift1(t_sqrt),
        "sin": _lift1(t_sin),
        "cos": _lift1(t_cos),
        "exp": _lift1(t_exp),
        "pi": TowerVal(pi_tower(0)),
        "integral01": xform(integral01),
        "cutRoot": xform(cut_root),
        "firstRoot": xform(first_root),
        "max01": xform(max01),
        "argmax01": xform(argmax01),
        "deriv": FunVal(lambda f, d: deriv_value(f), "deriv"),
    }
