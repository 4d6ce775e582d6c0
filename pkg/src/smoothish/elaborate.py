"""Elaboration from surface syntax to semantic values.

Scalar expressions become towers over their free-variable context;
lambdas become meta-level closures that elaborate their body at the
application site's context depth, so binder-introducing primitives can
reify them with the bound variable as the last coordinate.  Rational
literals a/b elaborate to division towers except when b is a power of
two (exact dyadic constant).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from . import parser as P
from .lang import (
    FunVal, LangError, PairVal, TowerVal, UNIT_VALUE, UnitVal, Value,
    const_rational, v_add, v_apply, v_div, v_mul, v_neg, v_proj, v_sub,
)

Env = dict[str, Value]


class ElabError(Exception):
    """Unbound name, arity/shape mismatch, or non-ground result."""


def _as_rational(e: P.Expr) -> Optional[Fraction]:
    """Fold literal / sign / division structure into one rational, if any."""
    if isinstance(e, P.Lit):
        return e.value
    if isinstance(e, P.Neg):
        q = _as_rational(e.operand)
        return None if q is None else -q
    if isinstance(e, P.BinOp) and e.op == "/":
        a, b = _as_rational(e.lhs), _as_rational(e.rhs)
        if a is not None and b is not None and b != 0:
            return a / b
    return None


def _literal(q: Fraction) -> Value:
    return const_rational(q)


def elaborate(e: P.Expr, env: Env, depth: int = 0) -> Value:
    if isinstance(e, P.Var):
        try:
            return env[e.name]
        except KeyError:
            raise ElabError(f"unbound name: {e.name}") from None
    if isinstance(e, P.Lit):
        return _literal(e.value)
    if isinstance(e, P.UnitLit):
        return UNIT_VALUE
    if isinstance(e, P.Lam):
        captured = dict(env)

        def body(arg: Value, d: int) -> Value:
            inner = dict(captured)
            inner[e.name] = arg
            return elaborate(e.body, inner, d)

        return FunVal(body, e.name)
    if isinstance(e, P.App):
        fv = elaborate(e.fn, env, depth)
        av = elaborate(e.arg, env, depth)
        try:
            return v_apply(fv, av, depth)
        except LangError as exc:
            raise ElabError(str(exc)) from None
    if isinstance(e, P.LetIn):
        bound = elaborate(e.bound, env, depth)
        inner = dict(env)
        inner[e.name] = bound
        return elaborate(e.body, inner, depth)
    if isinstance(e, P.BinOp):
        q = _as_rational(e)
        if q is not None:
            return _literal(q)
        lhs = elaborate(e.lhs, env, depth)
        rhs = elaborate(e.rhs, env, depth)
        ops = {"+": v_add, "-": v_sub, "*": v_mul, "/": v_div}
        try:
            return ops[e.op](lhs, rhs)
        except LangError as exc:
            raise ElabError(str(exc)) from None
    if isinstance(e, P.Neg):
        q = _as_rational(e)
        if q is not None:
            return _literal(q)
        try:
            return v_neg(elaborate(e.operand, env, depth))
        except LangError as exc:
            raise ElabError(str(exc)) from None
    if isinstance(e, P.Square):
        v = elaborate(e.operand, env, depth)
        try:
            return v_mul(v, v)
        except LangError as exc:
            raise ElabError(str(exc)) from None
    if isinstance(e, P.Pair):
        return PairVal(elaborate(e.fst, env, depth),
                       elaborate(e.snd, env, depth))
    if isinstance(e, P.Proj):
        v = elaborate(e.operand, env, depth)
        try:
            return v_proj(v, e.index)
        except LangError as exc:
            raise ElabError(str(exc)) from None
    raise ElabError(f"cannot elaborate {e!r}")


def elaborate_def(d: P.LetDef, env: Env) -> Value:
    """Top-level definition: type parameters are erased, value params curry."""
    expr: P.Expr = d.body
    for p in reversed(d.params):
        expr = P.Lam(p.name, p.type, expr)
    return elaborate(expr, env, 0)


def ground_tower(v: Value):
    """The closed scalar tower of a top-level result, or an explanation why not."""
    if isinstance(v, TowerVal):
        if v.tower.dom != 0:
            raise ElabError("expression has free variables")
        return v.tower
    if isinstance(v, PairVal):
        raise ElabError("result is a pair; project a component to evaluate it")
    if isinstance(v, (FunVal, UnitVal)):
        raise ElabError(
            "result is a function, not a ground real expression "
            "(higher-order results cannot be printed)")
    raise ElabError(f"cannot evaluate {v!r}")
