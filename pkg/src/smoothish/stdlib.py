"""User-facing operators and the shipped libraries.

`deriv` / `gradient2` are the operational derivative operators at ground
type.  The measure, surface and maximizer libraries ship as a prelude
source file (so the listings double as parser tests); this module loads
it once and exposes the definitions as Python values, next to a few
tower-level helpers for building scenes programmatically.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from .elaborate import ElabError, Env, elaborate, elaborate_def, ground_tower
from .hoprims import DEFAULT_CONFIG, HoConfig
from .lang import (
    FunVal, LangError, PairVal, TowerVal, Value,
    deriv_value, gradient2, make_builtins, reify1, v_apply,
)
from . import parser as P


def prelude_source() -> str:
    return resources.files("smoothish").joinpath("prelude.sm").read_text()


def load_prelude(env: Env) -> Env:
    """Elaborate the prelude listings on top of the given environment."""
    for item in P.parse_program(prelude_source()):
        if isinstance(item, P.LetDef):
            env[item.name] = elaborate_def(item, env)
        else:
            raise ElabError("prelude must contain only definitions")
    return env


@lru_cache(maxsize=None)
def default_env() -> Env:
    """Builtins plus the prelude, with default search configuration."""
    return load_prelude(dict(make_builtins(DEFAULT_CONFIG)))


def prelude_value(name: str) -> Value:
    try:
        return default_env()[name]
    except KeyError:
        raise KeyError(f"no prelude definition named {name}") from None


def apply_values(f: Value, *args: Value, depth: int = 0) -> Value:
    out = f
    for a in args:
        out = v_apply(out, a, depth)
    return out


__all__ = [
    "DEFAULT_CONFIG", "ElabError", "FunVal", "HoConfig", "LangError",
    "PairVal", "TowerVal", "Value", "apply_values", "default_env",
    "deriv_value", "elaborate", "elaborate_def", "gradient2", "ground_tower",
    "load_prelude", "make_builtins", "prelude_source", "prelude_value",
    "reify1",
]
