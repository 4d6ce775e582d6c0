"""Arbitrary-precision differentiable computation on interval towers."""

from .creal import CReal, NonConvergence, eval_to_eps, monotonize, refine_schedule
from .dyadic import Dyadic
from .hoprims import (
    DEFAULT_CONFIG, HoConfig, argmax01, cut_root, first_root, integral01,
    max01, newton_step,
)
from .interval import BOTTOM, Interval, IntervalBox, SoundnessError, Trichotomy
from .tower import Tower, compose, deriv_op, fold_der, pair, weaken

__all__ = [
    "BOTTOM", "CReal", "DEFAULT_CONFIG", "Dyadic", "HoConfig", "Interval",
    "IntervalBox", "NonConvergence", "SoundnessError", "Tower", "Trichotomy",
    "argmax01", "compose", "cut_root", "deriv_op", "eval_to_eps", "first_root",
    "fold_der", "integral01", "max01", "monotonize", "newton_step", "pair",
    "refine_schedule", "weaken",
]
