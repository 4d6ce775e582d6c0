"""Computable reals as monotone refinement sequences of intervals.

A CReal is a function from a refinement index to an interval enclosure;
one index drives every approximation knob (mantissa precision and the
subdivision counts of the higher-order primitives), so a single outer
loop refines everything uniformly and reproducibly.  Monotonicity is
enforced by meeting each raw enclosure with all earlier ones rather
than assumed.
"""

from __future__ import annotations

import time
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .interval import Interval, iv_meet


SUBDIV_CAP = 20


def precision_bits(n: int) -> int:
    """Working mantissa length at refinement index n."""
    return 30 + 20 * n


def subdivisions(n: int, cap: int = SUBDIV_CAP) -> int:
    return 1 << min(n, cap)


def refine_schedule(n: int, cap: int = SUBDIV_CAP) -> tuple[int, int]:
    return precision_bits(n), subdivisions(n, cap)


class NonConvergence(Exception):
    """Refinement stopped before reaching the requested width.

    Carries the tightest interval reached; genuinely nonmaximal values
    (a Clarke hull like [0,1]) surface here, and so do exhausted budgets.
    """

    def __init__(self, best: Interval, steps: int, reason: str):
        super().__init__(f"no convergence after {steps} refinements ({reason}); "
                         f"tightest interval {best}")
        self.best = best
        self.steps = steps
        self.reason = reason


class CReal:
    """Monotone refinement sequence; build via `monotonize`."""

    __slots__ = ("_raw", "_memo")

    def __init__(self, raw: Callable[[int], Interval]):
        self._raw = raw
        self._memo: list[Interval] = []

    def approx(self, n: int) -> Interval:
        memo = self._memo
        while len(memo) <= n:
            k = len(memo)
            iv = self._raw(k)
            if memo:
                iv = iv_meet(memo[-1], iv)
            memo.append(iv)
        return memo[n]


def monotonize(raw: Callable[[int], Interval]) -> CReal:
    return CReal(raw)


class CRealBox:
    __slots__ = ("coords",)

    def __init__(self, coords: Sequence[CReal]):
        self.coords = tuple(coords)

    @property
    def dims(self) -> int:
        return len(self.coords)

    def approx(self, n: int) -> list[Interval]:
        return [c.approx(n) for c in self.coords]


def eval_to_eps(x: CReal, eps: Fraction, budget: int = 60,
                timeout: Optional[float] = None) -> tuple[Interval, int]:
    """Drive refinement until width <= eps; (interval, steps used).

    Raises NonConvergence when the budget or optional wall-clock limit
    runs out first.  With no timeout the outcome depends only on the
    expression, eps and budget, so results are reproducible.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    deadline = None if timeout is None else time.monotonic() + timeout
    best = None
    n = 0
    while n <= budget:
        best = x.approx(n)
        w = best.width()
        if w is not None and w <= eps:
            return best, n
        if deadline is not None and time.monotonic() > deadline:
            raise NonConvergence(best, n, "timeout")
        n += 1
    assert best is not None
    raise NonConvergence(best, budget, "budget exhausted")
