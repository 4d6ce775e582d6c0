"""Differentiable higher-order primitives over the unit interval.

Each primitive maps a tower with one extra bound coordinate (always the
LAST context coordinate) to a tower without it:

    integral01, cut_root, first_root, max01, argmax01
        : Tower(g+1 -> 1) -> Tower(g -> 1)

Values are computed by interval subdivision (Riemann sums, sign-change
scans, branch and bound), all driven by the shared refinement index.
Derivatives are towers built from the argument's own derivative tower:
integration commutes with differentiation; root-finding and argmax use
the implicit function theorem, with well-founded recursive references
to the primitive's own tower.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .creal import precision_bits
from .dyadic import Dyadic, ZERO, ONE
from .interval import (
    BOTTOM, IV_ONE, IV_ZERO, UNIT, Interval, IntervalBox,
    iv_add, iv_div, iv_hull, iv_meet, iv_scale2, iv_sub,
)
from .tower import (
    FoldDerTower, SelectTower, Tower,
    compose, identity, pair, t_div, t_neg,
)

TowerXform = Callable[[Tower], Tower]


@dataclass(frozen=True)
class HoConfig:
    """Search knobs; soundness never depends on them, only tightness/speed."""
    newton: bool = True
    bnb_max_nodes: int = 64
    window_cap: int = 24      # cut_root search window [-2^k, 2^k] growth cap
    subdiv_cap: int = 20      # per-refinement subdivision count cap (2^k)


DEFAULT_CONFIG = HoConfig()


def _ctx_dim(f: Tower) -> int:
    if f.dom < 1:
        raise ValueError("higher-order primitive needs a bound coordinate")
    return f.dom - 1


def _gamma_slices(g: int) -> tuple[Tower, Tower]:
    """(gamma, dgamma) selectors out of the doubled context."""
    return (SelectTower(2 * g, list(range(g))),
            SelectTower(2 * g, list(range(g, 2 * g))))


def _sign(iv: Interval) -> Optional[int]:
    if iv.strictly_positive():
        return 1
    if iv.strictly_negative():
        return -1
    return None


def _eval_at(f: Tower, n: int, gamma: IntervalBox, x: Interval) -> Interval:
    return f.deriv_eval(n, gamma + IntervalBox([x]))[0]


def _pt(d: Dyadic) -> Interval:
    return Interval.point(d)


def _pow2(k: int) -> Fraction:
    return Fraction(1, 1 << -k) if k < 0 else Fraction(1 << k)


# -- integration -----------------------------------------------------------


def integral01(f: Tower, cfg: HoConfig = DEFAULT_CONFIG) -> Tower:
    """Riemann integral over the bound coordinate on [0,1].

    The derivative tower integrates f's derivatives with the bound
    coordinate's perturbation pinned to 0.
    """
    g = _ctx_dim(f)

    def value(n: int, gamma: IntervalBox) -> IntervalBox:
        p = precision_bits(n)
        s = min(n, cfg.subdiv_cap)
        acc = IV_ZERO
        for j in range(1 << s):
            slice_iv = Interval(Dyadic(j, -s), Dyadic(j + 1, -s))
            acc = iv_add(acc, f.deriv_eval(n, gamma + IntervalBox([slice_iv]))[0], p)
        return IntervalBox([iv_scale2(acc, -s)])

    def tail() -> Tower:
        # (gamma, dgamma, x) -> ((gamma, x), (dgamma, 0)), then integrate over x
        entries = list(range(g)) + [2 * g] + list(range(g, 2 * g)) + [ZERO]
        reorder = SelectTower(2 * g + 1, entries)
        return integral01(compose(f.tail(), reorder), cfg)

    return FoldDerTower(g, 1, value, tail)


# -- interval Newton ---------------------------------------------------------


def newton_step(f: Tower, n: int, gamma: IntervalBox,
                window: Interval) -> Interval:
    """One interval-Newton contraction; sound (keeps every root in window).

    Falls back to returning the window unchanged when the slope encloses
    zero or is unbounded.
    """
    if not window.is_finite():
        return window
    p = precision_bits(n)
    mid = window.midpoint()
    fmid = _eval_at(f, n, gamma, _pt(mid))
    slope_in = (gamma + IntervalBox([window])
                + IntervalBox([IV_ZERO] * gamma.dims + [IV_ONE]))
    slope = f.tail().deriv_eval(n, slope_in)[0]
    if slope.contains_zero() or not slope.is_finite() or not fmid.is_finite():
        return window
    cand = iv_sub(Interval.point(mid), iv_div(fmid, slope, p), p)
    if (cand.hi is not None and cand.hi < window.lo) or \
       (cand.lo is not None and cand.lo > window.hi):
        return window  # no root in the window; contraction would discard it
    return iv_meet(window, cand)


def _newton_contract(f: Tower, n: int, gamma: IntervalBox,
                     window: Interval, rounds: int) -> Interval:
    for _ in range(rounds):
        new = newton_step(f, n, gamma, window)
        if new == window:
            break
        window = new
    return window


# -- implicit-function-theorem derivative tower -------------------------------


def _ift_tail(f: Tower, root_ref: Callable[[], Tower]) -> Tower:
    """-f'((gamma,y),(dgamma,0)) / f'((gamma,y),(0,1)), y the root tower."""
    g = f.dom - 1
    sel_g, sel_dg = _gamma_slices(g)
    y_at = compose(root_ref(), sel_g)
    fp = f.tail()
    num = compose(fp, pair(sel_g, y_at, sel_dg, SelectTower(2 * g, [ZERO])))
    den = compose(fp, pair(sel_g, y_at, SelectTower(2 * g, [ZERO] * g + [ONE])))
    return t_neg(t_div(num, den))


# -- cut_root ----------------------------------------------------------------


def cut_root(f: Tower, cfg: HoConfig = DEFAULT_CONFIG) -> Tower:
    """Root of a function positive below its single root, negative above.

    Value: dyadic probes over an exponentially growing window establish
    a bracket, then bisection plus optional interval Newton tighten it.
    Derivative: implicit function theorem, as a tower.
    """
    g = _ctx_dim(f)

    def value(n: int, gamma: IntervalBox) -> IntervalBox:
        w = min(n + 1, cfg.window_cap)
        lo: Optional[Dyadic] = None     # largest provably-positive probe
        hi: Optional[Dyadic] = None     # smallest provably-negative probe
        probes = sorted({Fraction(0)} | {Fraction(s << j) for j in range(w + 1)
                                         for s in (1, -1)})
        for q in probes:
            d = Dyadic(q.numerator)
            sq = _sign(_eval_at(f, n, gamma, _pt(d)))
            if sq == 1:
                lo = d
            elif sq == -1 and hi is None:
                hi = d
        if lo is not None and hi is not None and hi < lo:
            return IntervalBox([BOTTOM])  # sign pattern is not +..-
        if lo is None or hi is None:
            return IntervalBox([Interval(lo, hi)])
        window = Interval(lo, hi)
        tight = _pow2(-(precision_bits(n) - 8))
        for _ in range(4 + 3 * n):
            if cfg.newton:
                window = _newton_contract(f, n, gamma, window, 2)
            if window.width() <= tight:
                break
            mid = window.midpoint()
            moved = False
            for c in (mid,
                      (window.lo + mid).scale2(-1),
                      (mid + window.hi).scale2(-1)):
                sq = _sign(_eval_at(f, n, gamma, _pt(c)))
                if sq == 1 and c > window.lo:
                    window = Interval(c, window.hi)
                    moved = True
                    break
                if sq == -1 and c < window.hi:
                    window = Interval(window.lo, c)
                    moved = True
                    break
            if not moved:
                break
        return IntervalBox([window])

    root = FoldDerTower(g, 1, value, lambda: _ift_tail(f, lambda: root))
    return root


# -- first_root ---------------------------------------------------------------


def first_root(f: Tower, cfg: HoConfig = DEFAULT_CONFIG) -> Tower:
    """First sign change of f in the bound coordinate on [0,1].

    The sign at 0 must become provable at some refinement; the value
    encloses the first point where the sign provably flips away from it.
    Derivative: the same implicit-function-theorem tower as cut_root.
    """
    g = _ctx_dim(f)

    def value(n: int, gamma: IntervalBox) -> IntervalBox:
        s0 = _sign(_eval_at(f, n, gamma, _pt(ZERO)))
        if s0 is None:
            return IntervalBox([UNIT])
        lo, hi = ZERO, ONE
        proven: list[Interval] = []      # boxes where f provably keeps sign s0
        undecided: list[Interval] = [UNIT]
        for _ in range(min(n, cfg.subdiv_cap) + 2):
            still: list[Interval] = []
            for box in undecided:
                if box.lo >= hi:
                    continue
                s = _sign(f.deriv_eval(n, gamma + IntervalBox([box]))[0])
                if s == s0:
                    proven.append(box)
                elif s == -s0 and box.lo < hi:
                    hi = box.lo
                else:
                    still.append(box)
            # extend the contiguous provable prefix through proven boxes
            changed = True
            while changed:
                changed = False
                for b in proven:
                    if b.lo <= lo < b.hi:
                        lo = b.hi
                        changed = True
            undecided = [b for b in still if b.hi > lo and b.lo < hi]
            if not undecided:
                break
            if 2 * len(undecided) > cfg.bnb_max_nodes:
                break  # same-index re-evaluation cannot improve; stop
            split: list[Interval] = []
            for box in undecided:
                mid = box.midpoint()
                split.append(Interval(box.lo, mid))
                split.append(Interval(mid, box.hi))
            undecided = split
        if hi < lo:
            return IntervalBox([BOTTOM])  # soundness guard
        window = Interval(lo, hi)
        if cfg.newton:
            window = _newton_contract(f, n, gamma, window, 2 + n)
        return IntervalBox([window])

    root = FoldDerTower(g, 1, value, lambda: _ift_tail(f, lambda: root))
    return root


# -- branch and bound over [0,1] ----------------------------------------------


def _bnb(f: Tower, n: int, gamma: IntervalBox,
         cfg: HoConfig) -> tuple[Interval, Interval]:
    """(enclosure of max f over the bound coordinate, hull of maximizers).

    Best-first branch and bound with two sharpeners: a midpoint probe of
    the most promising node tightens the global lower bound, and a
    monotonicity test collapses any node where the slope enclosure has a
    provable sign to the only endpoint that can host a maximizer.
    Pruning uses strict interval dominance only; ties never prune, so
    the hull stays sound for the maximizer semantics.
    """
    rounds = min(n, cfg.subdiv_cap) + 8
    g = gamma.dims
    fp = f.tail()
    slope_dir = IntervalBox([IV_ZERO] * g + [IV_ONE])

    def bound(node: Interval) -> Interval:
        return f.deriv_eval(n, gamma + IntervalBox([node]))[0]

    def assess(node: Interval) -> tuple[Interval, Interval]:
        if node.lo != node.hi:
            slope = fp.deriv_eval(n, gamma + IntervalBox([node]) + slope_dir)[0]
            if slope.strictly_positive():
                node = Interval.point(node.hi)   # increasing: argmax at right
            elif slope.strictly_negative():
                node = Interval.point(node.lo)   # decreasing: argmax at left
        return node, bound(node)

    kept: list[tuple[Interval, Interval]] = [assess(UNIT)]
    best_lo: Optional[Dyadic] = kept[0][1].lo
    for _ in range(rounds):
        # midpoint probe of the most promising node sharpens the bound
        top = max(kept, key=_upper_key)[0]
        probe = bound(Interval.point(top.midpoint())).lo
        if probe is not None and (best_lo is None or probe > best_lo):
            best_lo = probe
        if best_lo is not None:
            kept = [(node, b) for node, b in kept
                    if not (b.hi is not None and b.hi < best_lo)]
        budget = cfg.bnb_max_nodes - len(kept)
        splittable = [item for item in kept if item[0].lo != item[0].hi]
        if budget <= 0 or not splittable:
            break
        splittable.sort(key=_upper_key, reverse=True)
        split = splittable[:budget]
        # the extreme survivors bound the maximizer hull: always refine
        # them so the hull converges, not just the maximum value
        for extreme in (min(splittable, key=_left_key),
                        max(splittable, key=_right_key)):
            if extreme not in split:
                split.append(extreme)
        ids = {id(item) for item in split}
        kept = [item for item in kept if id(item) not in ids]
        for node, _ in split:
            mid = node.midpoint()
            for half in (Interval(node.lo, mid), Interval(mid, node.hi)):
                shrunk, b = assess(half)
                if b.lo is not None and (best_lo is None or b.lo > best_lo):
                    best_lo = b.lo
                kept.append((shrunk, b))
    if best_lo is not None:
        kept = [(node, b) for node, b in kept
                if not (b.hi is not None and b.hi < best_lo)]
    val_hi: Optional[Dyadic] = None
    for _, b in kept:
        if b.hi is None:
            val_hi = None
            break
        val_hi = b.hi if val_hi is None else max(val_hi, b.hi)
    hull = kept[0][0]
    for node, _ in kept[1:]:
        hull = iv_hull(hull, node)
    return Interval(best_lo, val_hi), hull


def _upper_key(item: tuple[Interval, Interval]):
    b = item[1]
    return (1, ZERO) if b.hi is None else (0, b.hi)


def _left_key(item: tuple[Interval, Interval]):
    return item[0].lo


def _right_key(item: tuple[Interval, Interval]):
    return item[0].hi


# -- argmax01 / max01 ----------------------------------------------------------


class _ArgmaxDerivTower(Tower):
    """Case-split derivative of argmax01 by maximizer location.

    Interior maximizer: second-order implicit function theorem on the
    slope of f in the bound coordinate.  Provably-pinned boundary
    maximizer: 0.  Undecided: bottom.  The case is decided per query
    from the gamma part of the input box, so wide queries stay sound.
    """

    __slots__ = ("f", "argmax", "gdim", "_interior")

    def __init__(self, f: Tower, argmax: Tower):
        g = f.dom - 1
        super().__init__(2 * g, 1)
        self.f = f
        self.argmax = argmax
        self.gdim = g
        self._interior: Optional[Tower] = None

    def _interior_tower(self) -> Tower:
        # -f''(((g,y),(0,1)); ((dg,0),(0,0))) / f''(same base; ((0,1),(0,0)))
        if self._interior is None:
            g = self.gdim
            sel_g, sel_dg = _gamma_slices(g)
            y_at = compose(self.argmax, sel_g)
            fpp = self.f.tail().tail()
            base = (sel_g, y_at, SelectTower(2 * g, [ZERO] * g + [ONE]))
            num = compose(fpp, pair(*base, sel_dg,
                                    SelectTower(2 * g, [ZERO] * (g + 2))))
            den = compose(fpp, pair(*base,
                                    SelectTower(2 * g, [ZERO] * g + [ONE] + [ZERO] * (g + 1))))
            self._interior = t_neg(t_div(num, den))
        return self._interior

    def _case(self, n: int, gamma: IntervalBox) -> str:
        y = self.argmax.deriv_eval(n, gamma)[0]
        if y.lo is None or y.hi is None:
            return "bot"
        if y.lo.sign() > 0 and y.hi < ONE:
            return "interior"
        probe = (gamma + IntervalBox([y])
                 + IntervalBox([IV_ZERO] * self.gdim + [IV_ONE]))
        slope = self.f.tail().deriv_eval(n, probe)[0]
        if y.lo.sign() > 0 and slope.strictly_positive():
            return "zero"   # pinned at the right boundary
        if y.hi < ONE and slope.strictly_negative():
            return "zero"   # pinned at the left boundary
        return "bot"

    def _eval(self, n, x, dirs):
        case = self._case(n, IntervalBox(x.coords[:self.gdim]))
        if case == "interior":
            return self._interior_tower().deriv_eval(n, x, dirs)
        if case == "zero":
            return self._zeros()
        return self._bottom()


def argmax01(f: Tower, cfg: HoConfig = DEFAULT_CONFIG) -> Tower:
    """Hull of the maximizing arguments of the bound coordinate on [0,1]."""
    g = _ctx_dim(f)

    def value(n: int, gamma: IntervalBox) -> IntervalBox:
        return IntervalBox([_bnb(f, n, gamma, cfg)[1]])

    argmax = FoldDerTower(g, 1, value, lambda: _ArgmaxDerivTower(f, argmax))
    return argmax


def max01(f: Tower, cfg: HoConfig = DEFAULT_CONFIG) -> Tower:
    """Maximum over the bound coordinate on [0,1], by branch and bound.

    Derivative tower: derivative of f composed with the argmax tower.
    """
    g = _ctx_dim(f)
    arg = argmax01(f, cfg)

    def value(n: int, gamma: IntervalBox) -> IntervalBox:
        return IntervalBox([_bnb(f, n, gamma, cfg)[0]])

    return FoldDerTower(g, 1, value,
                        lambda: compose(f, pair(identity(g), arg)).tail())
