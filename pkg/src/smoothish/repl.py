"""REPL and batch evaluator.

Expressions evaluate to closed scalar towers, get driven through the
refinement loop to the requested eps, and print as decimal intervals
whose printed bounds always contain the underlying dyadic interval.
A per-query `eps=VALUE>` prefix overrides the session tolerance, echoing
the transcripts this tool is meant to reproduce.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from . import parser as P
from .creal import NonConvergence, eval_to_eps, monotonize
from .elaborate import ElabError, elaborate, elaborate_def, ground_tower
from .hoprims import HoConfig
from .interval import Interval, IntervalBox, SoundnessError
from .lang import LangError, make_builtins
from .parser import ParseError
from .stdlib import load_prelude


@dataclass
class SessionConfig:
    eps: Fraction = Fraction(1, 100)
    budget: int = 60
    timeout: Optional[float] = 120.0
    newton: bool = True
    bnb_max_nodes: int = 64
    window_cap: int = 24

    def ho_config(self) -> HoConfig:
        return HoConfig(newton=self.newton, bnb_max_nodes=self.bnb_max_nodes,
                        window_cap=self.window_cap)


def _parse_eps(text: str) -> Fraction:
    try:
        if "/" in text:
            num, den = text.split("/")
            return Fraction(int(num), int(den))
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"bad eps value: {text}")


def _decimal_digits(eps: Fraction) -> int:
    # one digit beyond the tolerance, as in the transcripts this mimics
    d = 0
    scale = Fraction(1)
    while scale > eps and d < 40:
        d += 1
        scale /= 10
    return d + 1


def _dec_dir(q: Fraction, digits: int, toward_up: bool) -> str:
    scaled = q * 10 ** digits
    n = -((-scaled.numerator) // scaled.denominator) if toward_up \
        else scaled.numerator // scaled.denominator
    sign = "-" if n < 0 else ""
    n = abs(n)
    whole, frac = divmod(n, 10 ** digits)
    return f"{sign}{whole}.{str(frac).zfill(digits)}"


def format_interval(iv: Interval, eps: Fraction) -> str:
    digits = _decimal_digits(eps)
    lo = "-inf" if iv.lo is None else _dec_dir(iv.lo.as_fraction(), digits, False)
    hi = "inf" if iv.hi is None else _dec_dir(iv.hi.as_fraction(), digits, True)
    return f"[{lo}, {hi}]"


class Session:
    """Definitions plus evaluation configuration.

    Config changes rebuild the environment (primitives capture the
    search knobs), replaying user definitions in order.
    """

    def __init__(self, config: Optional[SessionConfig] = None):
        self.config = config or SessionConfig()
        self.user_defs: list[P.LetDef] = []
        self._rebuild()

    def _rebuild(self):
        self.env = load_prelude(dict(make_builtins(self.config.ho_config())))
        for d in self.user_defs:
            self.env[d.name] = elaborate_def(d, self.env)

    def set_option(self, name: str, value: str):
        if name == "newton":
            if value not in ("on", "off"):
                raise ValueError("usage: :set newton on|off")
            self.config = replace(self.config, newton=(value == "on"))
            self._rebuild()
        elif name == "budget":
            self.config = replace(self.config, budget=int(value))
        elif name == "timeout":
            self.config = replace(self.config, timeout=float(value) or None)
        elif name == "eps":
            self.config = replace(self.config, eps=_parse_eps(value))
        elif name == "bnb-nodes":
            self.config = replace(self.config, bnb_max_nodes=int(value))
            self._rebuild()
        elif name == "window-cap":
            self.config = replace(self.config, window_cap=int(value))
            self._rebuild()
        else:
            raise ValueError(f"unknown option {name}")

    def define(self, d: P.LetDef):
        self.env[d.name] = elaborate_def(d, self.env)
        self.user_defs.append(d)

    def evaluate(self, expr: P.Expr, eps: Fraction) -> Interval:
        tower = ground_tower(elaborate(expr, self.env, 0))
        creal = monotonize(lambda n: tower.value(n, _EMPTY_BOX)[0])
        iv, _ = eval_to_eps(creal, eps, self.config.budget, self.config.timeout)
        return iv

    def run_line(self, line: str, out) -> Optional[int]:
        """Process one input line; returns an exit status for batch use."""
        line = line.strip()
        if not line or line.startswith("--"):
            return 0
        eps = self.config.eps
        if line.startswith("eps=") and ">" in line:
            head, _, rest = line.partition(">")
            try:
                eps = _parse_eps(head[4:].strip())
            except ValueError as exc:
                print(f"error: {exc}", file=out)
                return 1
            line = rest.strip()
            if not line:
                self.config = replace(self.config, eps=eps)
                return 0
        if line.startswith(":"):
            return self._command(line, out)
        try:
            items = P.parse_program(line)
            status = 0
            for item in items:
                if isinstance(item, P.LetDef):
                    self.define(item)
                else:
                    iv = self.evaluate(item, eps)
                    print(format_interval(iv, eps), file=out)
            return status
        except (ParseError, ElabError, LangError) as exc:
            print(f"error: {exc}", file=out)
            return 1
        except NonConvergence as exc:
            print(f"(no convergence after {exc.steps} refinements: "
                  f"tightest interval {format_interval(exc.best, eps)})", file=out)
            return 2
        except SoundnessError as exc:
            print(f"internal soundness bug: {exc}", file=out)
            return 1

    def _command(self, line: str, out) -> int:
        parts = line.split()
        cmd = parts[0]
        try:
            if cmd == ":quit":
                raise SystemExit(0)
            if cmd == ":set" and len(parts) == 3:
                self.set_option(parts[1], parts[2])
                return 0
            if cmd == ":load" and len(parts) == 2:
                return self.load_file(parts[1], out)
            print(f"error: unknown command {line!r} "
                  "(try :load FILE, :set KEY VALUE, :quit)", file=out)
            return 1
        except (ValueError, OSError) as exc:
            print(f"error: {exc}", file=out)
            return 1

    def load_file(self, path: str, out) -> int:
        with open(path) as fh:
            src = fh.read()
        try:
            items = P.parse_program(src)
            for item in items:
                if isinstance(item, P.LetDef):
                    self.define(item)
                else:
                    iv = self.evaluate(item, self.config.eps)
                    print(format_interval(iv, self.config.eps), file=out)
            return 0
        except (ParseError, ElabError, LangError) as exc:
            print(f"error in {path}: {exc}", file=out)
            return 1


_EMPTY_BOX = IntervalBox([])


def repl(session: Session):
    print("smoothish: arbitrary-precision differentiable evaluator "
          "(:quit to exit)")
    while True:
        try:
            line = input(f"eps={float(session.config.eps):g}> ")
        except EOFError:
            print()
            return
        except KeyboardInterrupt:
            print()
            continue
        try:
            session.run_line(line, sys.stdout)
        except SystemExit:
            return


def main(argv: Optional[list[str]] = None) -> int:
    ap = argparse.ArgumentParser(
        prog="smoothish",
        description="Evaluate differentiable-programming expressions to "
                    "guaranteed interval enclosures.")
    ap.add_argument("--eps", default="1e-2", help="precision tolerance")
    ap.add_argument("--budget", type=int, default=60, help="max refinement steps")
    ap.add_argument("--timeout", type=float, default=120.0,
                    help="wall-clock limit in seconds (0 disables)")
    ap.add_argument("--newton", choices=["on", "off"], default="on",
                    help="interval-Newton acceleration in root finding")
    ap.add_argument("--bnb-nodes", type=int, default=64,
                    help="branch-and-bound node cap per refinement step")
    ap.add_argument("--window-cap", type=int, default=24,
                    help="cutRoot search window growth cap (power of two)")
    ap.add_argument("--load", action="append", default=[], metavar="FILE",
                    help="load definitions before evaluating")
    ap.add_argument("--eval", dest="query", default=None, metavar="QUERY",
                    help="evaluate one query and exit")
    args = ap.parse_args(argv)

    try:
        config = SessionConfig(
            eps=_parse_eps(args.eps),
            budget=args.budget,
            timeout=args.timeout or None,
            newton=args.newton == "on",
            bnb_max_nodes=args.bnb_nodes,
            window_cap=args.window_cap,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    session = Session(config)

    for path in args.load:
        status = session.load_file(path, sys.stdout)
        if status:
            return status

    if args.query is not None:
        return session.run_line(args.query, sys.stdout) or 0

    repl(session)
    return 0


if __name__ == "__main__":
    sys.exit(main())
