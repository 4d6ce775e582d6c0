"""Lexer, parser and printer for the surface language.

The grammar is the one the library listings use: simply-typed lambda
terms with `let` definitions, infix arithmetic, postfix squaring and
pair projection, and juxtaposition application binding tighter than any
operator.  Unicode spellings and their ASCII twins are interchangeable;
the printer emits ASCII.  `--` starts a line comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        where = f"line {line}, column {col}"
        hint = f" (expected one of: {', '.join(expected)})" if expected else ""
        super().__init__(f"{message} at {where}{hint}")
        self.line = line
        self.col = col
        self.expected = expected


# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lit:
    value: Fraction
    text: str = ""


@dataclass(frozen=True)
class UnitLit:
    pass


@dataclass(frozen=True)
class Lam:
    name: str
    type: Optional["Type"]
    body: "Expr"


@dataclass(frozen=True)
class App:
    fn: "Expr"
    arg: "Expr"


@dataclass(frozen=True)
class LetIn:
    name: str
    params: tuple["Param", ...]
    bound: "Expr"
    body: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Square:
    operand: "Expr"


@dataclass(frozen=True)
class Pair:
    fst: "Expr"
    snd: "Expr"


@dataclass(frozen=True)
class Proj:
    operand: "Expr"
    index: int


Expr = Union[Var, Lit, UnitLit, Lam, App, LetIn, BinOp, Neg, Square, Pair, Proj]


@dataclass(frozen=True)
class TReal:
    pass


@dataclass(frozen=True)
class TPair:
    fst: "Type"
    snd: "Type"


@dataclass(frozen=True)
class TArrow:
    arg: "Type"
    res: "Type"


@dataclass(frozen=True)
class TName:
    name: str
    args: tuple["Type", ...] = ()


Type = Union[TReal, TPair, TArrow, TName]


@dataclass(frozen=True)
class Param:
    name: str
    type: Optional[Type]


@dataclass(frozen=True)
class LetDef:
    name: str
    typarams: tuple[str, ...]
    params: tuple[Param, ...]
    rettype: Optional[Type]
    body: Expr


Toplevel = Union[LetDef, Expr]


# -- lexer ---------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>--[^\n]*)
  | (?P<newline>\n)
  | (?P<number>\d+\.\d+(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+|\d+)
  | (?P<arrow2>⇒|=>)
  | (?P<arrow>→|->)
  | (?P<sq>²|\^2)
  | (?P<lam>λ|\\)
  | (?P<ident>[A-Za-z_Ͱ-Ͽ℀-⅏][A-Za-z0-9_']*)
  | (?P<op>[()\[\],:=+*/-])
""", re.VERBOSE)

_KEYWORDS = {"let", "in"}


@dataclass
class Token:
    kind: str       # number ident lam arrow2 arrow sq op keyword eof
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    out: list[Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "newline":
            line += 1
            col = 1
        elif kind not in ("ws", "comment"):
            if kind == "ident" and text in _KEYWORDS:
                kind = "keyword"
            out.append(Token(kind, text, line, col))
            col += len(text)
        else:
            col += len(text)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


# -- parser --------------------------------------------------------------------


class Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            raise ParseError(f"unexpected {t.text!r}", t.line, t.col, (want,))
        return self.next()

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    # -- types ------------------------------------------------------------

    def parse_type(self) -> Type:
        left = self.parse_type_product()
        if self.at("arrow"):
            self.next()
            return TArrow(left, self.parse_type())
        return left

    def parse_type_product(self) -> Type:
        left = self.parse_type_atom()
        while self.at("op", "*"):
            self.next()
            left = TPair(left, self.parse_type_atom())
        return left

    def parse_type_atom(self) -> Type:
        t = self.peek()
        if self.at("op", "("):
            self.next()
            inner = self.parse_type()
            self.expect("op", ")")
            ty: Type = inner
        elif t.kind == "ident":
            self.next()
            if t.text in ("R", "ℝ", "ℝ"):
                ty = TReal()
            else:
                args = []
                while self.peek().kind == "ident" or self.at("op", "("):
                    args.append(self.parse_type_atom())
                ty = TName(t.text, tuple(args))
        else:
            raise ParseError(f"unexpected {t.text!r} in type", t.line, t.col,
                             ("R", "identifier", "("))
        while self.at("sq"):
            self.next()
            ty = TPair(ty, ty) if isinstance(ty, TReal) else TPair(ty, ty)
        return ty

    # -- expressions --------------------------------------------------------

    def parse_expr(self) -> Expr:
        if self.at("lam"):
            return self.parse_lambda()
        if self.at("keyword", "let"):
            return self.parse_let_in()
        return self.parse_additive()

    def parse_lambda(self) -> Expr:
        self.next()
        name = self.expect("ident").text
        ty = None
        if self.at("op", ":"):
            self.next()
            ty = self.parse_type()
        self.expect("arrow2")
        return Lam(name, ty, self.parse_expr())

    def parse_let_in(self) -> Expr:
        self.next()
        name = self.expect("ident").text
        bare, params, _rettype = self.parse_def_signature()
        self.expect("op", "=")
        bound = self.parse_expr()
        self.expect("keyword", "in")
        body = self.parse_expr()
        # local lets have no type parameters: bare names are value params
        all_params = tuple(Param(nm, None) for nm in bare) + params
        for p in reversed(all_params):
            bound = Lam(p.name, p.type, bound)
        return LetIn(name, (), bound, body)

    def parse_def_signature(self) -> tuple[tuple[str, ...], tuple[Param, ...], Optional[Type]]:
        """Type params (bare idents), value params (parenthesized), return type."""
        typarams: list[str] = []
        while self.peek().kind == "ident":
            typarams.append(self.next().text)
        params: list[Param] = []
        while self.at("op", "("):
            # lookahead: parameter group `(names : type)` vs start of the body
            save = self.pos
            self.next()
            names = []
            while self.peek().kind == "ident":
                names.append(self.next().text)
            if names and self.at("op", ":"):
                self.next()
                ty = self.parse_type()
                self.expect("op", ")")
                params.extend(Param(nm, ty) for nm in names)
            else:
                self.pos = save
                break
        rettype = None
        if self.at("op", ":"):
            self.next()
            rettype = self.parse_type()
        return tuple(typarams), tuple(params), rettype

    def parse_additive(self) -> Expr:
        left = self.parse_multiplicative()
        while self.at("op", "+") or self.at("op", "-"):
            op = self.next().text
            right = self.parse_multiplicative()
            left = BinOp(op, left, right)
        return left

    def parse_multiplicative(self) -> Expr:
        left = self.parse_unary()
        while self.at("op", "*") or self.at("op", "/"):
            op = self.next().text
            right = self.parse_unary()
            left = BinOp(op, left, right)
        return left

    def parse_unary(self) -> Expr:
        if self.at("op", "-"):
            self.next()
            return Neg(self.parse_unary())
        return self.parse_application()

    def parse_application(self) -> Expr:
        expr = self.parse_postfix()
        while self._starts_atom():
            expr = App(expr, self.parse_postfix())
        return expr

    def _starts_atom(self) -> bool:
        t = self.peek()
        if t.kind in ("number", "lam"):
            return True
        if t.kind == "ident":
            return True
        if t.kind == "op" and t.text == "(":
            return True
        return False

    def parse_postfix(self) -> Expr:
        expr = self.parse_atom()
        while True:
            if self.at("sq"):
                self.next()
                expr = Square(expr)
            elif self.at("op", "["):
                self.next()
                idx = self.expect("number")
                if idx.text not in ("0", "1"):
                    raise ParseError("projection index must be 0 or 1",
                                     idx.line, idx.col)
                self.expect("op", "]")
                expr = Proj(expr, int(idx.text))
            else:
                return expr

    def parse_atom(self) -> Expr:
        t = self.peek()
        if t.kind == "number":
            self.next()
            return Lit(_number_value(t.text), t.text)
        if t.kind == "ident":
            self.next()
            return Var(t.text)
        if t.kind == "lam":
            return self.parse_lambda()
        if self.at("op", "("):
            self.next()
            if self.at("op", ")"):
                self.next()
                return UnitLit()
            first = self.parse_expr()
            if self.at("op", ","):
                self.next()
                second = self.parse_expr()
                self.expect("op", ")")
                return Pair(first, second)
            self.expect("op", ")")
            return first
        raise ParseError(f"unexpected {t.text!r}", t.line, t.col,
                         ("number", "identifier", "(", "lambda"))

    # -- top level -----------------------------------------------------------

    def parse_toplevel(self) -> Toplevel:
        if self.at("keyword", "let") and not self._is_let_in():
            self.next()
            name = self.expect("ident").text
            typarams, params, rettype = self.parse_def_signature()
            self.expect("op", "=")
            body = self.parse_expr()
            return LetDef(name, typarams, params, rettype, body)
        return self.parse_expr()

    def _is_let_in(self) -> bool:
        """Distinguish a toplevel `let` from a `let .. in ..` expression."""
        depth = 0
        i = self.pos
        while i < len(self.toks):
            t = self.toks[i]
            if t.kind == "keyword" and t.text == "let" and i > self.pos:
                depth += 1
            elif t.kind == "keyword" and t.text == "in":
                if depth == 0:
                    return True
                depth -= 1
            i += 1
        return False

    def parse_program(self) -> list[Toplevel]:
        out = []
        while not self.at("eof"):
            out.append(self.parse_toplevel())
        return out

    def finish(self):
        t = self.peek()
        if t.kind != "eof":
            raise ParseError(f"trailing input {t.text!r}", t.line, t.col)


def _number_value(text: str) -> Fraction:
    return Fraction(text) if ("." in text or "e" in text or "E" in text) \
        else Fraction(int(text))


def parse_expr(src: str) -> Expr:
    p = Parser(src)
    e = p.parse_expr()
    p.finish()
    return e


def parse_program(src: str) -> list[Toplevel]:
    return Parser(src).parse_program()


# -- printer ---------------------------------------------------------------------


def type_str(ty: Type) -> str:
    if isinstance(ty, TReal):
        return "R"
    if isinstance(ty, TPair):
        if isinstance(ty.fst, TReal) and isinstance(ty.snd, TReal):
            return "R^2"
        return f"({type_str(ty.fst)} * {type_str(ty.snd)})"
    if isinstance(ty, TArrow):
        return f"({type_str(ty.arg)} -> {type_str(ty.res)})"
    if ty.args:
        return ty.name + " " + " ".join(f"({type_str(a)})" for a in ty.args)
    return ty.name


def expr_str(e: Expr, prec: int = 0) -> str:
    # precedence levels: 0 lambda/let, 1 additive, 2 multiplicative,
    # 3 unary, 4 application, 5 postfix/atom
    def wrap(s: str, level: int) -> str:
        return f"({s})" if prec > level else s

    if isinstance(e, Var):
        return e.name
    if isinstance(e, Lit):
        v = e.value
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(e, UnitLit):
        return "()"
    if isinstance(e, Lam):
        ann = f" : {type_str(e.type)}" if e.type is not None else ""
        return wrap(f"\\{e.name}{ann} => {expr_str(e.body)}", 0)
    if isinstance(e, App):
        return wrap(f"{expr_str(e.fn, 4)} {expr_str(e.arg, 5)}", 4)
    if isinstance(e, LetIn):
        return wrap(f"let {e.name} = {expr_str(e.bound)} in {expr_str(e.body)}", 0)
    if isinstance(e, BinOp):
        level = 1 if e.op in "+-" else 2
        return wrap(f"{expr_str(e.lhs, level)} {e.op} {expr_str(e.rhs, level + 1)}", level)
    if isinstance(e, Neg):
        return wrap(f"- {expr_str(e.operand, 3)}", 3)
    if isinstance(e, Square):
        return wrap(f"{expr_str(e.operand, 5)}^2", 5)
    if isinstance(e, Pair):
        return f"({expr_str(e.fst)}, {expr_str(e.snd)})"
    if isinstance(e, Proj):
        return wrap(f"{expr_str(e.operand, 5)}[{e.index}]", 5)
    raise TypeError(e)
