"""Concrete syntax for PCTL formulae.

Grammar (lowest precedence first)::

    formula := disj ( '=>' formula )?          right associative
    disj    := conj ( '|' conj )*
    conj    := unary ( '&' unary )*
    unary   := '!' unary | 'true' | 'false' | IDENT | '(' formula ')'
             | 'P' CMP RAT '[' path ']' | 'EXACT' '{' IDENT (',' IDENT)* '}'
    path    := 'X' formula | 'F' ('<=' INT)? formula | 'G' formula
             | formula 'U' ('<=' INT)? formula

``G`` is only accepted under ``P=1`` and is sugar for ``P=0 [ F !f ]``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..errors import ParseError
from ..geometry import format_rat
from .formula import (
    FALSE, TRUE, And, Atom, BoundedUntil, Const, ExactMatch, Implies, Next, Not, Or,
    PathFormula, Prob, StateFormula, Until, is_G1,
)

KEYWORDS = {"P", "X", "U", "F", "G", "true", "false", "EXACT"}

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<num>\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>=>|>=|<=|[<>=!&|()\[\]{},])
""", re.VERBOSE)


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col


def _tokenize(text: str) -> list[_Tok]:
    toks, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and chunk in KEYWORDS:
                kind = "kw"
            toks.append(_Tok(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        shown = tok.text if tok.kind != "eof" else "end of input"
        raise ParseError(f"{msg} (found {shown!r})", tok.line, tok.col)

    def expect(self, text: str) -> _Tok:
        tok = self.peek()
        if tok.text != text or tok.kind not in ("op", "kw"):
            self.error(f"expected {text!r}")
        return self.next()

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind in ("op", "kw") and tok.text == text

    def formula(self) -> StateFormula:
        left = self.disj()
        if self.at("=>"):
            self.next()
            return Implies(left, self.formula())
        return left

    def disj(self) -> StateFormula:
        out = self.conj()
        while self.at("|"):
            self.next()
            out = Or(out, self.conj())
        return out

    def conj(self) -> StateFormula:
        out = self.unary()
        while self.at("&"):
            self.next()
            out = And(out, self.unary())
        return out

    def unary(self) -> StateFormula:
        tok = self.peek()
        if self.at("!"):
            self.next()
            return Not(self.unary())
        if self.at("("):
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        if self.at("true"):
            self.next()
            return TRUE
        if self.at("false"):
            self.next()
            return FALSE
        if self.at("P"):
            return self.prob()
        if self.at("EXACT"):
            self.next()
            self.expect("{")
            names = [self.ident()]
            while self.at(","):
                self.next()
                names.append(self.ident())
            self.expect("}")
            return ExactMatch(tuple(names))
        if tok.kind == "ident":
            self.next()
            return Atom(tok.text)
        self.error("expected a state formula")

    def ident(self) -> str:
        tok = self.peek()
        if tok.kind != "ident":
            self.error("expected a proposition name")
        self.next()
        return tok.text

    def prob(self) -> StateFormula:
        self.expect("P")
        cmp_tok = self.peek()
        if cmp_tok.text not in (">=", ">", "<=", "<", "="):
            self.error("expected a comparison")
        self.next()
        num = self.peek()
        if num.kind != "num":
            self.error("expected a probability bound")
        self.next()
        try:
            bound = Fraction(num.text)
        except ZeroDivisionError:
            raise ParseError("zero denominator", num.line, num.col) from None
        if not 0 <= bound <= 1:
            raise ParseError(f"probability bound {num.text} outside [0,1]", num.line, num.col)
        self.expect("[")
        if self.at("G"):
            g_tok = self.next()
            if cmp_tok.text != "=" or bound != 1:
                raise ParseError("G is only supported as P=1 [ G f ]", g_tok.line, g_tok.col)
            body = self.formula()
            self.expect("]")
            return Prob("=", Fraction(0), Until(TRUE, Not(body)))
        path = self.path()
        self.expect("]")
        return Prob(cmp_tok.text, bound, path)

    def step_bound(self) -> int | None:
        if not self.at("<="):
            return None
        self.next()
        tok = self.peek()
        if tok.kind != "num" or not tok.text.isdigit():
            self.error("expected a step bound")
        self.next()
        return int(tok.text)

    def path(self) -> PathFormula:
        if self.at("X"):
            self.next()
            return Next(self.formula())
        if self.at("F"):
            self.next()
            k = self.step_bound()
            body = self.formula()
            return Until(TRUE, body) if k is None else BoundedUntil(TRUE, body, k)
        left = self.formula()
        self.expect("U")
        k = self.step_bound()
        right = self.formula()
        return Until(left, right) if k is None else BoundedUntil(left, right, k)


def parse_formula(text: str) -> StateFormula:
    p = _Parser(text)
    f = p.formula()
    if p.peek().kind != "eof":
        p.error("trailing input")
    return f


# printing -----------------------------------------------------------------

_PREC = {Implies: 1, Or: 2, And: 3}


def _prec(f: StateFormula) -> int:
    return _PREC.get(type(f), 4)


def print_formula(f: StateFormula) -> str:
    """Canonical text; ``parse_formula(print_formula(f)) == f``."""
    parts: list[str] = []
    _emit(f, parts)
    return "".join(parts)


def _wrap(f, parts, need):
    if need:
        parts.append("(")
        _emit(f, parts)
        parts.append(")")
    else:
        _emit(f, parts)


def _left_spine(f, kind) -> list:
    rights = []
    while type(f) is kind:
        rights.append(f.right)
        f = f.left
    rights.append(f)
    rights.reverse()
    return rights


def _emit(f: StateFormula, parts: list[str]) -> None:
    t = type(f)
    if t is And or t is Or:
        sep = " & " if t is And else " | "
        items = _left_spine(f, t)
        for n, g in enumerate(items):
            if n:
                parts.append(sep)
            # a right operand of the same operator must keep its brackets
            _wrap(g, parts, _prec(g) <= _prec(f))
    elif t is Implies:
        _wrap(f.left, parts, _prec(f.left) <= 1)
        parts.append(" => ")
        _wrap(f.right, parts, _prec(f.right) < 1)
    elif t is Not:
        parts.append("!")
        _wrap(f.sub, parts, _prec(f.sub) < 4)
    elif t is Atom:
        parts.append(f.name)
    elif t is Const:
        parts.append("true" if f.value else "false")
    elif t is ExactMatch:
        parts.append("EXACT{" + ",".join(f.props) + "}")
    elif t is Prob:
        _emit_prob(f, parts)
    else:
        raise TypeError(f"not a state formula: {f!r}")


def _emit_prob(f: Prob, parts: list[str]) -> None:
    if is_G1(f):
        parts.append("P=1 [ G ")
        _emit(f.path.right.sub, parts)
        parts.append(" ]")
        return
    parts.append(f"P{f.cmp}{format_rat(f.bound)} [ ")
    path = f.path
    if isinstance(path, Next):
        parts.append("X ")
        _emit(path.sub, parts)
    elif isinstance(path, (Until, BoundedUntil)):
        bound = "" if isinstance(path, Until) else f"<={path.k}"
        if path.left == TRUE:
            parts.append(f"F{bound} ")
            _emit(path.right, parts)
        else:
            _emit(path.left, parts)
            parts.append(f" U{bound} ")
            _emit(path.right, parts)
    else:
        raise TypeError(f"not a path formula: {path!r}")
    parts.append(" ]")
