"""ASCII surface syntax for formulas.

Grammar, loosest first::

    iff   := impl ('<->' impl)*          right-associative
    impl  := or ('->' impl)?             right-associative
    or    := and ('|' and)*              left-associative
    and   := unary ('&' unary)*          left-associative
    unary := ('box' | 'boxdot' | '[i]' | '[m]' | '~') unary | atom
    atom  := 'bot' | 'top' | identifier | '(' iff ')'
"""

from __future__ import annotations

import re

from .syntax import (
    BOT,
    TOP,
    And,
    Bot,
    Box,
    Formula,
    Impl,
    MixedTagsError,
    Or,
    Tag,
    Var,
    boxdot,
    component,
    iff,
    neg,
)


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


_TOKEN = re.compile(
    r"\s*(?:(?P<op><->|->|&|\||~|\(|\)|\[i\]|\[m\])|(?P<id>[A-Za-z][A-Za-z0-9_]*)|(?P<end>$))"
)
KEYWORDS = {"bot", "top", "box", "boxdot"}


def _tokens(src: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while True:
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos and m.group("end") is None:
            start = pos + len(src[pos:]) - len(src[pos:].lstrip())
            raise ParseError(f"unexpected character {src[start]!r}", len(src[:start].encode()))
        start = m.start(m.lastgroup)
        offset = len(src[:start].encode())
        if m.group("end") is not None:
            out.append(("end", "", offset))
            return out
        kind = "op" if m.group("op") else "id"
        text = m.group(kind)
        if kind == "id" and text in KEYWORDS:
            kind = "kw"
        out.append((kind, text, offset))
        pos = m.end()


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokens(src)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def take(self) -> tuple[str, str, int]:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> None:
        kind, t, off = self.take()
        if t != text or kind == "id":
            raise ParseError(f"expected {text!r}, found {t or 'end of input'!r}", off)

    def parse(self) -> Formula:
        a = self.iff()
        kind, t, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {t!r}", off)
        return a

    def iff(self) -> Formula:
        left = self.impl()
        if self.peek()[1] == "<->" and self.peek()[0] == "op":
            self.take()
            return iff(left, self.iff())
        return left

    def impl(self) -> Formula:
        left = self.disj()
        if self.peek()[1] == "->" and self.peek()[0] == "op":
            self.take()
            return Impl(left, self.impl())
        return left

    def disj(self) -> Formula:
        a = self.conj()
        while self.peek()[1] == "|" and self.peek()[0] == "op":
            self.take()
            a = Or(a, self.conj())
        return a

    def conj(self) -> Formula:
        a = self.unary()
        while self.peek()[1] == "&" and self.peek()[0] == "op":
            self.take()
            a = And(a, self.unary())
        return a

    def unary(self) -> Formula:
        kind, t, off = self.peek()
        if kind == "kw" and t == "box":
            self.take()
            return Box(self.unary(), Tag.PLAIN)
        if kind == "kw" and t == "boxdot":
            self.take()
            return boxdot(self.unary())
        if kind == "op" and t == "[i]":
            self.take()
            return Box(self.unary(), Tag.I)
        if kind == "op" and t == "[m]":
            self.take()
            return Box(self.unary(), Tag.M)
        if kind == "op" and t == "~":
            self.take()
            return neg(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        kind, t, off = self.take()
        if kind == "kw" and t == "bot":
            return BOT
        if kind == "kw" and t == "top":
            return TOP
        if kind == "id":
            return Var(t)
        if kind == "op" and t == "(":
            a = self.iff()
            self.expect(")")
            return a
        raise ParseError(f"unexpected {t or 'end of input'!r}", off)


def parse(src: str) -> Formula:
    a = _Parser(src).parse()
    try:
        component(a)
    except MixedTagsError as e:
        raise ParseError(str(e), 0) from None
    return a


# --- rendering -----------------------------------------------------------------

# binding strength: larger binds tighter
_PREC_IMPL, _PREC_OR, _PREC_AND, _PREC_UNARY = 1, 2, 3, 4
_BOX_WORD = {Tag.PLAIN: "box ", Tag.I: "[i] ", Tag.M: "[m] "}


def _prec(a: Formula) -> int:
    if isinstance(a, Impl) and a != TOP:
        return _PREC_IMPL
    if isinstance(a, Or):
        return _PREC_OR
    if isinstance(a, And):
        return _PREC_AND
    return _PREC_UNARY


def render(a: Formula) -> str:
    """Minimal-parenthesis text with ``parse(render(a)) == a``."""
    memo: dict[Formula, str] = {}

    def wrap(b: Formula, need: int) -> str:
        s = go(b)
        return f"({s})" if _prec(b) < need else s

    def go(b: Formula) -> str:
        if b in memo:
            return memo[b]
        if isinstance(b, Bot):
            s = "bot"
        elif b == TOP:
            s = "top"
        elif isinstance(b, Var):
            s = b.name
        elif isinstance(b, Box):
            s = _BOX_WORD[b.tag] + wrap(b.body, _PREC_UNARY)
        elif isinstance(b, Impl):
            s = f"{wrap(b.left, _PREC_IMPL + 1)} -> {wrap(b.right, _PREC_IMPL)}"
        elif isinstance(b, Or):
            s = f"{wrap(b.left, _PREC_OR)} | {wrap(b.right, _PREC_OR + 1)}"
        elif isinstance(b, And):
            s = f"{wrap(b.left, _PREC_AND)} & {wrap(b.right, _PREC_AND + 1)}"
        else:
            raise TypeError(f"not a formula: {b!r}")
        memo[b] = s
        return s

    return go(a)


def parse_corpus(text: str) -> list[Formula]:
    """One formula per line; blank lines and ``#`` comments are skipped."""
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(parse(line))
    return out
