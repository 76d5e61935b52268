"""Intuitionistic modal logics of well-founded structures: syntax, Kripke
semantics, explicit fixed points, bimodal companions, Heyting algebras with
operators and presheaf forcing."""

from .parser import ParseError, parse, parse_corpus, render
from .syntax import AXIOMS, BOT, LOGICS, TOP, And, Bot, Box, Formula, Impl, Or, Tag, Var, axiom, logic
from .verdict import ResourceLimitError, Verdict

__all__ = [
    "AXIOMS",
    "BOT",
    "LOGICS",
    "TOP",
    "And",
    "Bot",
    "Box",
    "Formula",
    "Impl",
    "Or",
    "ParseError",
    "ResourceLimitError",
    "Tag",
    "Var",
    "Verdict",
    "axiom",
    "logic",
    "parse",
    "parse_corpus",
    "render",
]
