"""Explicit fixed points of box-guarded formulas.

``diag`` splits a formula into a box-free skeleton with one slot per outermost
boxed subformula and recurses on the skeleton with slots set to ``top``.  The
recursion only depends on which slots are already filled with ``top``, so it is
memoized on that set of slots.
"""

from __future__ import annotations

from dataclasses import dataclass

from .kripke import ALL, FrameClass, countermodel
from .syntax import (
    TOP,
    Box,
    Formula,
    Var,
    boxdot,
    children,
    free_vars,
    iff,
    is_guarded,
    rebuild,
    require_unimodal,
    subst,
    subst_map,
)
from .verdict import Verdict


class FixpointError(ValueError):
    pass


@dataclass(frozen=True)
class Decomposition:
    skeleton: Formula
    placeholders: tuple[str, ...]
    boxed_parts: tuple[Formula, ...]

    def rebuild(self) -> Formula:
        return subst_map(self.skeleton, {x: Box(c) for x, c in zip(self.placeholders, self.boxed_parts)})


def _fresh_prefix(used: set[str]) -> str:
    prefix = "x"
    while any(v.startswith(prefix) and v[len(prefix):].isdigit() for v in used):
        prefix += "_"
    return prefix


def decompose(a: Formula, p: str) -> Decomposition:
    """Replace the outermost boxed subformulas, left to right, by fresh variables."""
    require_unimodal(a)
    prefix = _fresh_prefix(free_vars(a) | {p})
    names: list[str] = []
    parts: list[Formula] = []

    def go(c: Formula) -> Formula:
        if isinstance(c, Box):
            names.append(f"{prefix}{len(names) + 1}")
            parts.append(c.body)
            return Var(names[-1])
        kids = children(c)
        return rebuild(c, tuple(go(k) for k in kids)) if kids else c

    skeleton = go(a)
    return Decomposition(skeleton, tuple(names), tuple(parts))


def diag(a: Formula, p: str) -> Formula:
    """Fixed point of ``a`` in ``p``; free of ``p`` when ``p`` is guarded in ``a``."""
    dec = decompose(a, p)
    k = len(dec.boxed_parts)
    if k == 0:
        return a
    memo: dict[frozenset[int], Formula] = {}

    def solve(topped: frozenset[int]) -> Formula:
        # fixed point of the skeleton with the slots in ``topped`` set to top
        if topped in memo:
            return memo[topped]
        fill = {}
        for j, x in enumerate(dec.placeholders):
            if j in topped:
                fill[x] = TOP
            else:
                fill[x] = Box(subst(dec.boxed_parts[j], p, solve(topped | {j})))
        memo[topped] = r = subst_map(dec.skeleton, fill)
        return r

    return solve(frozenset())


def sl_fixpoint(a: Formula, p: str) -> Formula:
    """Fixed point valid over logics proving strong Löb: substitute ``top`` for ``p``."""
    require_unimodal(a)
    if not is_guarded(a, p):
        raise FixpointError(f"{p} is not guarded in {a}")
    return subst(a, p, TOP)


def fixpoint_equation(a: Formula, p: str, b: Formula) -> Formula:
    return iff(b, subst(a, p, b))


def uniqueness_formula(a: Formula, p: str, b1: Formula, b2: Formula) -> Formula:
    """Two solutions of the fixpoint equation, held everywhere above, coincide."""
    return boxdot(fixpoint_equation(a, p, b1)) >> (boxdot(fixpoint_equation(a, p, b2)) >> iff(b1, b2))


def replace_boxed(a: Formula, p: str, b: Formula) -> Formula:
    """Replace only the occurrences of ``p`` that lie under some box."""

    def go(c: Formula, under: bool) -> Formula:
        if isinstance(c, Var):
            return b if under and c.name == p else c
        kids = children(c)
        if not kids:
            return c
        return rebuild(c, tuple(go(k, under or isinstance(c, Box)) for k in kids))

    return go(a, False)


def verify_fixpoint(
    a: Formula, p: str, b: Formula, cls: FrameClass = ALL, max_n: int = 4, dedup: bool = False
) -> Verdict:
    """Model-check ``b <-> a[b/p]`` on every class frame with at most ``max_n`` worlds."""
    if p in free_vars(b):
        raise FixpointError(f"{p} occurs in the candidate fixed point")
    v = countermodel(fixpoint_equation(a, p, b), cls, max_n, dedup)
    if v.holds:
        return Verdict(True, "unrefuted", bound=max_n)
    return Verdict(False, "refuted", v.witness, bound=v.bound)
