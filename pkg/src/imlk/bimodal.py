"""Classical bimodal companions, the flat translation and decision procedures.

``decide_gl`` is a sequent-style search for classical GL: propositional rules
are applied exhaustively, and a sequent made of atoms and boxes is refuted by
one child world per boxed formula on the right, each child inheriting every
boxed formula on the left together with its body and assuming its own box.
An open search tree is turned into a finite transitive irreflexive tree model.

``decide_km_lc`` searches finite strict chains from the top down; a chain is
summarized by the set of box bodies true everywhere above the current world,
and the search stops once no new summary appears.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import order
from .kripke import IntFrame, KripkeWitness, _bcompose, _dtype, universal
from .order import Rows, bits, full_mask
from .parser import render
from .syntax import (
    BOT,
    And,
    Bot,
    Box,
    Formula,
    Impl,
    Or,
    Tag,
    Var,
    axiom,
    children,
    free_vars,
    iff,
    rebuild,
    require_bimodal,
    require_unimodal,
    subformulas,
)
from .verdict import MAX_VARS, ResourceLimitError, Verdict


@dataclass(frozen=True)
class BimodalFrame:
    n: int
    ri: Rows
    rm: Rows

    def ri_pairs(self) -> list[tuple[int, int]]:
        return order.pairs_of(self.ri)

    def rm_pairs(self) -> list[tuple[int, int]]:
        return order.pairs_of(self.rm)


def companion_frame(f: IntFrame) -> BimodalFrame:
    return BimodalFrame(f.n, f.leq, f.prec)


def is_s4_i(f: BimodalFrame) -> bool:
    reflexive = all(f.ri[x] >> x & 1 for x in range(f.n))
    return reflexive and order.subset_rel(order.compose(f.ri, f.ri), f.ri)


def satisfies_mix(f: BimodalFrame) -> bool:
    return order.compose(order.compose(f.ri, f.rm), f.ri) == tuple(f.rm)


# --- translations -----------------------------------------------------------------


def flat(a: Formula) -> Formula:
    """Boxes become [m] and every subformula is prefixed with [i]."""
    require_unimodal(a)

    @lru_cache(maxsize=None)
    def go(c: Formula) -> Formula:
        if isinstance(c, Box):
            return Box(Box(go(c.body), Tag.M), Tag.I)
        kids = children(c)
        return Box(rebuild(c, tuple(go(k) for k in kids)) if kids else c, Tag.I)

    return go(a)


def mix_to_gl(b: Formula) -> Formula:
    """Read [m] as the GL box and [i] as its reflexive version ``[m]X & X``."""
    require_bimodal(b)

    @lru_cache(maxsize=None)
    def go(c: Formula) -> Formula:
        if isinstance(c, Box):
            x = go(c.body)
            return And(Box(x), x) if c.tag is Tag.I else Box(x)
        kids = children(c)
        return rebuild(c, tuple(go(k) for k in kids)) if kids else c

    return go(b)


def to_gl(a: Formula) -> Formula:
    return mix_to_gl(flat(a))


MIX = iff(Box(Var("A"), Tag.M), Box(Box(Box(Var("A"), Tag.I), Tag.M), Tag.I))


def blok_esakia_formulas() -> list[Formula]:
    """[i]A <-> [m]A & A, and the Grzegorczyk axiom read with [m]."""
    a = Var("A")
    grz_m = _retag(axiom("grz"), Tag.M)
    return [iff(Box(a, Tag.I), And(Box(a, Tag.M), a)), grz_m]


def _retag(a: Formula, tag: Tag) -> Formula:
    if isinstance(a, Box):
        return Box(_retag(a.body, tag), tag)
    kids = children(a)
    return rebuild(a, tuple(_retag(k, tag) for k in kids)) if kids else a


# --- classical semantics ----------------------------------------------------------


def classical_truth(n: int, rels: Mapping[Tag, Sequence[int]], valuation: Mapping[str, int], a: Formula) -> int:
    """Truth set of ``a`` with arbitrary valuations; boxes use ``rels[tag]``."""
    full = full_mask(n)
    val: dict[Formula, int] = {}
    for b in subformulas(a):
        if isinstance(b, Bot):
            r = 0
        elif isinstance(b, Var):
            r = valuation[b.name] & full
        elif isinstance(b, And):
            r = val[b.left] & val[b.right]
        elif isinstance(b, Or):
            r = val[b.left] | val[b.right]
        elif isinstance(b, Impl):
            r = (~val[b.left] | val[b.right]) & full
        else:
            rel = rels[b.tag]
            x = val[b.body]
            r = order.mask_of(w for w in range(n) if rel[w] & ~x == 0)
        val[b] = r
    return val[a]


def _classical_batch(a: Formula, ri: np.ndarray, rm: np.ndarray, n: int) -> tuple[np.ndarray, list[str]]:
    names = sorted(free_vars(a))
    if len(names) > MAX_VARS and n > 4:
        raise ResourceLimitError(f"refusing {len(names)} variables with arbitrary valuations on {n} worlds")
    dtype = _dtype(max(n, 1))
    full = dtype(full_mask(n))
    subsets = np.arange(1 << n, dtype=dtype)
    grids = np.meshgrid(*([subsets] * len(names)), indexing="ij") if names else []
    env = {nm: g.reshape(1, -1) for nm, g in zip(names, grids)}
    val: dict[Formula, np.ndarray] = {}
    for b in subformulas(a):
        if isinstance(b, Bot):
            r = np.zeros((1, 1), dtype)
        elif isinstance(b, Var):
            r = env[b.name]
        elif isinstance(b, And):
            r = val[b.left] & val[b.right]
        elif isinstance(b, Or):
            r = val[b.left] | val[b.right]
        elif isinstance(b, Impl):
            r = (~val[b.left] | val[b.right]) & full
        else:
            rel = ri if b.tag is Tag.I else rm
            r = universal(rel, val[b.body], n, dtype)
        val[b] = r
    width = (1 << n) ** len(names)
    return np.broadcast_to(val[a], (len(ri), width)), names


def bimodal_valid_batch(n: int, ri: np.ndarray, rm: np.ndarray, a: Formula) -> np.ndarray:
    """Classical validity of a bimodal formula on each frame of a stack."""
    require_bimodal(a)
    res, _ = _classical_batch(a, ri, rm, n)
    return (res == full_mask(n)).all(axis=1)


@dataclass(frozen=True)
class BimodalWitness:
    frame: BimodalFrame
    valuation: dict[str, int]
    world: int

    def to_dict(self) -> dict:
        return {
            "worlds": self.frame.n,
            "ri": [list(p) for p in self.frame.ri_pairs()],
            "rm": [list(p) for p in self.frame.rm_pairs()],
            "valuation": {k: list(bits(m)) for k, m in sorted(self.valuation.items())},
            "world": self.world,
        }


def valid_on_bimodal(f: BimodalFrame, a: Formula) -> Verdict:
    require_bimodal(a)
    dtype = _dtype(max(f.n, 1))
    ri = np.array([f.ri], dtype=dtype)
    rm = np.array([f.rm], dtype=dtype)
    res, names = _classical_batch(a, ri, rm, f.n)
    full = full_mask(f.n)
    bad = np.flatnonzero(res[0] != full)
    if not len(bad):
        return Verdict(True, "valid")
    col = int(bad[0])
    miss = ~int(res[0, col]) & full
    world = (miss & -miss).bit_length() - 1
    digits = []
    for _ in names:
        digits.append(col % (1 << f.n))
        col >>= f.n
    val = dict(zip(names, reversed(digits)))
    return Verdict(False, "countermodel", BimodalWitness(f, val, world))


# --- first-order correspondent of (next) ---------------------------------------------


def fo_next_check(f: BimodalFrame) -> bool:
    """For all x, y, z, w: x Ri y and x Ri z imply z Ri y, or z Ri w implies x Rm w."""
    n, ri, rm = f.n, f.ri, f.rm
    for x in range(n):
        for y in range(n):
            for z in range(n):
                for w in range(n):
                    if ri[x] >> y & 1 and ri[x] >> z & 1:
                        if not (ri[z] >> y & 1 or not ri[z] >> w & 1 or rm[x] >> w & 1):
                            return False
    return True


def fo_next_batch(ri: Rows, rm: np.ndarray) -> np.ndarray:
    """``fo_next_check`` for a stack of Rm relations over one fixed Ri."""
    n = len(ri)
    ok = np.ones(len(rm), bool)
    for x in range(n):
        for y in bits(ri[x]):
            for z in bits(ri[x]):
                if not ri[z] >> y & 1:
                    need = rm.dtype.type(ri[z])
                    ok &= (rm[:, x] & need) == need
    return ok


def proper_strict(ri: Rows) -> Rows:
    """Pairs of ``ri`` whose converse is not in ``ri``; for a preorder, the strict order
    between clusters."""
    n = len(ri)
    return tuple(ri[x] & ~order.mask_of(y for y in range(n) if ri[y] >> x & 1) for x in range(n))


def strict_inclusion(f: BimodalFrame) -> bool:
    """The strict part of Ri is contained in Rm."""
    return order.subset_rel(proper_strict(f.ri), f.rm)


def preorders(n: int) -> Iterator[Rows]:
    """Every reflexive transitive relation on ``n`` points."""
    cells = [(x, y) for x in range(n) for y in range(n) if x != y]
    for choice in product((0, 1), repeat=len(cells)):
        rows = [1 << x for x in range(n)]
        for (x, y), b in zip(cells, choice):
            if b:
                rows[x] |= 1 << y
        rows_t = tuple(rows)
        if order.subset_rel(order.compose(rows_t, rows_t), rows_t):
            yield rows_t


def mix_frames(n: int) -> Iterator[tuple[Rows, np.ndarray]]:
    """Bimodal frames with Ri a preorder and ``Rm = Ri;Rm;Ri``, grouped by Ri.

    Each group is ``(ri, rms)`` with one Rm per row of ``rms``.
    """
    dtype = _dtype(max(n, 1))
    every = np.array(list(product(range(1 << n), repeat=n)), dtype=dtype).reshape(-1, n)
    for ri in preorders(n):
        r = np.broadcast_to(np.array(ri, dtype=dtype), every.shape)
        closed = (_bcompose(_bcompose(r, every, n), r, n) == every).all(axis=1)
        yield ri, every[closed]


# --- classical GL ------------------------------------------------------------------


@dataclass(frozen=True)
class GLModel:
    """Finite transitive irreflexive model; world 0 is the root."""

    n: int
    rm: Rows
    valuation: dict[str, int]

    def truth(self, a: Formula) -> int:
        names = free_vars(a)
        val = {k: self.valuation.get(k, 0) for k in names}
        return classical_truth(self.n, {Tag.PLAIN: self.rm, Tag.M: self.rm}, val, a)

    def to_kripke(self) -> KripkeWitness:
        """The intuitionistic frame with ⊴ the reflexive closure and ≺ = Rm."""
        leq = tuple(r | (1 << w) for w, r in enumerate(self.rm))
        f = IntFrame(self.n, leq, self.rm)
        val = {}
        for k, m in self.valuation.items():
            val[k] = order.mask_of(w for w in range(self.n) if leq[w] & ~m == 0)
        return KripkeWitness(f, val, 0)

    def to_dict(self) -> dict:
        return {
            "worlds": self.n,
            "rm": [list(p) for p in order.pairs_of(self.rm)],
            "valuation": {k: list(bits(m)) for k, m in sorted(self.valuation.items())},
            "root": 0,
        }

    def dump(self) -> str:
        lines = [f"worlds {self.n}"]
        lines += [f"rm {a} {b}" for a, b in order.pairs_of(self.rm)]
        for k, m in sorted(self.valuation.items()):
            lines.append(" ".join(["val", k, *map(str, bits(m))]))
        lines.append("world 0")
        return "\n".join(lines)


@dataclass(frozen=True)
class _Node:
    atoms: frozenset[str]
    kids: tuple[_Node, ...]


def _sort_key(a: Formula) -> str:
    return render(a)


GL_BUDGET = 2_000_000


class _GLSearch:
    def __init__(self, budget: int = GL_BUDGET) -> None:
        self.budget = budget
        self.memo: dict[tuple[frozenset, frozenset], _Node | None] = {}
        self.keys: dict[Formula, str] = {}

    def key(self, a: Formula) -> str:
        k = self.keys.get(a)
        if k is None:
            k = self.keys[a] = _sort_key(a)
        return k

    def refute(self, left: frozenset, right: frozenset) -> _Node | None:
        """A tree model making all of ``left`` true and all of ``right`` false at the root."""
        memo_key = (left, right)
        if memo_key in self.memo:
            return self.memo[memo_key]
        if len(self.memo) >= self.budget:
            raise ResourceLimitError(f"GL search exceeded {self.budget} sequents")
        self.memo[memo_key] = r = self._refute(left, right)
        return r

    def _refute(self, left: frozenset, right: frozenset) -> _Node | None:
        if BOT in left or left & right:
            return None
        for f in sorted(left, key=self.key):
            if isinstance(f, (And, Or, Impl)):
                rest = left - {f}
                if isinstance(f, And):
                    return self.refute(rest | {f.left, f.right}, right)
                if isinstance(f, Or):
                    return self.refute(rest | {f.left}, right) or self.refute(rest | {f.right}, right)
                return self.refute(rest, right | {f.left}) or self.refute(rest | {f.right}, right)
        for f in sorted(right, key=self.key):
            if isinstance(f, (And, Or, Impl)):
                rest = right - {f}
                if isinstance(f, And):
                    return self.refute(left, rest | {f.left}) or self.refute(left, rest | {f.right})
                if isinstance(f, Or):
                    return self.refute(left, rest | {f.left, f.right})
                return self.refute(left | {f.left}, rest | {f.right})
        boxed = [f for f in left if isinstance(f, Box)]
        inherited = frozenset(boxed) | frozenset(f.body for f in boxed)
        kids = []
        for f in sorted((g for g in right if isinstance(g, Box)), key=self.key):
            child = self.refute(inherited | {f}, frozenset({f.body}))
            if child is None:
                return None
            kids.append(child)
        atoms = frozenset(f.name for f in left if isinstance(f, Var))
        return _Node(atoms, tuple(kids))


def _tree_model(root: _Node, names: Sequence[str]) -> GLModel:
    nodes: list[_Node] = []
    desc: list[int] = []

    def walk(node: _Node) -> int:
        idx = len(nodes)
        nodes.append(node)
        desc.append(0)
        below = 0
        for k in node.kids:
            j = walk(k)
            below |= (1 << j) | desc[j]
        desc[idx] = below
        return idx

    walk(root)
    val = {nm: order.mask_of(i for i, nd in enumerate(nodes) if nm in nd.atoms) for nm in names}
    return GLModel(len(nodes), tuple(desc), val)


def decide_gl(a: Formula, budget: int = GL_BUDGET) -> Verdict:
    """Exact decision of classical GL; a non-theorem comes with a tree countermodel."""
    require_unimodal(a)
    node = _GLSearch(budget).refute(frozenset(), frozenset({a}))
    if node is None:
        return Verdict(True, "theorem")
    return Verdict(False, "non-theorem", _tree_model(node, sorted(free_vars(a))))


def decide_km(a: Formula) -> Verdict:
    """KM-theoremhood through the GL reading of the flat translation.

    A countermodel is reported as an intuitionistic KM frame."""
    v = decide_gl(to_gl(a))
    if v.holds:
        return v
    return Verdict(False, "non-theorem", v.witness.to_kripke())


def _decide_chain(g: Formula) -> GLModel | None:
    """Refute a classical formula on a finite strict chain, or return None."""
    subs = subformulas(g)
    names = sorted(free_vars(g))
    bodies = frozenset(b.body for b in subs if isinstance(b, Box))
    parent: dict[frozenset, tuple[frozenset, tuple[bool, ...]] | None] = {bodies: None}
    queue = [bodies]
    while queue:
        state = queue.pop(0)
        for assignment in product((False, True), repeat=len(names)):
            env = dict(zip(names, assignment))
            truth: dict[Formula, bool] = {}
            for b in subs:
                if isinstance(b, Bot):
                    t = False
                elif isinstance(b, Var):
                    t = env[b.name]
                elif isinstance(b, And):
                    t = truth[b.left] and truth[b.right]
                elif isinstance(b, Or):
                    t = truth[b.left] or truth[b.right]
                elif isinstance(b, Impl):
                    t = not truth[b.left] or truth[b.right]
                else:
                    t = b.body in state
                truth[b] = t
            if not truth[g]:
                chain = [assignment]
                s = state
                while parent[s] is not None:
                    s, asg = parent[s]
                    chain.append(asg)
                n = len(chain)
                rm = tuple(full_mask(n) & ~full_mask(i + 1) for i in range(n))
                val = {nm: order.mask_of(i for i, asg in enumerate(chain) if asg[j]) for j, nm in enumerate(names)}
                return GLModel(n, rm, val)
            nxt = frozenset(b for b in state if truth[b])
            if nxt not in parent:
                parent[nxt] = (state, assignment)
                queue.append(nxt)
    return None


def decide_gl3(a: Formula) -> Verdict:
    """Classical GL over finite strict linear orders."""
    require_unimodal(a)
    m = _decide_chain(a)
    if m is None:
        return Verdict(True, "theorem")
    return Verdict(False, "non-theorem", m)


def decide_km_lc(a: Formula) -> Verdict:
    v = decide_gl3(to_gl(a))
    if v.holds:
        return v
    return Verdict(False, "non-theorem", v.witness.to_kripke())
