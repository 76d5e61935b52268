"""Finite Heyting algebras given by operation tables.

Elements are the integers ``0..m-1``.  Algebras built from a poset use its
up-sets in canonical enumeration order and keep the up-set bitmasks as labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from itertools import product
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import order
from .order import Rows, bits
from .syntax import And, Bot, Box, Formula, Impl, Or, Var, free_vars, require_unimodal, subformulas


class AlgebraError(ValueError):
    pass


class PolynomialError(KeyError):
    pass


@dataclass(frozen=True, eq=False)
class HeytingAlgebra:
    le: np.ndarray
    meet: np.ndarray
    join: np.ndarray
    impl: np.ndarray
    bot: int
    top: int
    labels: tuple[int, ...] | None = None
    points: int | None = None

    @property
    def m(self) -> int:
        return len(self.le)

    def leq(self, a: int, b: int) -> bool:
        return bool(self.le[a, b])

    def element_name(self, a: int) -> str:
        if self.labels is None:
            return str(a)
        return "{" + ",".join(map(str, bits(self.labels[a]))) + "}"

    def index_of_label(self, label: int) -> int:
        if self.labels is None:
            raise AlgebraError("algebra has no labels")
        return self.labels.index(label)

    def check(self) -> None:
        """Validate lattice tables, residuation and distributivity."""
        m, le = self.m, self.le
        idx = np.arange(m)
        if not (le[idx, idx].all() and (le & le.T == np.eye(m, dtype=bool)).all()):
            raise AlgebraError("order is not antisymmetric and reflexive")
        for a, b in product(range(m), repeat=2):
            mt, jn = self.meet[a, b], self.join[a, b]
            lower = le[:, a] & le[:, b]
            upper = le[a] & le[b]
            if not (lower[mt] and (le[:, mt] == lower).all()):
                raise AlgebraError(f"meet table wrong at {a},{b}")
            if not (upper[jn] and (le[jn] == upper).all()):
                raise AlgebraError(f"join table wrong at {a},{b}")
            below = le[self.meet[:, a], b]
            if not (below[self.impl[a, b]] and (le[:, self.impl[a, b]] == below).all()):
                raise AlgebraError(f"implication table wrong at {a},{b}")
        lhs = self.meet[:, self.join]
        rhs = self.join[self.meet[:, :, None], self.meet[:, None, :]]
        if not (lhs == rhs).all():
            raise AlgebraError("lattice is not distributive")


def _tables_from_order(le: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = len(le)
    meet = np.zeros((m, m), int)
    join = np.zeros((m, m), int)
    for a, b in product(range(m), repeat=2):
        lower = np.flatnonzero(le[:, a] & le[:, b])
        upper = np.flatnonzero(le[a] & le[b])
        glb = [c for c in lower if le[lower, c].all()]
        lub = [c for c in upper if le[c, upper].all()]
        if not glb or not lub:
            raise AlgebraError(f"no meet or join for {a},{b}")
        meet[a, b], join[a, b] = glb[0], lub[0]
    return meet, join


def from_order(le: Sequence[Sequence[bool]]) -> HeytingAlgebra:
    """A finite distributive lattice given by its order matrix ``le[a][b] = a <= b``."""
    le = np.array(le, dtype=bool)
    m = len(le)
    if m == 0 or le.shape != (m, m):
        raise AlgebraError("order must be a non-empty square matrix")
    meet, join = _tables_from_order(le)
    impl = np.zeros((m, m), int)
    for a, b in product(range(m), repeat=2):
        cands = [j for j in range(m) if le[meet[j, a], b]]
        best = [j for j in cands if all(le[c, j] for c in cands)]
        if not best:
            raise AlgebraError(f"no relative pseudo-complement {a} -> {b}")
        impl[a, b] = best[0]
    bot = int(np.flatnonzero(le.all(axis=1))[0])
    top = int(np.flatnonzero(le.all(axis=0))[0])
    ha = HeytingAlgebra(le, meet, join, impl, bot, top)
    ha.check()
    return ha


def chain(k: int) -> HeytingAlgebra:
    """The ``k``-element chain ``0 < 1 < ... < k-1``."""
    idx = np.arange(k)
    return from_order(idx[:, None] <= idx[None, :])


TWO = chain(2)
THREE = chain(3)


def from_poset(rows: Sequence[int]) -> HeytingAlgebra:
    """Up-sets of a finite poset ordered by inclusion."""
    rows = tuple(rows)
    if not order.is_partial_order(rows):
        raise AlgebraError("not a partial order")
    n = len(rows)
    labels = np.array(order.upsets(rows), dtype=np.int64)
    m = len(labels)
    index = np.full(1 << n, -1, dtype=np.int64)
    index[labels] = np.arange(m)
    a, b = labels[:, None], labels[None, :]
    le = (a & ~b) == 0
    meet = index[a & b]
    join = index[a | b]
    ups = np.array(rows, dtype=np.int64)
    imp_mask = np.zeros((m, m), dtype=np.int64)
    bad = a & ~b
    for w in range(n):
        imp_mask |= ((ups[w] & bad) == 0).astype(np.int64) << w
    impl = index[imp_mask]
    return HeytingAlgebra(le, meet, join, impl, 0, m - 1, tuple(int(x) for x in labels), n)


def parse_poset_text(text: str) -> Rows:
    """``points N`` then ``le a b`` lines; the reflexive transitive closure is taken."""
    n = None
    pairs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        toks = line.split("#", 1)[0].split()
        if not toks:
            continue
        try:
            if toks[0] == "points" and len(toks) == 2:
                n = int(toks[1])
            elif toks[0] == "le" and len(toks) == 3:
                pairs.append((int(toks[1]), int(toks[2])))
            else:
                raise ValueError
        except ValueError:
            raise AlgebraError(f"line {lineno}: cannot read {line.strip()!r}") from None
    if n is None:
        raise AlgebraError("missing 'points N' line")
    if any(not (0 <= x < n and 0 <= y < n) for x, y in pairs):
        raise AlgebraError("point out of range")
    rows = order.reflexive_transitive_closure(n, pairs)
    if not order.is_partial_order(rows):
        raise AlgebraError("relation is not antisymmetric")
    return rows


# --- operators ---------------------------------------------------------------------


@dataclass(frozen=True)
class Operator:
    table: tuple[int, ...]

    def __call__(self, a: int) -> int:
        return self.table[a]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.table, dtype=int)


def coderivative(ha: HeytingAlgebra) -> Operator:
    """Meet over all ``i`` of ``i | (i -> h)``, for each ``h``."""
    idx = np.arange(ha.m)
    terms = ha.join[idx[:, None], ha.impl]
    acc = reduce(lambda x, row: ha.meet[x, row], terms, np.full(ha.m, ha.top))
    return Operator(tuple(int(x) for x in acc))


def cb_coderivative(rows: Sequence[int]) -> Operator:
    """Points whose strict up-set lies inside the argument, on ``from_poset(rows)``."""
    rows = tuple(rows)
    strict = order.strict_part(rows)
    labels = order.upsets(rows)
    index = {lab: k for k, lab in enumerate(labels)}
    out = []
    for lab in labels:
        out.append(index[order.mask_of(w for w in range(len(rows)) if strict[w] & ~lab == 0)])
    return Operator(tuple(out))


@dataclass(frozen=True)
class Density:
    dense: bool
    via_join: bool

    def __bool__(self) -> bool:
        return self.dense


def is_dense(ha: HeytingAlgebra, h: int, i: int) -> Density:
    """Whether ``h`` is ``i``-dense, and whether ``h = j | (j -> i)`` for some ``j``."""
    if not ha.le[i, h]:
        raise AlgebraError(f"{i} is not below {h}")
    js = np.arange(ha.m)
    dense = bool(((ha.meet[h] != i) | (js == i)).all())
    via_join = bool((ha.join[js, ha.impl[js, i]] == h).any())
    return Density(dense, via_join)


def dense_matrix(ha: HeytingAlgebra) -> np.ndarray:
    """``D[h, i]`` is true iff ``i <= h`` and ``h`` is ``i``-dense."""
    m = ha.m
    idx = np.arange(m)
    hit = ha.meet[:, :, None] == idx[None, None, :]
    ok = ~hit | (idx[None, :, None] == idx[None, None, :])
    return ok.all(axis=1) & ha.le.T


def coderivative_via_density(ha: HeytingAlgebra, i: int) -> int:
    dense = dense_matrix(ha)[:, i]
    return int(reduce(lambda x, h: ha.meet[x, h], np.flatnonzero(dense), ha.top))


def coderivative_via_density_table(ha: HeytingAlgebra) -> Operator:
    dense = dense_matrix(ha)
    out = []
    for i in range(ha.m):
        out.append(int(reduce(lambda x, h: ha.meet[x, h], np.flatnonzero(dense[:, i]), ha.top)))
    return Operator(tuple(out))


@dataclass(frozen=True)
class OperatorFlags:
    operator: bool
    k4: bool
    gl: bool
    r: bool
    mhc: bool
    km: bool

    def to_dict(self) -> dict[str, bool]:
        return dict(self.__dict__)


def classify_operator(ha: HeytingAlgebra, op: Operator) -> OperatorFlags:
    o = op.array
    le, meet, join, impl = ha.le, ha.meet, ha.join, ha.impl
    idx = np.arange(ha.m)
    preserves = o[ha.top] == ha.top and (o[meet] == meet[o[:, None], o[None, :]]).all()
    k4 = le[o, o[o]].all()
    gl = le[o[impl[o, idx]], o].all()
    r = le[idx, o].all()
    derv = le[o[None, :], join[idx[:, None], impl[idx[:, None], idx[None, :]]]].all()
    mhc = r and derv
    slob = (impl[impl[o, idx], idx] == ha.top).all()
    return OperatorFlags(bool(preserves), bool(k4), bool(gl), bool(r), bool(mhc), bool(mhc and slob))


def scattered(ha: HeytingAlgebra) -> bool:
    return classify_operator(ha, coderivative(ha)).km


# --- polynomials -------------------------------------------------------------------


def _resolve(ha: HeytingAlgebra, name: str, constants: Mapping[str, int] | None) -> int:
    if constants is not None and name in constants:
        c = constants[name]
    elif name in ("bot", "top"):
        c = ha.bot if name == "bot" else ha.top
    elif name.startswith("e") and name[1:].isdigit():
        c = int(name[1:])
    else:
        raise PolynomialError(f"unresolved constant {name!r}")
    if not 0 <= c < ha.m:
        raise PolynomialError(f"constant {name!r} names no element")
    return c


def poly_values(
    ha: HeytingAlgebra, op: Operator, t: Formula, p: str, constants: Mapping[str, int] | None = None
) -> np.ndarray:
    """``t`` evaluated at every element for ``p``; constants ``eK`` name element ``K``."""
    require_unimodal(t)
    o = op.array
    env = {v: np.full(ha.m, _resolve(ha, v, constants)) for v in free_vars(t) if v != p}
    env[p] = np.arange(ha.m)
    val: dict[Formula, np.ndarray] = {}
    for b in subformulas(t):
        if isinstance(b, Bot):
            r = np.full(ha.m, ha.bot)
        elif isinstance(b, Var):
            r = env[b.name]
        elif isinstance(b, And):
            r = ha.meet[val[b.left], val[b.right]]
        elif isinstance(b, Or):
            r = ha.join[val[b.left], val[b.right]]
        elif isinstance(b, Impl):
            r = ha.impl[val[b.left], val[b.right]]
        elif isinstance(b, Box):
            r = o[val[b.body]]
        val[b] = r
    return val[t]


def poly_grid(ha: HeytingAlgebra, op: Operator, t: Formula, p: str, params: Sequence[str]) -> np.ndarray:
    """``t`` at every assignment of elements to ``params`` and ``p``.

    The result has one axis per parameter, in order, followed by the axis for ``p``.
    """
    require_unimodal(t)
    k = len(params)
    shape = (ha.m,) * (k + 1)
    axes = {}
    for i, v in enumerate([*params, p]):
        axes[v] = np.arange(ha.m).reshape([-1 if j == i else 1 for j in range(k + 1)])
    o = op.array
    val: dict[Formula, np.ndarray] = {}
    for b in subformulas(t):
        if isinstance(b, Bot):
            r = np.full(shape, ha.bot)
        elif isinstance(b, Var):
            if b.name not in axes:
                raise PolynomialError(f"unresolved constant {b.name!r}")
            r = np.broadcast_to(axes[b.name], shape)
        elif isinstance(b, And):
            r = ha.meet[val[b.left], val[b.right]]
        elif isinstance(b, Or):
            r = ha.join[val[b.left], val[b.right]]
        elif isinstance(b, Impl):
            r = ha.impl[val[b.left], val[b.right]]
        elif isinstance(b, Box):
            r = o[val[b.body]]
        val[b] = r
    return val[t]


def fixpoint_counts(ha: HeytingAlgebra, op: Operator, t: Formula, p: str, params: Sequence[str]) -> np.ndarray:
    """Number of fixed points of ``t`` in ``p`` for every assignment of ``params``."""
    vals = poly_grid(ha, op, t, p, params)
    return (vals == np.arange(ha.m)).sum(axis=-1)


def poly_fixpoints(
    ha: HeytingAlgebra, op: Operator, t: Formula, p: str, constants: Mapping[str, int] | None = None
) -> set[int]:
    vals = poly_values(ha, op, t, p, constants)
    return {int(x) for x in np.flatnonzero(vals == np.arange(ha.m))}


# --- enumeration -------------------------------------------------------------------


def enumerate_algebras(max_m: int) -> list[HeytingAlgebra]:
    """Non-degenerate finite Heyting algebras with at most ``max_m`` elements, one per
    isomorphism type, as up-set algebras of posets, smaller posets first."""
    # adding a point never loses up-sets, so posets with too many are not extended
    out = []
    level: list[Rows] = [()]
    while level:
        seen: dict[tuple, Rows] = {}
        for rows in level:
            for new in order.extensions(rows):
                if len(order.upsets(new)) <= max_m:
                    seen.setdefault(order.canonical_form(new), new)
        level = [seen[k] for k in sorted(seen)]
        out += [from_poset(rows) for rows in level]
    return out


def enumerate_operators(ha: HeytingAlgebra) -> Iterator[Operator]:
    """All top- and meet-preserving maps, in lexicographic table order."""
    m = ha.m
    monotone_pairs = [(a, b) for a, b in product(range(m), repeat=2) if ha.le[a, b]]
    for table in product(range(m), repeat=m):
        if table[ha.top] != ha.top:
            continue
        if any(not ha.le[table[a], table[b]] for a, b in monotone_pairs):
            continue
        t = np.array(table)
        if (t[ha.meet] == ha.meet[t[:, None], t[None, :]]).all():
            yield Operator(table)


@dataclass(frozen=True)
class Polynomial:
    """A formula in ``p`` whose other variables name algebra elements."""

    term: Formula
    p: str = "p"
    constants: dict[str, int] = field(default_factory=dict)

    def fixpoints(self, ha: HeytingAlgebra, op: Operator) -> set[int]:
        return poly_fixpoints(ha, op, self.term, self.p, self.constants)
