"""Finite covariant presheaves on finite posets and Kripke–Joyal forcing.

A presheaf assigns a finite set to every point and a map ``act[w, z]`` to every
pair ``w ⊴ z``.  Elements are addressed by their index at a stage; the stored
element values are only used for display and file I/O.

Truncated chains number their stages ``1..n`` with stage 1 the top point
(no strict successors), so an iterate of length ``k`` settles stage ``k``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Hashable, Iterator, Mapping, Sequence, Union

from . import order
from .order import Rows, bits, mask_of
from .verdict import ResourceLimitError, Verdict


class PresheafError(ValueError):
    pass


class InternalTypeError(TypeError):
    pass


MAX_SUBFUNCTORS = 1 << 16


@dataclass(frozen=True)
class FinPoset:
    """Points ``0..n-1``; ``le[w]`` is the up-set of ``w``."""

    le: Rows
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not order.is_partial_order(self.le):
            raise PresheafError("not a partial order")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(w) for w in range(len(self.le))))
        if len(self.labels) != len(self.le):
            raise PresheafError("one label per point required")

    @classmethod
    def from_pairs(cls, n: int, pairs: Sequence[tuple[int, int]], labels: Sequence[str] = ()) -> FinPoset:
        return cls(order.reflexive_transitive_closure(n, pairs), tuple(labels))

    @property
    def n(self) -> int:
        return len(self.le)

    def up(self, w: int) -> int:
        return self.le[w]

    def strict_up(self, w: int) -> int:
        return self.le[w] & ~(1 << w)

    def leq(self, w: int, z: int) -> bool:
        return bool(self.le[w] >> z & 1)

    def linear_extension(self) -> list[int]:
        """Points with every point listed before those strictly above it."""
        return sorted(range(self.n), key=lambda w: (-bin(self.le[w]).count("1"), w))

    def is_chain(self) -> bool:
        return order.is_linear(self.le)

    def covers(self) -> list[tuple[int, int]]:
        out = []
        for w in range(self.n):
            for z in bits(self.strict_up(w)):
                if not any(self.strict_up(u) >> z & 1 for u in bits(self.strict_up(w))):
                    out.append((w, z))
        return out

    def stage_number(self, w: int) -> int:
        """Position counted from the top: points without strict successors are 1."""
        return bin(self.le[w]).count("1")


def truncated_chain(n: int) -> FinPoset:
    """Stages ``1..n`` at points ``0..n-1``; stage ``k`` lies below stage ``j`` iff ``k >= j``."""
    rows = tuple(mask_of(range(k + 1)) for k in range(n))
    return FinPoset(rows, tuple(str(k + 1) for k in range(n)))


POINT = FinPoset((1,))


def chain_poset(n: int) -> FinPoset:
    """Points ``0 < 1 < ... < n-1``."""
    return FinPoset(order.chain_rows(n))


@dataclass(frozen=True, eq=False)
class Presheaf:
    poset: FinPoset
    elements: tuple[tuple[Hashable, ...], ...]
    act: Mapping[tuple[int, int], tuple[int, ...]]
    name: str = "X"
    truth_values: bool = False

    def __post_init__(self) -> None:
        p = self.poset
        if len(self.elements) != p.n:
            raise PresheafError("one element set per point required")
        for w in range(p.n):
            for z in bits(p.up(w)):
                m = self.act.get((w, z))
                if m is None:
                    raise PresheafError(f"missing action {w}->{z}")
                if len(m) != len(self.elements[w]) or any(not 0 <= v < len(self.elements[z]) for v in m):
                    raise PresheafError(f"action {w}->{z} is not a map between the stage sets")
            if self.act[w, w] != tuple(range(len(self.elements[w]))):
                raise PresheafError(f"action {w}->{w} is not the identity")
        for w in range(p.n):
            for z in bits(p.up(w)):
                for u in bits(p.up(z)):
                    if tuple(self.act[z, u][v] for v in self.act[w, z]) != self.act[w, u]:
                        raise PresheafError(f"actions {w}->{z}->{u} do not compose")

    def size(self, w: int) -> int:
        return len(self.elements[w])

    def label(self, w: int, i: int) -> str:
        e = self.elements[w][i]
        if self.truth_values:
            return "{" + ",".join(self.poset.labels[z] for z in bits(e)) + "}"
        return str(e)

    def index(self, w: int, label: str) -> int:
        for i in range(self.size(w)):
            if self.label(w, i) == label:
                return i
        raise PresheafError(f"no element {label!r} at stage {self.poset.labels[w]}")

    @classmethod
    def from_generators(
        cls,
        poset: FinPoset,
        elements: Sequence[Sequence[Hashable]],
        maps: Mapping[tuple[int, int], Sequence[int]],
        name: str = "X",
    ) -> Presheaf:
        """Compose the given maps along covering pairs; maps given for other pairs must agree."""
        act: dict[tuple[int, int], tuple[int, ...]] = {}
        for w in range(poset.n):
            act[w, w] = tuple(range(len(elements[w])))
        covers = poset.covers()
        for w, z in covers:
            if (w, z) not in maps:
                raise PresheafError(f"missing map for covering pair {w}->{z}")
        for w in reversed(poset.linear_extension()):
            for z in bits(poset.strict_up(w)):
                via = next(u for u in bits(poset.strict_up(w)) if (w, u) in covers and poset.leq(u, z))
                first = tuple(maps[w, via])
                act[w, z] = first if via == z else tuple(act[via, z][v] for v in first)
        for key, m in maps.items():
            if key not in act or act[key] != tuple(m):
                raise PresheafError(f"map {key[0]}->{key[1]} disagrees with composed actions")
        return cls(poset, tuple(tuple(e) for e in elements), act, name)

    def global_elements(self) -> Iterator[tuple[int, ...]]:
        """All compatible choices of one element per stage."""
        p = self.poset
        ext = p.linear_extension()

        def rec(k: int, chosen: dict[int, int]) -> Iterator[tuple[int, ...]]:
            if k == len(ext):
                yield tuple(chosen[w] for w in range(p.n))
                return
            u = ext[k]
            forced = {self.act[w, u][chosen[w]] for w in chosen if p.leq(w, u)}
            if len(forced) > 1:
                return
            for v in forced or range(self.size(u)):
                chosen[u] = v
                yield from rec(k + 1, chosen)
                del chosen[u]

        yield from rec(0, {})


def enumerate_presheaves(poset: FinPoset, max_size: int, min_size: int = 0) -> Iterator[Presheaf]:
    """Every presheaf with stage sets ``0..k-1`` for ``min_size <= k <= max_size``, by
    choosing maps along covering pairs; combinations that do not compose are skipped."""
    covers = poset.covers()
    for sizes in product(range(min_size, max_size + 1), repeat=poset.n):
        elems = [tuple(range(k)) for k in sizes]
        choices = [list(product(range(sizes[z]), repeat=sizes[w])) for w, z in covers]
        for pick in product(*choices):
            try:
                yield Presheaf.from_generators(poset, elems, dict(zip(covers, pick)))
            except PresheafError:
                continue


def terminal(poset: FinPoset) -> Presheaf:
    return Presheaf(poset, tuple(("*",) for _ in range(poset.n)), {(w, z): (0,) for w in range(poset.n) for z in bits(poset.up(w))}, "1")


def constant(poset: FinPoset, elements: Sequence[Hashable], name: str = "K") -> Presheaf:
    ident = tuple(range(len(elements)))
    return Presheaf(poset, tuple(tuple(elements) for _ in range(poset.n)), {(w, z): ident for w in range(poset.n) for z in bits(poset.up(w))}, name)


def omega(poset: FinPoset) -> Presheaf:
    """Truth values: at ``w`` the up-sets inside the up-set of ``w``; actions intersect."""
    elems = []
    for w in range(poset.n):
        up = poset.up(w)
        elems.append(tuple(a for a in order.upsets(poset.le) if a & ~up == 0))
    act = {}
    for w in range(poset.n):
        for z in bits(poset.up(w)):
            idx = {a: i for i, a in enumerate(elems[z])}
            act[w, z] = tuple(idx[a & poset.up(z)] for a in elems[w])
    return Presheaf(poset, tuple(elems), act, "Omega", truth_values=True)


@dataclass(frozen=True, eq=False)
class NatTrans:
    source: Presheaf
    target: Presheaf
    comps: tuple[tuple[int, ...], ...]
    name: str = "f"

    def __post_init__(self) -> None:
        s, t = self.source, self.target
        if s.poset != t.poset:
            raise PresheafError("source and target live on different posets")
        p = s.poset
        for w in range(p.n):
            c = self.comps[w]
            if len(c) != s.size(w) or any(not 0 <= v < t.size(w) for v in c):
                raise PresheafError(f"component at {w} is not a map")
        for w in range(p.n):
            for z in bits(p.up(w)):
                for v in range(s.size(w)):
                    if self.comps[z][s.act[w, z][v]] != t.act[w, z][self.comps[w][v]]:
                        raise PresheafError(f"not natural at {w}->{z}")

    def __call__(self, w: int, v: int) -> int:
        return self.comps[w][v]

    @classmethod
    def from_function(
        cls, source: Presheaf, target: Presheaf, fn: Callable[[int, Hashable], Hashable], name: str = "f"
    ) -> NatTrans:
        """Components from a function on element values."""
        comps = []
        for w in range(source.poset.n):
            lookup = {e: i for i, e in enumerate(target.elements[w])}
            comps.append(tuple(lookup[fn(w, e)] for e in source.elements[w]))
        return cls(source, target, tuple(comps), name)


def identity_map(x: Presheaf) -> NatTrans:
    return NatTrans(x, x, tuple(tuple(range(x.size(w))) for w in range(x.poset.n)), "id")


def endomorphisms(x: Presheaf) -> Iterator[NatTrans]:
    """Every natural endomorphism, by backtracking over stages."""
    p = x.poset
    ext = list(reversed(p.linear_extension()))

    def rec(k: int, comps: dict[int, tuple[int, ...]]) -> Iterator[NatTrans]:
        if k == len(ext):
            yield NatTrans(x, x, tuple(comps[w] for w in range(p.n)))
            return
        w = ext[k]
        above = [z for z in bits(p.strict_up(w))]
        for c in product(range(x.size(w)), repeat=x.size(w)):
            if all(comps[z][x.act[w, z][v]] == x.act[w, z][c[v]] for z in above for v in range(x.size(w))):
                comps[w] = c
                yield from rec(k + 1, comps)
                del comps[w]

    yield from rec(0, {})


@dataclass(frozen=True, eq=False)
class Subobject:
    presheaf: Presheaf
    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        x = self.presheaf
        p = x.poset
        for w in range(p.n):
            for z in bits(p.up(w)):
                for v in bits(self.parts[w]):
                    if not self.parts[z] >> x.act[w, z][v] & 1:
                        raise PresheafError(f"subobject not closed under action {w}->{z}")

    def contains(self, w: int, v: int) -> bool:
        return bool(self.parts[w] >> v & 1)

    def is_global_element(self) -> bool:
        return all(bin(m).count("1") == 1 for m in self.parts)

    def labels(self) -> list[list[str]]:
        return [[self.presheaf.label(w, v) for v in bits(m)] for w, m in enumerate(self.parts)]


def subfunctors(x: Presheaf, w: int) -> list[tuple[int, ...]]:
    """Subfunctors of ``x`` restricted to the up-set of ``w``; entries outside it are 0."""
    p = x.poset
    pts = [u for u in p.linear_extension() if p.leq(w, u)]
    space = 1
    for u in pts:
        space <<= x.size(u)
    if space > MAX_SUBFUNCTORS:
        raise ResourceLimitError(f"{space} candidate subfunctors exceed the limit {MAX_SUBFUNCTORS}")
    out: list[tuple[int, ...]] = []
    parts = [0] * p.n

    def rec(k: int) -> None:
        if k == len(pts):
            out.append(tuple(parts))
            return
        u = pts[k]
        forced = 0
        for v in pts[:k]:
            if p.leq(v, u):
                forced |= mask_of(x.act[v, u][e] for e in bits(parts[v]))
        free = order.full_mask(x.size(u)) & ~forced
        sub = 0
        while True:
            parts[u] = forced | sub
            rec(k + 1)
            if sub == free:
                break
            sub = (sub - free) & free
        parts[u] = 0

    rec(0)
    return out


# --- internal language ---------------------------------------------------------------


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class App:
    fn: NatTrans
    arg: Term


Term = Union[TVar, App]


@dataclass(frozen=True)
class Truth:
    pass


@dataclass(frozen=True)
class Falsum:
    pass


@dataclass(frozen=True)
class Prop:
    """A truth constant given by an up-set of points."""

    upset: int


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Member:
    """``term`` lies in a subobject constant or in a bound subobject variable."""

    term: Term
    sub: Union[Subobject, str]


@dataclass(frozen=True)
class Holds:
    """An Omega-valued term is true at the current stage."""

    term: Term


@dataclass(frozen=True)
class Conj:
    left: InternalFormula
    right: InternalFormula


@dataclass(frozen=True)
class Disj:
    left: InternalFormula
    right: InternalFormula


@dataclass(frozen=True)
class Implies:
    left: InternalFormula
    right: InternalFormula


@dataclass(frozen=True)
class Forall:
    var: str
    over: Presheaf
    body: InternalFormula


@dataclass(frozen=True)
class Exists:
    var: str
    over: Presheaf
    body: InternalFormula


@dataclass(frozen=True)
class ForallSub:
    var: str
    over: Presheaf
    body: InternalFormula


@dataclass(frozen=True)
class Later:
    body: InternalFormula


InternalFormula = Union[Truth, Falsum, Prop, Eq, Member, Holds, Conj, Disj, Implies, Forall, Exists, ForallSub, Later]


def Not(a: InternalFormula) -> InternalFormula:
    return Implies(a, Falsum())


def internal_later(a: InternalFormula, poset: FinPoset, var: str = "_t") -> InternalFormula:
    """``forall t : Omega. t | (t => a)``."""
    t = Holds(TVar(var))
    return Forall(var, omega(poset), Disj(t, Implies(t, a)))


@dataclass(frozen=True)
class _Binding:
    over: Presheaf
    value: object
    is_sub: bool = False


Env = Mapping[str, _Binding]


def typecheck(a: InternalFormula, ctx: Mapping[str, tuple[Presheaf, bool]] | None = None) -> None:
    """Raise ``InternalTypeError`` on ill-typed terms, unbound or rebound variables."""
    ctx = dict(ctx or {})

    def term(t: Term) -> Presheaf:
        if isinstance(t, TVar):
            if t.name not in ctx or ctx[t.name][1]:
                raise InternalTypeError(f"{t.name} is not an element variable in scope")
            return ctx[t.name][0]
        src = term(t.arg)
        if src is not t.fn.source:
            raise InternalTypeError(f"{t.fn.name} applied to an element of {src.name}")
        return t.fn.target

    def go(b: InternalFormula) -> None:
        if isinstance(b, (Truth, Falsum, Prop)):
            return
        if isinstance(b, Eq):
            if term(b.left) is not term(b.right):
                raise InternalTypeError("equation between different presheaves")
        elif isinstance(b, Member):
            x = term(b.term)
            if isinstance(b.sub, str):
                if b.sub not in ctx or not ctx[b.sub][1] or ctx[b.sub][0] is not x:
                    raise InternalTypeError(f"{b.sub} is not a subobject variable of {x.name}")
            elif b.sub.presheaf is not x:
                raise InternalTypeError("membership in a subobject of another presheaf")
        elif isinstance(b, Holds):
            if not term(b.term).truth_values:
                raise InternalTypeError("only truth values can hold")
        elif isinstance(b, (Conj, Disj, Implies)):
            go(b.left)
            go(b.right)
        elif isinstance(b, (Forall, Exists, ForallSub)):
            if b.var in ctx:
                raise InternalTypeError(f"variable {b.var} bound twice")
            ctx[b.var] = (b.over, isinstance(b, ForallSub))
            go(b.body)
            del ctx[b.var]
        elif isinstance(b, Later):
            go(b.body)
        else:
            raise InternalTypeError(f"not an internal formula: {b!r}")

    go(a)


class _Forcing:
    def __init__(self, poset: FinPoset):
        self.poset = poset
        self.memo: dict = {}

    def value(self, w: int, env: Env, t: Term) -> tuple[Presheaf, int]:
        if isinstance(t, TVar):
            b = env[t.name]
            return b.over, b.value
        x, v = self.value(w, env, t.arg)
        return t.fn.target, t.fn.comps[w][v]

    @staticmethod
    def transport(env: Env, w: int, z: int) -> dict[str, _Binding]:
        if w == z:
            return dict(env)
        return {k: b if b.is_sub else _Binding(b.over, b.over.act[w, z][b.value]) for k, b in env.items()}

    def force(self, w: int, env: Env, a: InternalFormula) -> bool:
        key = (w, a, tuple(sorted((k, b.value) for k, b in env.items())))
        r = self.memo.get(key)
        if r is None:
            self.memo[key] = r = self._force(w, env, a)
        return r

    def _force(self, w: int, env: Env, a: InternalFormula) -> bool:
        p = self.poset
        if isinstance(a, Truth):
            return True
        if isinstance(a, Falsum):
            return False
        if isinstance(a, Prop):
            return bool(a.upset >> w & 1)
        if isinstance(a, Eq):
            return self.value(w, env, a.left)[1] == self.value(w, env, a.right)[1]
        if isinstance(a, Member):
            x, v = self.value(w, env, a.term)
            parts = env[a.sub].value if isinstance(a.sub, str) else a.sub.parts
            return bool(parts[w] >> v & 1)
        if isinstance(a, Holds):
            x, v = self.value(w, env, a.term)
            return bool(x.elements[w][v] >> w & 1)
        if isinstance(a, Conj):
            return self.force(w, env, a.left) and self.force(w, env, a.right)
        if isinstance(a, Disj):
            return self.force(w, env, a.left) or self.force(w, env, a.right)
        if isinstance(a, Implies):
            for z in bits(p.up(w)):
                e = self.transport(env, w, z)
                if self.force(z, e, a.left) and not self.force(z, e, a.right):
                    return False
            return True
        if isinstance(a, Forall):
            for z in bits(p.up(w)):
                e = self.transport(env, w, z)
                for v in range(a.over.size(z)):
                    e[a.var] = _Binding(a.over, v)
                    if not self.force(z, e, a.body):
                        return False
            return True
        if isinstance(a, Exists):
            e = dict(env)
            for v in range(a.over.size(w)):
                e[a.var] = _Binding(a.over, v)
                if self.force(w, e, a.body):
                    return True
            return False
        if isinstance(a, ForallSub):
            for z in bits(p.up(w)):
                e = self.transport(env, w, z)
                for s in subfunctors(a.over, z):
                    e[a.var] = _Binding(a.over, s, True)
                    if not self.force(z, e, a.body):
                        return False
            return True
        if isinstance(a, Later):
            return all(self.force(z, self.transport(env, w, z), a.body) for z in bits(p.strict_up(w)))
        raise InternalTypeError(f"not an internal formula: {a!r}")


def force(poset: FinPoset, w: int, env: Mapping[str, tuple[Presheaf, int]], a: InternalFormula) -> bool:
    """Forcing at stage ``w``; ``env`` binds free element variables to (presheaf, index)."""
    typecheck(a, {k: (x, False) for k, (x, _) in env.items()})
    for x, _ in env.values():
        if x.poset != poset:
            raise InternalTypeError("variable lives on another poset")
    return _Forcing(poset).force(w, {k: _Binding(x, v) for k, (x, v) in env.items()}, a)


def force_everywhere(poset: FinPoset, a: InternalFormula) -> bool:
    typecheck(a)
    f = _Forcing(poset)
    return all(f.force(w, {}, a) for w in range(poset.n))


def truth_set(poset: FinPoset, a: InternalFormula) -> int:
    typecheck(a)
    f = _Forcing(poset)
    return mask_of(w for w in range(poset.n) if f.force(w, {}, a))


# --- strong Löb --------------------------------------------------------------------


def _constant_formulas(poset: FinPoset, depth: int) -> list[InternalFormula]:
    layer: list[InternalFormula] = [Prop(u) for u in order.upsets(poset.le)]
    seen = {truth_set(poset, a): a for a in layer}
    frontier = list(seen.values())
    for _ in range(depth):
        new = []
        pool = list(seen.values())
        cands = [Later(a) for a in frontier]
        cands += [k(a, b) for a in frontier for b in pool for k in (Conj, Disj, Implies)]
        cands += [Implies(b, a) for a in frontier for b in pool]
        for c in cands:
            t = truth_set(poset, c)
            if t not in seen:
                seen[t] = c
                new.append(c)
        frontier = new
    return list(seen.values())


def strong_lob_sentence(poset: FinPoset, var: str = "p") -> InternalFormula:
    p = Holds(TVar(var))
    return Forall(var, omega(poset), Implies(Implies(Later(p), p), p))


def check_strong_lob(poset: FinPoset, sample_depth: int = 1) -> bool:
    """The quantified strong Löb sentence over Omega, and its instances at sampled
    constant formulas, forced at every stage."""
    if not force_everywhere(poset, strong_lob_sentence(poset)):
        return False
    for phi in _constant_formulas(poset, sample_depth):
        if not force_everywhere(poset, Implies(Implies(Later(phi), phi), phi)):
            return False
    return True


# --- endomorphisms -----------------------------------------------------------------


def fix_subobject(f: NatTrans) -> Subobject:
    x = f.source
    if f.target is not x:
        raise PresheafError("not an endomorphism")
    return Subobject(x, tuple(mask_of(v for v in range(x.size(w)) if f.comps[w][v] == v) for w in range(x.poset.n)))


def non_expansive_sentence(f: NatTrans) -> InternalFormula:
    x, y = TVar("x"), TVar("y")
    same = Eq(x, y)
    return Forall("x", f.source, Forall("y", f.source, Implies(Implies(Eq(App(f, x), App(f, y)), same), same)))


def contractive_sentence(f: NatTrans) -> InternalFormula:
    x, y = TVar("x"), TVar("y")
    return Forall("x", f.source, Forall("y", f.source, Implies(Later(Eq(x, y)), Eq(App(f, x), App(f, y)))))


def subterminal(x: Presheaf, sub: Union[Subobject, str]) -> InternalFormula:
    a, b = TVar("_x"), TVar("_y")
    return Forall("_x", x, Forall("_y", x, Implies(Conj(Member(a, sub), Member(b, sub)), Eq(a, b))))


def contained(x: Presheaf, s1: Union[Subobject, str], s2: Union[Subobject, str]) -> InternalFormula:
    a = TVar("_z")
    return Forall("_z", x, Implies(Member(a, s1), Member(a, s2)))


def maximal_subterminal(x: Presheaf, sub: Subobject, var: str = "alpha") -> InternalFormula:
    bigger = Implies(Conj(subterminal(x, var), contained(x, sub, var)), contained(x, var, sub))
    return Conj(subterminal(x, sub), ForallSub(var, x, bigger))


def check_non_expansive(f: NatTrans) -> bool:
    return force_everywhere(f.source.poset, non_expansive_sentence(f))


def check_contractive(f: NatTrans) -> bool:
    return force_everywhere(f.source.poset, contractive_sentence(f))


@dataclass(frozen=True)
class MaxSTReport:
    subterminal: bool
    maximal: bool
    witness: tuple[int, tuple[int, ...]] | None = None
    fixed: Subobject | None = field(default=None, compare=False)

    @property
    def holds(self) -> bool:
        return self.subterminal and self.maximal

    def to_dict(self) -> dict:
        out: dict = {"subterminal": self.subterminal, "maximal": self.maximal}
        if self.witness is not None and self.fixed is not None:
            w, parts = self.witness
            x = self.fixed.presheaf
            out["witness"] = {
                "stage": x.poset.labels[w],
                "subfunctor": {x.poset.labels[u]: [x.label(u, v) for v in bits(m)] for u, m in enumerate(parts) if x.poset.leq(w, u)},
            }
        return out


def check_maxst(f: NatTrans) -> MaxSTReport:
    """Force subterminality and maximality of the fixed-point subobject as closed
    sentences; on failure of maximality report a stage and subfunctor refuting it."""
    x = f.source
    fixed = fix_subobject(f)
    p = x.poset
    st = force_everywhere(p, subterminal(x, fixed))
    mx = force_everywhere(p, maximal_subterminal(x, fixed))
    witness = None
    if st and not mx:
        forcing = _Forcing(p)
        test_st = subterminal(x, "alpha")
        test_in = contained(x, fixed, "alpha")
        test_out = contained(x, "alpha", fixed)
        for z in range(p.n):
            for s in subfunctors(x, z):
                env = {"alpha": _Binding(x, s, True)}
                if forcing.force(z, env, test_st) and forcing.force(z, env, test_in) and not forcing.force(z, env, test_out):
                    witness = (z, s)
                    break
            if witness:
                break
    return MaxSTReport(st, mx, witness, fixed)


# --- chains: later functor and Banach iteration ---------------------------------------


def _successor(poset: FinPoset, w: int) -> int | None:
    above = [z for z in bits(poset.strict_up(w))]
    if not above:
        return None
    return min(above, key=lambda z: -bin(poset.le[z]).count("1"))


def _require_chain(poset: FinPoset) -> None:
    if not poset.is_chain():
        raise PresheafError("the underlying poset is not a chain")


def later_functor(x: Presheaf) -> Presheaf:
    """The shift: a singleton at the top stage, and at every other stage the set of
    the stage just above it."""
    p = x.poset
    _require_chain(p)
    src = [_successor(p, w) for w in range(p.n)]
    elems = tuple(("*",) if s is None else x.elements[s] for s in src)
    act = {}
    for w in range(p.n):
        for z in bits(p.up(w)):
            if src[z] is None:
                act[w, z] = (0,) * len(elems[w])
            else:
                act[w, z] = x.act[src[w], src[z]]
    return Presheaf(p, elems, act, f"later {x.name}")


def next_unit(x: Presheaf, later: Presheaf | None = None) -> NatTrans:
    """The restriction of each stage to the stage just above it."""
    p = x.poset
    later = later or later_functor(x)
    comps = []
    for w in range(p.n):
        s = _successor(p, w)
        comps.append((0,) * x.size(w) if s is None else x.act[w, s])
    return NatTrans(x, later, tuple(comps), "next")


class NotContractiveError(PresheafError):
    pass


@dataclass(frozen=True)
class GlobalElement:
    presheaf: Presheaf = field(compare=False)
    choice: tuple[int, ...]

    def labels(self) -> list[str]:
        return [self.presheaf.label(w, v) for w, v in enumerate(self.choice)]

    def to_dict(self) -> dict:
        return {self.presheaf.poset.labels[w]: lab for w, lab in enumerate(self.labels())}

    def dump(self) -> str:
        return "\n".join(f"element {self.presheaf.poset.labels[w]}: {lab}" for w, lab in enumerate(self.labels()))


def banach_fixpoint(x: Presheaf, f: NatTrans) -> GlobalElement:
    """The unique global fixed point of a contractive endomorphism on a chain."""
    p = x.poset
    _require_chain(p)
    if f.source is not x or f.target is not x:
        raise PresheafError("not an endomorphism of the given presheaf")
    if any(x.size(w) == 0 for w in range(p.n)):
        raise PresheafError("some stage is empty")
    if not check_contractive(f):
        raise NotContractiveError(f"{f.name} is not contractive")
    choice = []
    for w in range(p.n):
        k = p.stage_number(w)
        results = set()
        for x0 in range(x.size(w)):
            v = x0
            for _ in range(k):
                v = f.comps[w][v]
            results.add(v)
        if len(results) != 1:
            raise AssertionError(f"iterate at stage {p.labels[w]} depends on the start")
        choice.append(results.pop())
    c = tuple(choice)
    for w in range(p.n):
        for z in bits(p.up(w)):
            assert x.act[w, z][c[w]] == c[z], "iterates are not compatible"
        assert f.comps[w][c[w]] == c[w], "iterate is not fixed"
    fixed = [g for g in x.global_elements() if all(f.comps[w][g[w]] == g[w] for w in range(p.n))]
    assert fixed == [c], "global fixed point is not unique"
    return GlobalElement(x, c)


def stream_presheaf(n: int, alphabet: str = "01") -> Presheaf:
    """Words of length ``k`` at stage ``k`` of the truncated chain; actions keep prefixes."""
    p = truncated_chain(n)
    elems = tuple(tuple("".join(t) for t in product(alphabet, repeat=k + 1)) for k in range(n))
    act = {}
    for w in range(n):
        for z in bits(p.up(w)):
            idx = {s: i for i, s in enumerate(elems[z])}
            act[w, z] = tuple(idx[s[: z + 1]] for s in elems[w])
    return Presheaf(p, elems, act, "Stream")


def prepend(x: Presheaf, symbol: str) -> NatTrans:
    """``s -> symbol + s`` cut to the stage length, on a stream presheaf."""
    return NatTrans.from_function(x, x, lambda w, s: (symbol + s)[: len(s)], f"prepend-{symbol}")


# --- file format -------------------------------------------------------------------


@dataclass
class PresheafFile:
    presheaf: Presheaf
    endomorphism: NatTrans | None


def parse_presheaf_text(text: str, base_dir: str = ".") -> PresheafFile:
    """``poset FILE`` (or inline ``points``/``le`` lines), ``stage w: e1 e2 ...``,
    ``map w z: e->e' ...`` and optional ``nat: w: e->e' ...`` lines."""
    from .heyting import parse_poset_text

    poset_lines: list[str] = []
    stages: dict[int, list[str]] = {}
    maps: dict[tuple[int, int], dict[str, str]] = {}
    nat: dict[int, dict[str, str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            head, _, rest = line.partition(":")
            toks = head.split()
            if toks[0] == "poset" and not rest:
                with open(os.path.join(base_dir, toks[1])) as fh:
                    poset_lines.extend(fh.read().splitlines())
            elif toks[0] in ("points", "le") and not rest:
                poset_lines.append(line)
            elif toks[0] == "stage" and len(toks) == 2:
                stages[int(toks[1])] = rest.split()
            elif toks[0] == "map" and len(toks) == 3:
                maps[int(toks[1]), int(toks[2])] = _arrows(rest)
            elif toks == ["nat"]:
                w, _, arrows = rest.partition(":")
                nat[int(w)] = _arrows(arrows)
            else:
                raise ValueError
        except (ValueError, IndexError):
            raise PresheafError(f"line {lineno}: cannot read {raw.strip()!r}") from None
        except OSError as e:
            raise PresheafError(f"line {lineno}: {e}") from None
    try:
        poset = FinPoset(parse_poset_text("\n".join(poset_lines)))
    except ValueError as e:
        raise PresheafError(str(e)) from None
    if set(stages) != set(range(poset.n)):
        raise PresheafError("every point needs exactly one stage line")
    elems = [stages[w] for w in range(poset.n)]
    idx = [{e: i for i, e in enumerate(es)} for es in elems]

    def table(w: int, z: int, arrows: dict[str, str]) -> tuple[int, ...]:
        try:
            return tuple(idx[z][arrows[e]] for e in elems[w])
        except KeyError as e:
            raise PresheafError(f"map {w}->{z} misses or names an unknown element {e}") from None

    x = Presheaf.from_generators(poset, elems, {k: table(*k, v) for k, v in maps.items()})
    f = None
    if nat:
        if set(nat) != set(range(poset.n)):
            raise PresheafError("the endomorphism needs one nat line per point")
        f = NatTrans(x, x, tuple(table(w, w, nat[w]) for w in range(poset.n)))
    return PresheafFile(x, f)


def _arrows(text: str) -> dict[str, str]:
    out = {}
    for tok in text.split():
        a, sep, b = tok.partition("->")
        if not sep or not a or not b:
            raise ValueError(tok)
        out[a] = b
    return out


def check_maxst_verdict(f: NatTrans) -> Verdict:
    r = check_maxst(f)
    return Verdict(r.holds, "holds" if r.holds else "fails", r if not r.holds else None)
