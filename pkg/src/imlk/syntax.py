"""Formula AST, substitution, guardedness and the axiom/logic catalog."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator


class Tag(str, Enum):
    PLAIN = "plain"
    I = "i"
    M = "m"


class MixedTagsError(ValueError):
    """A formula mixes plain boxes with [i]/[m] boxes."""


class Formula:
    """Base class of immutable formula nodes; structural equality with a cached hash."""

    __slots__ = ()

    def _parts(self) -> tuple:
        raise NotImplementedError

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", hash((type(self).__name__, self._parts())))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other) or hash(self) != hash(other):
            return False
        return self._parts() == other._parts()  # type: ignore[attr-defined]

    def __ne__(self, other: object) -> bool:
        return not self == other

    # convenience operators
    def __rshift__(self, other: Formula) -> Formula:
        return Impl(self, other)

    def __and__(self, other: Formula) -> Formula:
        return And(self, other)

    def __or__(self, other: Formula) -> Formula:
        return Or(self, other)

    def __invert__(self) -> Formula:
        return neg(self)

    def __str__(self) -> str:
        from .parser import render

        return render(self)


@dataclass(frozen=True, eq=False, repr=False)
class Bot(Formula):
    def _parts(self) -> tuple:
        return ()

    def __repr__(self) -> str:
        return "Bot()"


@dataclass(frozen=True, eq=False, repr=False)
class Var(Formula):
    name: str

    def _parts(self) -> tuple:
        return (self.name,)

    def __repr__(self) -> str:
        return f"Var({self.name!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Impl(Formula):
    left: Formula
    right: Formula

    def _parts(self) -> tuple:
        return (self.left, self.right)

    def __repr__(self) -> str:
        return f"Impl({self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=False, repr=False)
class And(Formula):
    left: Formula
    right: Formula

    def _parts(self) -> tuple:
        return (self.left, self.right)

    def __repr__(self) -> str:
        return f"And({self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Or(Formula):
    left: Formula
    right: Formula

    def _parts(self) -> tuple:
        return (self.left, self.right)

    def __repr__(self) -> str:
        return f"Or({self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Box(Formula):
    body: Formula
    tag: Tag = Tag.PLAIN

    def __post_init__(self) -> None:
        object.__setattr__(self, "tag", Tag(self.tag))
        Formula.__post_init__(self)

    def _parts(self) -> tuple:
        return (self.tag, self.body)

    def __repr__(self) -> str:
        if self.tag is Tag.PLAIN:
            return f"Box({self.body!r})"
        return f"Box({self.body!r}, {self.tag.value!r})"


BOT = Bot()
TOP = Impl(BOT, BOT)


def box(a: Formula) -> Box:
    return Box(a, Tag.PLAIN)


def box_i(a: Formula) -> Box:
    return Box(a, Tag.I)


def box_m(a: Formula) -> Box:
    return Box(a, Tag.M)


def neg(a: Formula) -> Formula:
    return Impl(a, BOT)


def iff(a: Formula, b: Formula) -> Formula:
    return And(Impl(a, b), Impl(b, a))


def boxdot(a: Formula, tag: Tag = Tag.PLAIN) -> Formula:
    return And(a, Box(a, tag))


def dia_i(a: Formula) -> Formula:
    """Classical diamond for [i]: not [i] not A."""
    return neg(Box(neg(a), Tag.I))


def conj(parts: list[Formula]) -> Formula:
    if not parts:
        return TOP
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


# --- traversal -----------------------------------------------------------------


def children(a: Formula) -> tuple[Formula, ...]:
    if isinstance(a, (Impl, And, Or)):
        return (a.left, a.right)
    if isinstance(a, Box):
        return (a.body,)
    return ()


def subformulas(a: Formula) -> list[Formula]:
    """Distinct subformulas in post-order (children before parents)."""
    seen: set[Formula] = set()
    out: list[Formula] = []

    def walk(b: Formula) -> None:
        if b in seen:
            return
        for c in children(b):
            walk(c)
        seen.add(b)
        out.append(b)

    walk(a)
    return out


def free_vars(a: Formula) -> set[str]:
    return {b.name for b in subformulas(a) if isinstance(b, Var)}


def tags(a: Formula) -> set[Tag]:
    return {b.tag for b in subformulas(a) if isinstance(b, Box)}


def modal_depth(a: Formula) -> int:
    memo: dict[Formula, int] = {}
    for b in subformulas(a):
        if isinstance(b, Box):
            memo[b] = 1 + memo[b.body]
        else:
            memo[b] = max((memo[c] for c in children(b)), default=0)
    return memo[a]


def component(a: Formula) -> str:
    """'unimodal' (plain boxes only, or box-free) or 'bimodal' ([i]/[m] only)."""
    ts = tags(a)
    if Tag.PLAIN in ts and ts - {Tag.PLAIN}:
        raise MixedTagsError(f"formula mixes plain and [i]/[m] boxes: {a}")
    return "bimodal" if ts and Tag.PLAIN not in ts else "unimodal"


def require_unimodal(a: Formula) -> None:
    if component(a) != "unimodal":
        raise MixedTagsError(f"expected a unimodal formula, got [i]/[m] boxes: {a}")


def require_bimodal(a: Formula) -> None:
    if Tag.PLAIN in tags(a):
        component(a)
        raise MixedTagsError(f"expected a bimodal formula, got plain boxes: {a}")


@dataclass(frozen=True)
class Analysis:
    free_vars: frozenset[str]
    subformulas: tuple[Formula, ...]
    modal_depth: int
    component: str


def analyze(a: Formula) -> Analysis:
    comp = component(a)
    return Analysis(frozenset(free_vars(a)), tuple(subformulas(a)), modal_depth(a), comp)


def rebuild(a: Formula, kids: tuple[Formula, ...]) -> Formula:
    if isinstance(a, Impl):
        return Impl(*kids)
    if isinstance(a, And):
        return And(*kids)
    if isinstance(a, Or):
        return Or(*kids)
    if isinstance(a, Box):
        return Box(kids[0], a.tag)
    return a


def subst(a: Formula, p: str, b: Formula) -> Formula:
    """Replace every occurrence of ``Var(p)`` in ``a`` by ``b``."""
    target = Var(p)
    memo: dict[Formula, Formula] = {}

    def go(c: Formula) -> Formula:
        if c in memo:
            return memo[c]
        if c == target:
            r = b
        else:
            kids = children(c)
            r = rebuild(c, tuple(go(k) for k in kids)) if kids else c
        memo[c] = r
        return r

    return go(a)


def subst_map(a: Formula, mapping: dict[str, Formula]) -> Formula:
    """Simultaneous replacement of several variables."""
    memo: dict[Formula, Formula] = {}

    def go(c: Formula) -> Formula:
        if c in memo:
            return memo[c]
        if isinstance(c, Var):
            r = mapping.get(c.name, c)
        else:
            kids = children(c)
            r = rebuild(c, tuple(go(k) for k in kids)) if kids else c
        memo[c] = r
        return r

    return go(a)


def is_guarded(a: Formula, p: str) -> bool:
    """True iff every occurrence of ``p`` in ``a`` lies under some box."""

    def unguarded(c: Formula) -> bool:
        if isinstance(c, Var):
            return c.name == p
        if isinstance(c, Box):
            return False
        return any(unguarded(k) for k in children(c))

    return not unguarded(a)


def walk_preorder(a: Formula) -> Iterator[Formula]:
    yield a
    for c in children(a):
        yield from walk_preorder(c)


# --- catalog -------------------------------------------------------------------

_A, _B, _C = Var("A"), Var("B"), Var("C")
_P = Var("p")


def _bd(x: Formula) -> Formula:
    return boxdot(x)


def ufp_instance(context: Formula, p: str, b: Formula, c: Formula) -> Formula:
    """Uniqueness of fixed points for the context ``context`` in ``p``."""
    return Impl(
        _bd(iff(b, subst(context, p, b))),
        Impl(_bd(iff(c, subst(context, p, c))), iff(b, c)),
    )


# the uniqueness scheme needs a concrete context; this one is guarded and uses A
UFP_CONTEXT = Impl(box(_P), _A)

AXIOMS: dict[str, Formula] = {
    "cl": Impl(Impl(Impl(_B, _A), _B), _B),
    "em": Or(_A, neg(_A)),
    "nrm": Impl(box(Impl(_A, _B)), Impl(box(_A), box(_B))),
    "opr": iff(box(And(_A, _B)), And(box(_A), box(_B))),
    "trns": Impl(box(_A), box(box(_A))),
    "bind": Impl(box(box(_A)), box(_A)),
    "r": Impl(_A, box(_A)),
    "fmap": Impl(Impl(_A, _B), Impl(box(_A), box(_B))),
    "refl": Impl(box(_A), _A),
    "pll": Impl(Or(_A, box(box(_A))), box(_A)),
    "wlöb": Impl(box(Impl(box(_A), _A)), box(_A)),
    "henk": Impl(_bd(iff(_A, box(_A))), _A),
    "ufp": ufp_instance(UFP_CONTEXT, "p", _B, _C),
    "slöb": Impl(Impl(box(_A), _A), _A),
    "glb": Impl(Impl(box(_A), _A), box(_A)),
    "grz": Impl(box(Impl(box(Impl(_A, box(_A))), _A)), box(_A)),
    "sgrz": Impl(box(Impl(box(Impl(_A, box(_A))), _A)), _A),
    "next": Impl(box(_A), Impl(Impl(Impl(_B, _A), _B), _B)),
    "derv": Impl(box(_A), Or(Impl(_B, _A), _B)),
    "gd": Or(Impl(_A, _B), Impl(_B, _A)),
    "dot3": Or(box(Impl(_bd(_A), _B)), box(Impl(_bd(_B), _A))),
    "ver": box(_A),
    "boxbot": box(BOT),
    "nnv": neg(neg(box(BOT))),
    "nv": neg(box(BOT)),
}

AXIOM_ALIASES = {"wlob": "wlöb", "slob": "slöb", ".3": "dot3"}


class UnknownNameError(KeyError):
    pass


def axiom_name(name: str) -> str:
    key = AXIOM_ALIASES.get(name, name)
    if key not in AXIOMS:
        raise UnknownNameError(f"unknown axiom {name!r}")
    return key


def axiom(name: str) -> Formula:
    return AXIOMS[axiom_name(name)]


@dataclass(frozen=True)
class Logic:
    name: str
    base: str  # "IPC", "K^i" or "K^cl"
    axioms: tuple[str, ...]


def _logic(name: str, base: str, *ax: str) -> Logic:
    return Logic(name, base, ax)


LOGICS: dict[str, Logic] = {
    lg.name: lg
    for lg in [
        _logic("IPC", "IPC"),
        _logic("Cl", "IPC", "cl"),
        _logic("LC", "IPC", "gd"),
        _logic("K^i", "K^i"),
        _logic("K4^i", "K^i", "trns"),
        _logic("C4^i", "K^i", "bind"),
        _logic("R^i", "K^i", "r"),
        _logic("T^i", "K^i", "refl"),
        _logic("S4^i", "K^i", "refl", "trns"),
        _logic("Triv^i", "K^i", "refl", "r"),
        _logic("PLL^i", "K^i", "pll"),
        _logic("GL^i", "K^i", "wlöb"),
        _logic("SL^i", "K^i", "slöb"),
        _logic("CB^i", "K^i", "next"),
        _logic("mHC", "K^i", "r", "next"),
        _logic("KM", "K^i", "slöb", "next"),
        _logic("CBL^i", "K^i", "next", "wlöb"),
        _logic("KM⊕LC", "K^i", "slöb", "next", "gd"),
        _logic("Ver^i", "K^i", "ver"),
        _logic("NV^i", "K^i", "nv"),
        _logic("NNV^i", "K^i", "nnv"),
        _logic("GL^cl", "K^cl", "wlöb"),
    ]
}

LOGIC_ALIASES = {
    "ALL": "K^i",
    "all": "K^i",
    "Ki": "K^i",
    "K4i": "K4^i",
    "C4i": "C4^i",
    "Ri": "R^i",
    "Ti": "T^i",
    "S4i": "S4^i",
    "Trivi": "Triv^i",
    "PLLi": "PLL^i",
    "GLi": "GL^i",
    "SLi": "SL^i",
    "CBi": "CB^i",
    "CBLi": "CBL^i",
    "KM+LC": "KM⊕LC",
    "KMLC": "KM⊕LC",
    "Veri": "Ver^i",
    "NVi": "NV^i",
    "NNVi": "NNV^i",
    "GLcl": "GL^cl",
}


def logic_name(name: str) -> str:
    key = LOGIC_ALIASES.get(name, name)
    if key not in LOGICS:
        raise UnknownNameError(f"unknown logic {name!r}")
    return key


def logic(name: str) -> Logic:
    return LOGICS[logic_name(name)]
