"""Finite birelational frames (W, ⊴, ≺), forcing, frame conditions and search.

Relations are bitmask rows (see ``order``): ``leq[w]`` is the up-set of ``w``
and ``prec[w]`` is the set of ≺-successors of ``w``.  Frames are kept closed
under ``⊴;≺;⊴ = ≺``, so every truth set of a formula is an upset.

Exhaustive checks run through ``FrameBatch``, which evaluates a formula with
numpy over many frames and all of their valuations at once.  The scalar
``truth_set`` is the straightforward reference implementation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import order
from .order import Rows, bits, full_mask, mask_key, pairs_of
from .syntax import (
    And,
    Bot,
    Box,
    Formula,
    Impl,
    Or,
    Var,
    axiom_name,
    free_vars,
    require_unimodal,
    subformulas,
)
from .verdict import MAX_VARS, ResourceLimitError, Verdict, max_worlds


class FrameError(ValueError):
    """Malformed frame data (not a poset, closure violated, bad file)."""


class UnsupportedError(ValueError):
    """No frame condition or frame class is available for the requested name."""


class UnboundVariableError(KeyError):
    pass


# --- frames ----------------------------------------------------------------------


@dataclass(frozen=True)
class IntFrame:
    n: int
    leq: Rows
    prec: Rows

    def __post_init__(self) -> None:
        if len(self.leq) != self.n or len(self.prec) != self.n:
            raise FrameError("relation size does not match world count")
        full = full_mask(self.n)
        if any(r & ~full for r in self.leq + self.prec):
            raise FrameError("relation mentions a world out of range")
        if not order.is_partial_order(self.leq):
            raise FrameError("leq is not a partial order")
        if closure(self.leq, self.prec) != self.prec:
            raise FrameError("prec is not closed under leq;prec;leq")

    @classmethod
    def _trusted(cls, n: int, leq: Rows, prec: Rows) -> IntFrame:
        f = object.__new__(cls)
        object.__setattr__(f, "n", n)
        object.__setattr__(f, "leq", leq)
        object.__setattr__(f, "prec", prec)
        return f

    @classmethod
    def from_pairs(
        cls, n: int, leq: Iterable[tuple[int, int]] = (), prec: Iterable[tuple[int, int]] = ()
    ) -> IntFrame:
        """Closes ``leq`` reflexively and transitively, then normalizes ``prec``."""
        rows = order.reflexive_transitive_closure(n, leq)
        if not order.is_partial_order(rows):
            raise FrameError("leq edges generate a cycle")
        return normalize(rows, order.rows_from_pairs(n, prec))

    @property
    def full(self) -> int:
        return full_mask(self.n)

    @property
    def strict(self) -> Rows:
        return order.strict_part(self.leq)

    def leq_pairs(self) -> list[tuple[int, int]]:
        return pairs_of(self.leq)

    def prec_pairs(self) -> list[tuple[int, int]]:
        return pairs_of(self.prec)

    def upsets(self) -> list[int]:
        return order.upsets(self.leq)

    def __repr__(self) -> str:
        return f"IntFrame(n={self.n}, leq={pairs_of(self.strict)}, prec={self.prec_pairs()})"


def closure(leq: Sequence[int], prec: Sequence[int]) -> Rows:
    """``leq;prec;leq``, the least closed relation containing ``prec`` when ``leq`` is an order."""
    return order.compose(order.compose(leq, prec), leq)


def _as_rows(rel) -> Rows:
    """Bitmask rows (a sequence of ints) or a square boolean matrix."""
    rel = list(rel)
    if all(isinstance(r, (int, np.integer)) for r in rel):
        return tuple(int(r) for r in rel)
    if any(len(row) != len(rel) for row in rel):
        raise FrameError("relation matrix is not square")
    return tuple(order.mask_of(j for j, v in enumerate(row) if v) for row in rel)


def normalize(leq, prec_raw) -> IntFrame:
    """Frame with the least ``prec ⊇ prec_raw`` satisfying ``leq;prec;leq = prec``.

    Relations are bitmask rows or square boolean matrices; see
    ``IntFrame.from_pairs`` for edge lists.
    """
    leq_rows = _as_rows(leq)
    n = len(leq_rows)
    if any(r & ~full_mask(n) for r in leq_rows) or not order.is_partial_order(leq_rows):
        raise FrameError("leq is not a partial order")
    prec_rows = _as_rows(prec_raw)
    if len(prec_rows) != n or any(r & ~full_mask(n) for r in prec_rows):
        raise FrameError("prec does not match the worlds of leq")
    return IntFrame._trusted(n, leq_rows, closure(leq_rows, prec_rows))


def raw_conditions(leq: Sequence[int], prec: Sequence[int]) -> dict[str, bool]:
    """Diagnostics for unnormalized input: the weaker interaction conditions."""
    lp = order.compose(leq, prec)
    pl = order.compose(prec, leq)
    return {
        "upset_preserving": order.subset_rel(lp, pl),
        "left_closed": order.subset_rel(lp, prec),
        "closed": closure(leq, prec) == tuple(prec),
        "right_closed": pl == tuple(prec),
    }


I1 = IntFrame(1, (1,), (0,))
R1 = IntFrame(1, (1,), (1,))
C2 = IntFrame(2, (0b11, 0b10), (0b10, 0))
F3 = IntFrame(3, (0b111, 0b010, 0b100), (0b110, 0, 0))


def chain_frame(n: int, prec: str = "strict") -> IntFrame:
    """Chain ``0 ⊴ 1 ⊴ ...`` with ≺ the strict order, the order itself, or empty."""
    rows = order.chain_rows(n)
    p = {"strict": order.strict_part(rows), "leq": rows, "empty": (0,) * n}[prec]
    return IntFrame(n, rows, p)


# --- valuations and scalar forcing --------------------------------------------------

Valuation = Mapping[str, int]


def check_valuation(f: IntFrame, v: Valuation, a: Formula | None = None) -> None:
    if a is not None:
        missing = free_vars(a) - set(v)
        if missing:
            raise UnboundVariableError(f"unbound variables: {sorted(missing)}")
    for name, m in v.items():
        if m & ~f.full or not order.is_upset(f.leq, m):
            raise FrameError(f"valuation of {name} is not an upset: {sorted(bits(m))}")


def truth_set(f: IntFrame, v: Valuation, a: Formula) -> int:
    """Worlds forcing ``a``, as a bitmask."""
    require_unimodal(a)
    check_valuation(f, v, a)
    val: dict[Formula, int] = {}
    for b in subformulas(a):
        if isinstance(b, Bot):
            r = 0
        elif isinstance(b, Var):
            r = v[b.name]
        elif isinstance(b, And):
            r = val[b.left] & val[b.right]
        elif isinstance(b, Or):
            r = val[b.left] | val[b.right]
        elif isinstance(b, Impl):
            x, y = val[b.left], val[b.right]
            r = order.mask_of(w for w in range(f.n) if f.leq[w] & x & ~y == 0)
        else:
            x = val[b.body]
            r = order.mask_of(w for w in range(f.n) if f.prec[w] & ~x == 0)
        val[b] = r
    return val[a]


def forces(f: IntFrame, v: Valuation, w: int, a: Formula) -> bool:
    if not 0 <= w < f.n:
        raise FrameError(f"world {w} out of range")
    return bool(truth_set(f, v, a) >> w & 1)


def valuations(f: IntFrame, names: Iterable[str]) -> Iterator[dict[str, int]]:
    """All upset valuations of ``names`` (sorted), in enumeration order."""
    names = sorted(names)
    ups = f.upsets()
    for combo in product(ups, repeat=len(names)):
        yield dict(zip(names, combo))


# --- vectorized evaluation -------------------------------------------------------


def _dtype(n: int):
    for dt, width in ((np.uint8, 8), (np.uint16, 16), (np.uint32, 32), (np.uint64, 64)):
        if n <= width:
            return dt
    raise ResourceLimitError(f"{n} worlds exceed the 64-world bitset width")


def universal(rel: np.ndarray, s: np.ndarray, n: int, dtype) -> np.ndarray:
    """Bitmask of worlds ``w`` whose ``rel``-successors all lie in ``s``.

    ``rel`` has shape (F, n) (or (1, n)); ``s`` broadcasts against (F, V).
    """
    outside = ~s
    out = None
    for w in range(n):
        ok = (rel[:, w : w + 1] & outside) == 0
        term = ok.astype(dtype) << dtype(w)
        out = term if out is None else out | term
    return out


def evaluate(a: Formula, up: np.ndarray, succ: np.ndarray, env: Mapping[str, np.ndarray], n: int) -> np.ndarray:
    """Truth-set bitmasks of ``a`` for every frame row and valuation column."""
    dtype = _dtype(n)
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
            r = universal(up, ~val[b.left] | val[b.right], n, dtype)
        elif isinstance(b, Box):
            r = universal(succ, val[b.body], n, dtype)
        else:
            raise TypeError(f"not a formula: {b!r}")
        val[b] = r
    return val[a]


CHUNK_CELLS = 1 << 22


class FrameBatch:
    """Frames with a common world count, grouped by their ⊴ order."""

    def __init__(self, n: int, groups: Sequence[tuple[Rows, np.ndarray]]):
        self.n = n
        self.dtype = _dtype(max(n, 1))
        self.groups = [(leq, np.asarray(precs, dtype=self.dtype).reshape(-1, n)) for leq, precs in groups]
        self.groups = [(leq, p) for leq, p in self.groups if len(p)]
        self.offsets = np.cumsum([0] + [len(p) for _, p in self.groups])
        self._plans: dict[int, list] = {}

    def __len__(self) -> int:
        return int(self.offsets[-1])

    def frame(self, i: int) -> IntFrame:
        g = int(np.searchsorted(self.offsets, i, side="right")) - 1
        leq, precs = self.groups[g]
        row = precs[i - self.offsets[g]]
        return IntFrame._trusted(self.n, leq, tuple(int(x) for x in row))

    def frames(self) -> Iterator[IntFrame]:
        for leq, precs in self.groups:
            for row in precs:
                yield IntFrame._trusted(self.n, leq, tuple(int(x) for x in row))

    # chunks: lists of (group, start, stop); valuations per frame padded to a common width
    def _plan(self, k: int) -> list:
        if k in self._plans:
            return self._plans[k]
        chunks, cur, cur_rows, cur_width = [], [], 0, 1
        for g, (leq, precs) in enumerate(self.groups):
            width = len(order.upsets(leq)) ** k
            start = 0
            while start < len(precs):
                w = max(cur_width, width)
                room = max(1, CHUNK_CELLS // w - cur_rows)
                if cur and cur_rows + 1 > CHUNK_CELLS // w:
                    chunks.append(cur)
                    cur, cur_rows, cur_width = [], 0, 1
                    continue
                stop = min(len(precs), start + room)
                cur.append((g, start, stop))
                cur_rows += stop - start
                cur_width = w
                start = stop
        if cur:
            chunks.append(cur)
        self._plans[k] = chunks
        return chunks

    def _chunk_arrays(self, chunk, k: int):
        width = max(len(order.upsets(self.groups[g][0])) ** k for g, _, _ in chunk)
        ups, succs, envs = [], [], [[] for _ in range(k)]
        for g, start, stop in chunk:
            leq, precs = self.groups[g]
            rows = stop - start
            ups.append(np.broadcast_to(np.array(leq, dtype=self.dtype), (rows, self.n)))
            succs.append(precs[start:stop])
            us = np.array(order.upsets(leq), dtype=self.dtype)
            if k:
                grids = np.meshgrid(*([us] * k), indexing="ij")
                for j in range(k):
                    col = grids[j].reshape(-1)
                    if len(col) < width:
                        col = np.concatenate([col, np.full(width - len(col), col[0], self.dtype)])
                    envs[j].append(np.broadcast_to(col, (rows, width)))
        up = np.concatenate(ups)
        succ = np.concatenate(succs)
        env = [np.concatenate(e) for e in envs]
        return up, succ, env, width

    def _results(self, a: Formula) -> Iterator[tuple[list, np.ndarray, list[str]]]:
        require_unimodal(a)
        names = sorted(free_vars(a))
        if self.n > max_worlds() and len(names) > MAX_VARS:
            raise ResourceLimitError(
                f"refusing {len(names)} variables on {self.n}-world frames (limit {MAX_VARS})"
            )
        for chunk in self._plan(len(names)):
            up, succ, env, width = self._chunk_arrays(chunk, len(names))
            res = evaluate(a, up, succ, dict(zip(names, env)), self.n)
            res = np.broadcast_to(res, (len(succ), width))
            yield chunk, res, names

    def valid(self, a: Formula) -> np.ndarray:
        """Boolean array: is ``a`` valid on each frame."""
        full = full_mask(self.n)
        out = [(res == full).all(axis=1) for _, res, _ in self._results(a)]
        return np.concatenate(out) if out else np.zeros(0, bool)

    def first_failure(self, a: Formula) -> tuple[int, dict[str, int], int] | None:
        """(frame index, valuation, world) of the first refutation, in enumeration order."""
        full = full_mask(self.n)
        for chunk, res, names in self._results(a):
            bad = res != full
            rows = np.flatnonzero(bad.any(axis=1))
            if len(rows):
                r = int(rows[0])
                col = int(np.argmax(bad[r]))
                world = ((~int(res[r, col]) & full) & -(~int(res[r, col]) & full)).bit_length() - 1
                # locate the group of row r to decode the valuation index
                acc = 0
                for g, start, stop in chunk:
                    if r < acc + stop - start:
                        idx = int(self.offsets[g]) + start + (r - acc)
                        ups = order.upsets(self.groups[g][0])
                        break
                    acc += stop - start
                digits = []
                for _ in names:
                    digits.append(col % len(ups))
                    col //= len(ups)
                val = {nm: ups[d] for nm, d in zip(names, reversed(digits))}
                return idx, val, world
        return None


def single_batch(f: IntFrame) -> FrameBatch:
    return FrameBatch(f.n, [(f.leq, np.array([f.prec]))])


# --- frame validity ---------------------------------------------------------------


@dataclass(frozen=True)
class KripkeWitness:
    frame: IntFrame
    valuation: dict[str, int]
    world: int

    def to_dict(self) -> dict:
        return {
            "worlds": self.frame.n,
            "leq": [list(p) for p in pairs_of(self.frame.strict)],
            "prec": [list(p) for p in self.frame.prec_pairs()],
            "valuation": {k: list(bits(m)) for k, m in sorted(self.valuation.items())},
            "world": self.world,
        }

    def dump(self) -> str:
        lines = [dump_frame(self.frame)]
        for k, m in sorted(self.valuation.items()):
            lines.append(" ".join(["val", k, *map(str, bits(m))]))
        lines.append(f"world {self.world}")
        return "\n".join(lines)


def valid_on(f: IntFrame, a: Formula) -> Verdict:
    hit = single_batch(f).first_failure(a)
    if hit is None:
        return Verdict(True, "valid")
    _, val, world = hit
    return Verdict(False, "countermodel", KripkeWitness(f, val, world))


# --- frame conditions -------------------------------------------------------------


def is_noetherian(f: IntFrame) -> bool:
    """Every upset ``A ≠ W`` has a world in ``□A − A``."""
    for a in f.upsets():
        if a == f.full:
            continue
        boxed = order.mask_of(w for w in range(f.n) if f.prec[w] & ~a == 0)
        if boxed & ~a == 0:
            return False
    return True


def _transitive(f: IntFrame) -> bool:
    return order.subset_rel(order.compose(f.prec, f.prec), f.prec)


def _cond_nnv(f: IntFrame) -> bool:
    dead = order.mask_of(w for w in range(f.n) if f.prec[w] == 0)
    return all(f.leq[w] & dead for w in range(f.n))


_SCALAR = {
    "cl": lambda f: f.leq == order.identity(f.n),
    "trns": _transitive,
    "bind": lambda f: order.subset_rel(f.prec, order.compose(f.prec, f.prec)),
    "r": lambda f: order.subset_rel(f.prec, f.leq),
    "refl": lambda f: order.subset_rel(f.leq, f.prec),
    "next": lambda f: order.subset_rel(f.strict, f.prec),
    "ver": lambda f: all(p == 0 for p in f.prec),
    "nv": lambda f: all(p != 0 for p in f.prec),
    "nnv": _cond_nnv,
    "noetherian": is_noetherian,
    "km": lambda f: f.prec == f.strict,
    "up_linear": lambda f: all(order.is_chain(f.leq, f.leq[w]) for w in range(f.n)),
}

TABLE_CONDITIONS = ("cl", "trns", "bind", "r", "refl", "next", "ver", "nv", "nnv")


def frame_condition(f: IntFrame, name: str) -> bool:
    """The relational counterpart of an axiom, evaluated on the frame."""
    key = axiom_name(name)
    if key == "wlöb":
        return _transitive(f) and is_noetherian(f)
    if key == "boxbot":
        key = "ver"
    if key not in TABLE_CONDITIONS:
        raise UnsupportedError(f"no frame condition is available for ({key})")
    return bool(_SCALAR[key](f))


def _bcompose(p: np.ndarray, q: np.ndarray, n: int) -> np.ndarray:
    """Row-wise ``p;q`` for stacks of relations of shape (F, n)."""
    out = np.zeros_like(p)
    for y in range(n):
        has = (p >> p.dtype.type(y)) & 1
        out |= np.where(has.astype(bool), q[:, y : y + 1], 0).astype(p.dtype)
    return out


def batch_condition(name: str, leq: Rows, precs: np.ndarray) -> np.ndarray:
    """Vectorized frame condition over frames sharing the order ``leq``."""
    n = len(leq)
    P = precs
    F = len(P)
    L = np.array(leq, dtype=P.dtype).reshape(1, n)
    S = np.array(order.strict_part(leq), dtype=P.dtype).reshape(1, n)
    if name == "cl":
        return np.full(F, leq == order.identity(n))
    if name == "up_linear":
        return np.full(F, bool(_SCALAR["up_linear"](IntFrame._trusted(n, leq, (0,) * n))))
    if name == "trns":
        return ((_bcompose(P, P, n) & ~P) == 0).all(axis=1)
    if name == "bind":
        return ((P & ~_bcompose(P, P, n)) == 0).all(axis=1)
    if name == "r":
        return ((P & ~L) == 0).all(axis=1)
    if name == "refl":
        return ((L & ~P) == 0).all(axis=1)
    if name == "next":
        return ((S & ~P) == 0).all(axis=1)
    if name == "ver":
        return (P == 0).all(axis=1)
    if name == "nv":
        return (P != 0).all(axis=1)
    if name == "km":
        return (P == S).all(axis=1)
    if name == "nnv":
        dead = np.zeros(F, dtype=P.dtype)
        for w in range(n):
            dead |= ((P[:, w] == 0).astype(P.dtype) << P.dtype.type(w))
        return np.all([(dead & P.dtype.type(leq[w])) != 0 for w in range(n)], axis=0)
    if name == "noetherian":
        ok = np.ones(F, bool)
        full = full_mask(n)
        for a in order.upsets(leq):
            if a == full:
                continue
            boxed = universal(P, np.array([[a]], dtype=P.dtype), n, P.dtype.type)[:, 0]
            ok &= (boxed & P.dtype.type(full & ~a)) != 0
        return ok
    if name == "wlöb":
        return batch_condition("trns", leq, P) & batch_condition("noetherian", leq, P)
    raise UnsupportedError(f"no frame condition is available for ({name})")


# --- frame classes ----------------------------------------------------------------


@dataclass(frozen=True)
class FrameClass:
    name: str
    conditions: tuple[str, ...] = ()

    def __call__(self, f: IntFrame) -> bool:
        return all(_SCALAR[c](f) for c in self.conditions)

    def batch(self, leq: Rows, precs: np.ndarray) -> np.ndarray:
        ok = np.ones(len(precs), bool)
        for c in self.conditions:
            if not ok.any():
                break
            ok &= batch_condition(c, leq, precs)
        return ok

    def hint(self, leq: Rows) -> list[Rows] | None:
        """A superset of the class's ≺ relations on ``leq`` when it is tiny, else None."""
        n = len(leq)
        cs = set(self.conditions)
        if "km" in cs:
            return [order.strict_part(leq)]
        if "ver" in cs:
            return [(0,) * n]
        if {"refl", "r"} <= cs:
            return [tuple(leq)]
        return None


ALL = FrameClass("K^i")

_CLASSES = {
    "K^i": (),
    "IPC": (),
    "Cl": ("cl",),
    "LC": ("up_linear",),
    "K4^i": ("trns",),
    "C4^i": ("bind",),
    "R^i": ("r",),
    "T^i": ("refl",),
    "S4^i": ("refl", "trns"),
    "Triv^i": ("refl", "r"),
    "CB^i": ("next",),
    "mHC": ("r", "next"),
    "GL^i": ("trns", "noetherian"),
    "SL^i": ("trns", "noetherian", "r"),
    "CBL^i": ("next", "trns", "noetherian"),
    "KM": ("km",),
    "KM⊕LC": ("km", "up_linear"),
    "Ver^i": ("ver",),
    "NV^i": ("nv",),
    "NNV^i": ("nnv",),
    "GL^cl": ("cl", "trns", "noetherian"),
}


def frame_class(logic: str) -> FrameClass:
    from .syntax import logic_name

    key = logic_name(logic)
    if key not in _CLASSES:
        raise UnsupportedError(f"no frame class is available for {key}")
    return FrameClass(key, _CLASSES[key])


# --- enumeration ------------------------------------------------------------------


def _pair_order(leq: Rows) -> tuple[list[int], list[int]]:
    """Up/down masks on pairs (x, y) ↦ bit x*n+y, ordered so that upsets are the
    ≺ relations closed under ``leq;prec;leq``."""
    n = len(leq)
    down = order.converse(leq)
    up_p, down_p = [], []
    for x in range(n):
        for y in range(n):
            u = d = 0
            for x2 in bits(down[x]):
                for y2 in bits(leq[y]):
                    u |= 1 << (x2 * n + y2)
            for x2 in bits(leq[x]):
                for y2 in bits(down[y]):
                    d |= 1 << (x2 * n + y2)
            up_p.append(u)
            down_p.append(d)
    return up_p, down_p


def _pair_mask_to_rows(m: int, n: int) -> Rows:
    full = full_mask(n)
    return tuple((m >> (x * n)) & full for x in range(n))


def _rows_to_pair_mask(rows: Sequence[int]) -> int:
    n = len(rows)
    return sum(int(r) << (x * n) for x, r in enumerate(rows))


@lru_cache(maxsize=8192)
def prec_candidates(leq: Rows) -> np.ndarray:
    """All closed ≺ relations on ``leq`` as an (F, n) array, canonically ordered
    by size and then by the sorted list of pairs."""
    n = len(leq)
    up_p, down_p = _pair_order(leq)
    masks = order.upsets_recursive(up_p, down_p)
    masks.sort(key=mask_key)
    dt = _dtype(max(n, 1))
    arr = np.array([_pair_mask_to_rows(m, n) for m in masks], dtype=dt).reshape(-1, n)
    arr.setflags(write=False)
    return arr


def _class_precs(leq: Rows, cls: FrameClass) -> np.ndarray:
    n = len(leq)
    dt = _dtype(max(n, 1))
    hint = cls.hint(leq)
    if hint is not None:
        cands = [h for h in hint if closure(leq, h) == tuple(h)]
        cands.sort(key=lambda rows: mask_key(_rows_to_pair_mask(rows)))
        arr = np.array(cands, dtype=dt).reshape(-1, n)
    else:
        arr = prec_candidates(leq)
    if len(arr) == 0:
        return arr
    return arr[cls.batch(leq, arr)]


def _check_size(n: int) -> None:
    if n < 0:
        raise ValueError("negative world count")
    if n > max_worlds():
        raise ResourceLimitError(f"refusing to enumerate frames with {n} worlds (limit {max_worlds()})")


@lru_cache(maxsize=64)
def frame_batch(n: int, cls: FrameClass = ALL, dedup: bool = False) -> FrameBatch:
    """All frames of the class on ``n`` worlds, in enumeration order.

    With ``dedup`` only the first frame of each isomorphism class is kept;
    validity is invariant under isomorphism, and the first refuted frame in
    enumeration order is always such a representative.
    """
    _check_size(n)
    if dedup:
        return dedup_batch(frame_batch(n, cls))
    groups = [(leq, _class_precs(leq, cls)) for leq in order.enumerate_posets(n)]
    return FrameBatch(n, groups)


def enumerate_frames(n: int, cls: FrameClass = ALL) -> Iterator[IntFrame]:
    """Labeled posets in canonical order, each with its closed ≺ relations in
    canonical order, filtered by the class."""
    _check_size(n)
    return frame_batch(n, cls).frames()


def count_frames(n: int, cls: FrameClass = ALL) -> int:
    return len(frame_batch(n, cls))


def dedup_batch(batch: FrameBatch) -> FrameBatch:
    """One representative per isomorphism class (first in enumeration order)."""
    seen = set()
    groups = []
    for leq, precs in batch.groups:
        keep = []
        for row in precs:
            key = order.canonical_form(leq, [tuple(int(x) for x in row)])
            if key not in seen:
                seen.add(key)
                keep.append(row)
        groups.append((leq, np.array(keep, dtype=batch.dtype).reshape(-1, batch.n)))
    return FrameBatch(batch.n, groups)


def countermodel(a: Formula, cls: FrameClass = ALL, max_n: int = 3, dedup: bool = False) -> Verdict:
    """First refutation of ``a`` on class frames with 1..max_n worlds."""
    require_unimodal(a)
    if max_n > max_worlds() and len(free_vars(a)) > MAX_VARS:
        raise ResourceLimitError(f"refusing {len(free_vars(a))} variables beyond {max_worlds()} worlds")
    for n in range(1, max_n + 1):
        batch = frame_batch(n, cls, dedup)
        hit = batch.first_failure(a)
        if hit is not None:
            idx, val, world = hit
            return Verdict(False, "countermodel", KripkeWitness(batch.frame(idx), val, world), bound=n)
    return Verdict(True, "unrefuted", bound=max_n)


# --- file format ------------------------------------------------------------------


def parse_model_text(text: str) -> tuple[IntFrame, dict[str, int], int | None]:
    """Frame file (``worlds``, ``leq``, ``prec``) with optional ``val``/``world`` lines."""
    n = None
    leq, prec, val, world = [], [], {}, None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        try:
            kw, args = line[0], line[1:]
            if kw == "worlds" and len(args) == 1 and n is None:
                n = int(args[0])
            elif kw in ("leq", "prec") and len(args) == 2:
                (leq if kw == "leq" else prec).append((int(args[0]), int(args[1])))
            elif kw == "val" and args:
                val[args[0]] = order.mask_of(int(x) for x in args[1:])
            elif kw == "world" and len(args) == 1:
                world = int(args[0])
            else:
                raise ValueError(f"unrecognized line {raw.strip()!r}")
        except ValueError as e:
            raise FrameError(f"line {lineno}: {e}") from None
    if n is None:
        raise FrameError("missing 'worlds N' line")
    try:
        f = IntFrame.from_pairs(n, leq, prec)
    except ValueError as e:
        raise FrameError(str(e)) from None
    check_valuation(f, val)
    return f, val, world


def parse_frame_text(text: str) -> IntFrame:
    return parse_model_text(text)[0]


def dump_frame(f: IntFrame) -> str:
    lines = [f"worlds {f.n}"]
    lines += [f"leq {a} {b}" for a, b in pairs_of(f.strict)]
    lines += [f"prec {a} {b}" for a, b in f.prec_pairs()]
    return "\n".join(lines)
