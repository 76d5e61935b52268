"""Finite partial orders as bitmask rows, with upset and poset enumeration.

A relation on worlds ``0..n-1`` is stored as a tuple ``rows`` where bit ``y``
of ``rows[x]`` is set iff ``x R y``.  For an order this means ``rows[x]`` is the
principal up-set of ``x``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Iterator, Sequence

Rows = tuple[int, ...]


def bits(mask: int) -> Iterator[int]:
    """Indices of the set bits of ``mask``, ascending."""
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def full_mask(n: int) -> int:
    return (1 << n) - 1


def mask_key(mask: int) -> tuple[int, tuple[int, ...]]:
    """Canonical sort key: by size, then by the sorted member list."""
    return (mask.bit_count(), tuple(bits(mask)))


def rows_from_pairs(n: int, pairs: Iterable[tuple[int, int]]) -> Rows:
    rows = [0] * n
    for a, b in pairs:
        if not (0 <= a < n and 0 <= b < n):
            raise ValueError(f"pair ({a}, {b}) out of range for {n} points")
        rows[a] |= 1 << b
    return tuple(rows)


def pairs_of(rows: Sequence[int]) -> list[tuple[int, int]]:
    return [(x, y) for x, r in enumerate(rows) for y in bits(r)]


def compose(r: Sequence[int], s: Sequence[int]) -> Rows:
    """Relational composition ``r;s``: first ``r`` then ``s``."""
    out = []
    for row in r:
        acc = 0
        for y in bits(row):
            acc |= s[y]
        out.append(acc)
    return tuple(out)


def subset_rel(r: Sequence[int], s: Sequence[int]) -> bool:
    return all(a & ~b == 0 for a, b in zip(r, s))


def identity(n: int) -> Rows:
    return tuple(1 << x for x in range(n))


def converse(rows: Sequence[int]) -> Rows:
    n = len(rows)
    out = [0] * n
    for x, row in enumerate(rows):
        for y in bits(row):
            out[y] |= 1 << x
    return tuple(out)


def reflexive_transitive_closure(n: int, pairs: Iterable[tuple[int, int]]) -> Rows:
    rows = list(rows_from_pairs(n, pairs))
    for x in range(n):
        rows[x] |= 1 << x
    changed = True
    while changed:
        changed = False
        for x in range(n):
            acc = rows[x]
            for y in bits(rows[x]):
                acc |= rows[y]
            if acc != rows[x]:
                rows[x] = acc
                changed = True
    return tuple(rows)


def is_partial_order(rows: Sequence[int]) -> bool:
    n = len(rows)
    for x in range(n):
        if not rows[x] >> x & 1:
            return False
        for y in bits(rows[x]):
            if rows[y] & ~rows[x]:
                return False
            if y != x and rows[y] >> x & 1:
                return False
    return True


def strict_part(rows: Sequence[int]) -> Rows:
    return tuple(r & ~(1 << x) for x, r in enumerate(rows))


def down_rows(rows: Sequence[int]) -> Rows:
    return converse(rows)


def is_upset(rows: Sequence[int], mask: int) -> bool:
    return all(rows[x] & ~mask == 0 for x in bits(mask))


def up_closure(rows: Sequence[int], mask: int) -> int:
    acc = 0
    for x in bits(mask):
        acc |= rows[x]
    return acc


def is_chain(rows: Sequence[int], mask: int) -> bool:
    """True iff the points in ``mask`` are pairwise comparable."""
    pts = list(bits(mask))
    return all(rows[a] >> b & 1 or rows[b] >> a & 1 for i, a in enumerate(pts) for b in pts[i + 1:])


def upsets(rows: Sequence[int]) -> list[int]:
    """All upsets of the order, as up-closures of antichains, in canonical order."""
    return list(_upsets_cached(tuple(rows)))


@lru_cache(maxsize=4096)
def _upsets_cached(rows: Rows) -> tuple[int, ...]:
    n = len(rows)
    strict = strict_part(rows)
    found = set()
    for sub in range(1 << n):
        # antichain: no member strictly below another member
        if any(strict[x] & sub for x in bits(sub)):
            continue
        found.add(up_closure(rows, sub))
    return tuple(sorted(found, key=mask_key))


def upsets_recursive(up: Sequence[int], down: Sequence[int]) -> list[int]:
    """All upsets of an order given by up- and down-closure masks of each element.

    Branches on the lowest remaining element: either it joins (with its whole
    up-closure) or it is excluded (with its whole down-closure).
    """
    out: list[int] = []

    def rec(remaining: int, chosen: int) -> None:
        if not remaining:
            out.append(chosen)
            return
        e = (remaining & -remaining).bit_length() - 1
        rec(remaining & ~up[e], chosen | (up[e] & remaining))
        rec(remaining & ~down[e], chosen)

    rec(full_mask(len(up)), 0)
    return out


def poset_key(rows: Sequence[int]) -> tuple[int, tuple[tuple[int, int], ...]]:
    sp = pairs_of(strict_part(rows))
    return (len(sp), tuple(sp))


def extensions(rows: Rows) -> Iterator[Rows]:
    """Every partial order on ``k+1`` points restricting to ``rows`` on the first ``k``.

    The new point ``k`` gets a downset ``D`` strictly below it and an upset ``U``
    strictly above it, where ``D`` and ``U`` are disjoint and every member of ``D``
    lies below every member of ``U``.
    """
    k = len(rows)
    ups = _upsets_cached(rows) if k else (0,)
    full = full_mask(k)
    for u in ups:
        for dcomp in ups:
            d = full & ~dcomp  # complement of an upset is a downset
            if d & u:
                continue
            if any(rows[x] & u != u for x in bits(d)):
                continue
            new = [r | (1 << k) if d >> x & 1 else r for x, r in enumerate(rows)]
            new.append((1 << k) | u)
            yield tuple(new)


@lru_cache(maxsize=16)
def enumerate_posets(n: int) -> tuple[Rows, ...]:
    """Every labeled partial order on ``n`` points exactly once, canonically sorted."""
    if n < 0:
        raise ValueError("negative size")
    posets: list[Rows] = [()]
    for _ in range(n):
        posets = [new for rows in posets for new in extensions(rows)]
    return tuple(sorted(posets, key=poset_key))


def is_linear(rows: Sequence[int]) -> bool:
    return is_chain(rows, full_mask(len(rows)))


def chain_rows(n: int) -> Rows:
    """The chain ``0 < 1 < ... < n-1``."""
    return tuple(full_mask(n) & ~full_mask(x) for x in range(n))


def canonical_form(rows: Sequence[int], extra: Sequence[Sequence[int]] = ()) -> tuple:
    """Isomorphism-invariant key: lexicographically least relabeling.

    ``extra`` lists further relations transported along the same permutation.
    Intended only for small ``n``.
    """
    from itertools import permutations

    n = len(rows)
    best = None
    for perm in permutations(range(n)):
        rel_all = []
        for rel in (rows, *extra):
            new = [0] * n
            for x, row in enumerate(rel):
                m = 0
                for y in bits(row):
                    m |= 1 << perm[y]
                new[perm[x]] = m
            rel_all.append(tuple(new))
        key = tuple(rel_all)
        if best is None or key < best:
            best = key
    return best
