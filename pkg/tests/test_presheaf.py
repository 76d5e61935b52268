from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from imlk import order
from imlk.presheaf import (
    POINT,
    App,
    Conj,
    Disj,
    Eq,
    Falsum,
    FinPoset,
    Forall,
    Implies,
    InternalTypeError,
    Later,
    Member,
    NatTrans,
    NotContractiveError,
    Presheaf,
    PresheafError,
    Prop,
    Subobject,
    TVar,
    Truth,
    _constant_formulas,
    banach_fixpoint,
    chain_poset,
    check_contractive,
    check_maxst,
    check_non_expansive,
    check_strong_lob,
    constant,
    endomorphisms,
    enumerate_presheaves,
    fix_subobject,
    force,
    force_everywhere,
    identity_map,
    internal_later,
    later_functor,
    next_unit,
    omega,
    parse_presheaf_text,
    prepend,
    stream_presheaf,
    subfunctors,
    terminal,
    truncated_chain,
    truth_set,
)
from imlk.verdict import ResourceLimitError

C2 = FinPoset((0b11, 0b10))
FORK = FinPoset((0b111, 0b010, 0b100))
ABC = constant(POINT, "abc")
AB = constant(POINT, "ab")


def const_map(x, target):
    return NatTrans.from_function(x, x, lambda w, e: target)


def swap():
    return NatTrans.from_function(AB, AB, lambda w, e: "b" if e == "a" else "a")


def small_posets(max_n):
    """One poset per isomorphism type."""
    for n in range(1, max_n + 1):
        seen = set()
        for rows in order.enumerate_posets(n):
            key = order.canonical_form(rows)
            if key not in seen:
                seen.add(key)
                yield FinPoset(rows)


def test_omega_examples():
    assert [omega(POINT).label(0, i) for i in range(2)] == ["{}", "{0}"]
    o = omega(C2)
    assert (o.size(0), o.size(1)) == (3, 2)
    o = omega(chain_poset(3))
    assert [o.size(w) for w in range(3)] == [4, 3, 2]


def test_forcing_examples():
    c3 = chain_poset(3)
    two = constant(c3, "ab")
    distinct = Forall("x", two, Forall("y", two, Eq(TVar("x"), TVar("y"))))
    assert force(c3, 2, {}, Later(distinct))
    assert not force(c3, 2, {}, distinct)
    assert not force(c3, 0, {}, Later(Falsum()))
    assert force(c3, 0, {}, Later(Later(Later(Falsum()))))


def test_forcing_clauses():
    c3 = chain_poset(3)
    top_only = Prop(0b100)
    assert truth_set(c3, top_only) == 0b100
    assert truth_set(c3, Later(top_only)) == 0b110
    assert truth_set(c3, Implies(top_only, Falsum())) == 0
    assert truth_set(c3, Disj(top_only, Implies(top_only, Falsum()))) == 0b100
    assert truth_set(c3, Conj(Truth(), Prop(0b110))) == 0b110


def test_forcing_type_errors():
    c3 = chain_poset(3)
    x = constant(c3, "ab")
    with pytest.raises(InternalTypeError):
        force(c3, 0, {}, Eq(TVar("x"), TVar("x")))
    with pytest.raises(InternalTypeError):
        force(c3, 0, {}, Forall("x", x, Forall("x", x, Truth())))
    y = constant(C2, "ab")
    with pytest.raises(InternalTypeError):
        force(c3, 0, {"y": (y, 0)}, Truth())


def test_forcing_with_environment_and_terms():
    x = stream_presheaf(3)
    f = prepend(x, "1")
    t3 = x.poset
    w = 2  # stage 3
    env = {"s": (x, x.index(w, "011"))}
    assert not force(t3, w, env, Eq(App(f, TVar("s")), TVar("s")))
    ones = {"s": (x, x.index(w, "111"))}
    assert force(t3, w, ones, Eq(App(f, TVar("s")), TVar("s")))


def test_strong_lob_examples():
    assert check_strong_lob(C2)
    assert check_strong_lob(FORK)
    assert check_strong_lob(POINT)


def test_fix_subobject_examples():
    s = fix_subobject(const_map(ABC, "c"))
    assert s.labels() == [["c"]] and s.is_global_element()
    s = fix_subobject(identity_map(ABC))
    assert s.labels() == [["a", "b", "c"]]
    s = fix_subobject(swap())
    assert s.labels() == [[]] and not s.is_global_element()


def test_non_expansive_examples():
    assert check_non_expansive(const_map(ABC, "c"))
    assert not check_non_expansive(identity_map(AB))
    assert not check_non_expansive(swap())


def test_maxst_examples():
    r = check_maxst(const_map(ABC, "c"))
    assert r.subterminal and r.maximal
    r = check_maxst(swap())
    assert r.subterminal and not r.maximal
    assert r.to_dict()["witness"] == {"stage": "0", "subfunctor": {"0": ["a"]}}


def test_contractive_examples():
    x = stream_presheaf(3)
    assert check_contractive(prepend(x, "1"))
    assert not check_contractive(identity_map(x))
    for x in (AB, ABC):
        for f in endomorphisms(x):
            constant_map = len(set(f.comps[0])) == 1
            assert check_contractive(f) == constant_map


def test_later_functor_examples():
    t = terminal(truncated_chain(3))
    lt = later_functor(t)
    assert [lt.size(w) for w in range(3)] == [1, 1, 1]
    x = stream_presheaf(3)
    assert [x.size(w) for w in range(3)] == [2, 4, 8]
    lx = later_functor(x)
    assert [lx.size(w) for w in range(3)] == [1, 2, 4]
    nxt = next_unit(x, lx)
    assert [[lx.label(w, nxt(w, v)) for v in range(x.size(w))] for w in (1, 2)] == [
        ["0", "0", "1", "1"],
        ["00", "00", "01", "01", "10", "10", "11", "11"],
    ]
    with pytest.raises(PresheafError):
        later_functor(terminal(FORK))


def test_banach_examples():
    x = stream_presheaf(3)
    c = banach_fixpoint(x, prepend(x, "1"))
    assert c.labels() == ["1", "11", "111"]
    assert c.dump() == "element 1: 1\nelement 2: 11\nelement 3: 111"
    g = next(iter(x.global_elements()))
    k = NatTrans(x, x, tuple((g[w],) * x.size(w) for w in range(3)))
    assert banach_fixpoint(x, k).choice == g
    with pytest.raises(NotContractiveError):
        banach_fixpoint(x, identity_map(x))


def test_banach_needs_inhabited_stages():
    p = truncated_chain(2)
    empty = Presheaf(p, ((), ()), {(0, 0): (), (1, 1): (), (1, 0): ()})
    with pytest.raises(PresheafError):
        banach_fixpoint(empty, identity_map(empty))


def test_construction_validates():
    with pytest.raises(PresheafError):
        FinPoset((0b11, 0b11))
    # actions that do not compose
    p = chain_poset(3)
    with pytest.raises(PresheafError):
        Presheaf.from_generators(p, ["ab", "ab", "ab"], {(0, 1): (1, 0), (1, 2): (0, 1), (0, 2): (0, 1)})
    x = constant(C2, "ab")
    with pytest.raises(PresheafError):
        # swapping only at the lower stage is not natural
        NatTrans(x, x, ((1, 0), (0, 1)))
    with pytest.raises(PresheafError):
        Subobject(x, (0b01, 0b10))


def test_subfunctors_and_guard():
    x = constant(C2, "ab")
    subs = subfunctors(x, 0)
    assert len(subs) == 9  # pairs S0 <= S1 of subsets of {a, b}: 3 choices per element
    assert subfunctors(x, 1) == [(0, 0), (0, 1), (0, 2), (0, 3)]
    big = constant(chain_poset(3), range(8))
    with pytest.raises(ResourceLimitError):
        subfunctors(big, 0)


def test_presheaf_file(tmp_path):
    (tmp_path / "c2.poset").write_text("points 2\nle 0 1\n")
    text = "poset c2.poset\nstage 0: a b\nstage 1: c\nmap 0 1: a->c b->c\nnat: 0: a->a b->a\nnat: 1: c->c\n"
    pf = parse_presheaf_text(text, str(tmp_path))
    assert pf.presheaf.size(0) == 2 and pf.endomorphism.comps == ((0, 0), (0,))
    inline = "points 2\nle 0 1\nstage 0: a\nstage 1: c\nmap 0 1: a->c\n"
    assert parse_presheaf_text(inline).endomorphism is None
    with pytest.raises(PresheafError):
        parse_presheaf_text("points 1\nstage 0: a\nbogus line\n")
    with pytest.raises(PresheafError):
        parse_presheaf_text("points 2\nle 0 1\nstage 0: a\nstage 1: c\n")


# --- invariants -----------------------------------------------------------------------


def test_internal_later_agrees_with_later_clause():
    for p in small_posets(3):
        for phi in _constant_formulas(p, 1):
            assert truth_set(p, internal_later(phi, p)) == truth_set(p, Later(phi))


def test_strong_lob_on_small_posets():
    for p in small_posets(3):
        assert check_strong_lob(p)


def scan_endomorphisms():
    for p in small_posets(2):
        for x in enumerate_presheaves(p, 2, 1):
            for f in endomorphisms(x):
                yield f


def test_non_expansive_maps_have_maximal_subterminal_fixpoints():
    tally = Counter()
    for f in scan_endomorphisms():
        ne, ct = check_non_expansive(f), check_contractive(f)
        r = check_maxst(f)
        if ne:
            assert r.subterminal and r.maximal
        if ct:
            assert ne
        tally[ne, r.holds, ct] += 1
    # both kinds occur; on this corpus the three properties happen to coincide
    assert set(tally) == {(True, True, True), (False, False, False)}


def test_maxst_fixed_points_are_global_elements():
    for f in scan_endomorphisms():
        r = check_maxst(f)
        if r.holds:
            assert fix_subobject(f).is_global_element()


def chain_endomorphisms(n, size):
    p = truncated_chain(n)
    for x in enumerate_presheaves(p, size, 1):
        for f in endomorphisms(x):
            if check_contractive(f):
                yield x, f


def test_banach_fixed_point_unique_on_small_chains():
    count = 0
    for n, size in ((1, 3), (2, 2), (3, 2)):
        for x, f in chain_endomorphisms(n, size):
            c = banach_fixpoint(x, f)
            fixed = [g for g in x.global_elements() if all(f(w, g[w]) == g[w] for w in range(n))]
            assert fixed == [c.choice]
            count += 1
    assert count > 0


@pytest.mark.parametrize("n", [4, 5])
def test_banach_on_streams(n):
    x = stream_presheaf(n)
    for sym in "01":
        c = banach_fixpoint(x, prepend(x, sym))
        assert c.labels() == [sym * (k + 1) for k in range(n)]


def test_banach_on_three_letter_streams():
    x = stream_presheaf(2, "012")
    c = banach_fixpoint(x, prepend(x, "2"))
    assert c.labels() == ["2", "22"]


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.sampled_from(["0", "1"]))
def test_prepend_is_contractive(n, sym):
    x = stream_presheaf(n)
    f = prepend(x, sym)
    assert check_contractive(f) and check_non_expansive(f)


def test_force_everywhere_matches_stagewise():
    x = constant(C2, "ab")
    phi = Forall("x", x, Member(TVar("x"), Subobject(x, (0b11, 0b11))))
    assert force_everywhere(C2, phi)
