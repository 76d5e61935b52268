from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from strategies import formulas

import oracle
from imlk import order
from imlk.bimodal import (
    MIX,
    BimodalFrame,
    GLModel,
    blok_esakia_formulas,
    companion_frame,
    decide_gl,
    decide_gl3,
    decide_km,
    decide_km_lc,
    flat,
    fo_next_batch,
    fo_next_check,
    is_s4_i,
    mix_frames,
    mix_to_gl,
    preorders,
    proper_strict,
    strict_inclusion,
    satisfies_mix,
    to_gl,
    valid_on_bimodal,
)
from imlk.kripke import ALL, C2, R1, IntFrame, KripkeWitness, countermodel, enumerate_frames, forces, frame_class, valid_on
from imlk.parser import parse
from imlk.syntax import AXIOMS, BOT, TOP, And, Box, MixedTagsError, Tag, Var, axiom, box, free_vars, iff, neg
from imlk.verdict import ResourceLimitError

small = formulas(names=("p", "q"), max_leaves=7)


def bi(src):
    return parse(src)


def test_flat_examples():
    assert flat(parse("p")) == bi("[i] p")
    assert flat(parse("box p")) == bi("[i] [m] [i] p")
    assert flat(parse("p -> q")) == bi("[i] ([i] p -> [i] q)")


def test_to_gl_examples():
    assert to_gl(BOT) == And(box(BOT), BOT)
    assert to_gl(parse("p")) == parse("box p & p")
    assert to_gl(parse("box p")) == parse("box box (box p & p) & box (box p & p)")


def test_mix_to_gl_requires_bimodal_tags():
    with pytest.raises(MixedTagsError):
        mix_to_gl(parse("box p"))


def test_decide_gl_examples():
    assert decide_gl(axiom("wlöb")).label == "theorem"
    v = decide_gl(neg(box(BOT)))
    assert v.label == "non-theorem"
    assert v.witness == GLModel(1, (0,), {})
    assert decide_gl(box(TOP)).holds


def test_decide_gl_classical_principles():
    assert decide_gl(parse("p | (p -> bot)")).holds
    assert not decide_gl(parse("box p -> p")).holds
    assert decide_gl(parse("box p -> box box p")).holds


def test_decide_km_examples():
    assert decide_km(axiom("slöb")).holds
    v = decide_km(axiom("gd"))
    assert not v.holds
    w = v.witness
    assert isinstance(w, KripkeWitness) and frame_class("KM")(w.frame)
    assert not forces(w.frame, w.valuation, w.world, axiom("gd"))
    assert decide_km(axiom("r")).holds


def test_decide_km_lc_examples():
    assert decide_km_lc(axiom("gd")).holds
    v = decide_km_lc(axiom("em"))
    assert not v.holds and v.witness.frame.n == 2
    assert not forces(v.witness.frame, v.witness.valuation, 0, axiom("em"))
    assert frame_class("KM⊕LC")(v.witness.frame)
    assert decide_km_lc(axiom("slöb")).holds


def test_chain_search_needs_more_than_modal_depth():
    # two incompatible successors force a chain of three worlds
    v = decide_gl3(parse("(box p -> bot) & (box (p -> bot) -> bot) -> bot"))
    assert not v.holds and v.witness.n == 3


def test_gl_budget():
    with pytest.raises(ResourceLimitError):
        decide_gl(to_gl(axiom("ufp")), budget=10)


# brute force over every finite strict partial order with at most three worlds
def strict_orders(n):
    for r in oracle.all_relations(n):
        irreflexive = all((x, x) not in r for x in range(n))
        if irreflexive and oracle.compose(r, r) <= r:
            yield r


GL_FRAMES = [(n, r) for n in (1, 2, 3) for r in strict_orders(n)]


def brute_gl_valid(a):
    names = sorted(free_vars(a))
    for n, r in GL_FRAMES:
        subsets = [set(order.bits(m)) for m in range(1 << n)]
        for choice in product(subsets, repeat=len(names)):
            if oracle.classical_truth(n, {Tag.PLAIN: r}, dict(zip(names, choice)), a) != set(range(n)):
                return False
    return True


@settings(max_examples=150, deadline=None)
@given(small)
def test_decide_gl_against_brute_force(a):
    v = decide_gl(a)
    if v.holds:
        assert brute_gl_valid(a)
    else:
        m = v.witness
        assert not m.truth(a) & 1
        # transitive and irreflexive
        assert all(not m.rm[w] >> w & 1 for w in range(m.n))
        assert order.subset_rel(order.compose(m.rm, m.rm), m.rm)


@settings(max_examples=100, deadline=None)
@given(small)
def test_chain_search_refines_gl(a):
    v3 = decide_gl3(a)
    if decide_gl(a).holds:
        assert v3.holds
    if not v3.holds:
        m = v3.witness
        assert not m.truth(a) & 1
        assert all(m.rm[i] == order.full_mask(m.n) & ~order.full_mask(i + 1) for i in range(m.n))


@settings(max_examples=80, deadline=None)
@given(small)
def test_km_witness_refutes(a):
    v = decide_km(a)
    if not v.holds:
        w = v.witness
        assert frame_class("KM")(w.frame)
        assert not forces(w.frame, w.valuation, w.world, a)
    else:
        assert countermodel(a, frame_class("KM"), 3, dedup=True).holds


def test_km_catalog_cross_validation():
    km = frame_class("KM")
    for name in sorted(AXIOMS):
        if name == "ufp":
            continue
        a = axiom(name)
        v = decide_km(a)
        found = countermodel(a, km, 4, dedup=True)
        if v.holds:
            assert found.holds, name
        else:
            w = v.witness
            assert not forces(w.frame, w.valuation, w.world, a), name


def test_companion_examples():
    c = companion_frame(C2)
    assert c.ri == C2.leq and order.pairs_of(c.rm) == [(0, 1)]
    r = companion_frame(R1)
    assert r.ri_pairs() == [(0, 0)] and r.rm_pairs() == [(0, 0)]


def test_companions_satisfy_mix():
    for n in (1, 2, 3):
        for f in enumerate_frames(n, ALL):
            c = companion_frame(f)
            assert is_s4_i(c) and satisfies_mix(c)


def test_valid_on_bimodal_examples():
    c = companion_frame(C2)
    assert valid_on_bimodal(c, MIX)
    v = valid_on_bimodal(c, flat(axiom("cl")))
    assert not v.holds and v.witness.frame == c
    a = Var("A")
    for rm in range(4):
        f = BimodalFrame(2, (0b01, 0b10), (rm & 3, rm >> 1))
        assert valid_on_bimodal(f, iff(Box(a, Tag.I), a))


def test_valid_on_bimodal_rejects_mixed_plain():
    with pytest.raises(MixedTagsError):
        valid_on_bimodal(companion_frame(C2), parse("box p -> p"))
    with pytest.raises(MixedTagsError):
        valid_on_bimodal(companion_frame(C2), Box(Var("p"), Tag.I) >> box(Var("p")))


def test_bimodal_witness_is_classical():
    v = valid_on_bimodal(companion_frame(C2), parse("[i] p -> p"))
    assert v.holds
    v = valid_on_bimodal(companion_frame(C2), parse("[m] p -> p"))
    w = v.witness
    assert not v.holds
    from imlk.bimodal import classical_truth

    t = classical_truth(2, {Tag.I: w.frame.ri, Tag.M: w.frame.rm}, w.valuation, parse("[m] p -> p"))
    assert not t >> w.world & 1


def test_fo_next_examples():
    c2_cover = IntFrame(2, C2.leq, (0b10, 0))
    assert fo_next_check(companion_frame(c2_cover))
    assert not fo_next_check(BimodalFrame(2, C2.leq, (0, 0)))
    assert fo_next_check(BimodalFrame(1, (1,), (1,)))


def test_fo_next_violating_instance():
    # x=0 sees y=0 and z=1, z does not see y, z sees w=1, but x does not strictly see w
    ri, rm = C2.leq, (0, 0)
    x, y, z, w = 0, 0, 1, 1
    assert ri[x] >> y & 1 and ri[x] >> z & 1 and not ri[z] >> y & 1 and ri[z] >> w & 1 and not rm[x] >> w & 1


def test_fo_next_batch_matches_literal_scan():
    for n in (1, 2, 3):
        for le in order.enumerate_posets(n):
            rms = [tuple(rows) for rows in product(range(1 << n), repeat=n)]
            arr = np.array(rms, dtype=np.uint8)
            got = fo_next_batch(le, arr)
            for rm, g in zip(rms, got):
                assert bool(g) == fo_next_check(BimodalFrame(n, le, rm))


def test_fo_next_is_strict_inclusion_on_companions():
    for n in (1, 2, 3):
        for f in enumerate_frames(n, ALL):
            c = companion_frame(f)
            assert fo_next_check(c) == strict_inclusion(c) == order.subset_rel(f.strict, f.prec)


def test_fo_next_is_strict_inclusion_on_mix_frames():
    for n in (1, 2, 3):
        total = 0
        for ri, rms in mix_frames(n):
            for rm in rms:
                f = BimodalFrame(n, ri, tuple(int(x) for x in rm))
                assert is_s4_i(f) and satisfies_mix(f)
                assert fo_next_check(f) == strict_inclusion(f)
                total += 1
        assert total == {1: 2, 2: 30, 3: 1666}[n]


def test_fo_next_on_clusters():
    # inside a cluster the strict part is empty and the condition holds vacuously
    f = BimodalFrame(2, (0b11, 0b11), (0, 0))
    assert is_s4_i(f) and satisfies_mix(f)
    assert proper_strict(f.ri) == (0, 0)
    assert fo_next_check(f) and strict_inclusion(f)


def test_preorder_counts():
    # labeled preorders (quasi-orders) on 1..4 points
    assert [sum(1 for _ in preorders(n)) for n in range(1, 5)] == [1, 4, 29, 355]


@pytest.mark.parametrize("name", sorted(set(AXIOMS) - {"ufp"}))
def test_companion_equivalence(name):
    a = axiom(name)
    for n in (1, 2, 3):
        for f in enumerate_frames(n, ALL):
            assert bool(valid_on(f, a)) == bool(valid_on_bimodal(companion_frame(f), flat(a))), (name, f)


def test_flat_facts_on_companions():
    a, b = Var("A"), Var("B")
    facts = [
        iff(flat(a), Box(flat(a), Tag.I)),
        iff(flat(And(a, b)), And(flat(a), flat(b))),
        iff(flat(box(a)), Box(Box(flat(a), Tag.M), Tag.I)),
    ]
    for n in (1, 2, 3):
        for f in enumerate_frames(n, ALL):
            c = companion_frame(f)
            for fact in facts:
                assert valid_on_bimodal(c, fact)


def test_blok_esakia_on_mhc_companions():
    forms = blok_esakia_formulas()
    mhc = frame_class("mHC")
    for n in (1, 2, 3, 4):
        for f in enumerate_frames(n, mhc):
            c = companion_frame(f)
            assert all(valid_on_bimodal(c, g) for g in forms)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.sampled_from(list(enumerate_frames(n, ALL)))), small)
def test_companion_equivalence_random(f, a):
    assert bool(valid_on(f, a)) == bool(valid_on_bimodal(companion_frame(f), flat(a)))
