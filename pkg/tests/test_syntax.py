import pytest
from hypothesis import given, strategies as st
from strategies import unimodal

from imlk.kripke import ALL, frame_batch
from imlk.syntax import (
    AXIOMS,
    BOT,
    LOGICS,
    TOP,
    And,
    Box,
    Impl,
    MixedTagsError,
    Or,
    Tag,
    UnknownNameError,
    Var,
    analyze,
    axiom,
    box,
    boxdot,
    free_vars,
    iff,
    is_guarded,
    logic,
    modal_depth,
    neg,
    subst,
    subst_map,
)

p, q, A, B = Var("p"), Var("q"), Var("A"), Var("B")


def test_subst_examples():
    assert subst(box(p) >> p, "p", BOT) == box(BOT) >> BOT
    assert subst(p, "p", q) == q
    assert subst(box(p & q), "q", TOP) == box(p & TOP)


def test_guarded_examples():
    assert is_guarded(box(p), "p")
    assert not is_guarded(p >> box(p), "p")
    assert is_guarded(q | box(p >> p), "p")
    assert is_guarded(q, "p")


def test_axiom_examples():
    assert axiom("slöb") == Impl(Impl(box(A), A), A)
    assert axiom("derv") == Impl(box(A), Or(Impl(B, A), B))
    assert axiom("next") == Impl(box(A), Impl(Impl(Impl(B, A), B), B))
    assert axiom("slob") == axiom("slöb")
    with pytest.raises(UnknownNameError):
        axiom("nope")


def test_catalog_covers_every_row():
    names = "cl em nrm opr trns bind r fmap refl pll wlöb henk ufp slöb glb grz sgrz next derv gd dot3 ver boxbot nnv nv"
    assert set(AXIOMS) == set(names.split())
    logics = "IPC Cl K^i K4^i C4^i R^i T^i S4^i Triv^i PLL^i GL^i SL^i CB^i mHC KM CBL^i LC KM⊕LC Ver^i NV^i NNV^i GL^cl"
    assert set(LOGICS) == set(logics.split())
    for lg in LOGICS.values():
        assert all(a in AXIOMS for a in lg.axioms)
    assert logic("ALL").name == "K^i"
    assert logic("KM").axioms == ("slöb", "next")


def test_analyze_examples():
    info = analyze(box(p) >> q)
    assert info.free_vars == {"p", "q"} and info.modal_depth == 1
    info = analyze(BOT)
    assert info.free_vars == set() and info.modal_depth == 0
    with pytest.raises(MixedTagsError):
        analyze(Box(p, Tag.I) & box(q))


def test_derived_forms_normalize():
    assert TOP == Impl(BOT, BOT)
    assert neg(A) == Impl(A, BOT)
    assert iff(A, B) == And(Impl(A, B), Impl(B, A))
    assert boxdot(A) == And(A, box(A))
    assert hash(box(A)) == hash(Box(Var("A")))
    assert box(A) != Box(A, Tag.M)


def test_modal_depth():
    assert modal_depth(box(box(p) >> box(p))) == 2


@given(unimodal, st.sampled_from(["p", "q"]))
def test_subst_identity(a, v):
    assert subst(a, v, Var(v)) == a


@given(unimodal, unimodal)
def test_subst_keeps_guardedness(a, b):
    if is_guarded(a, "p") and "p" not in free_vars(b):
        assert is_guarded(subst(a, "p", b), "p")


@given(unimodal, unimodal)
def test_subst_map_matches_subst(a, b):
    assert subst_map(a, {"q": b}) == subst(a, "q", b)


@given(unimodal)
def test_subst_removes_variable(a):
    assert "p" not in free_vars(subst(a, "p", q))


def test_glb_and_slob_equivalent_on_small_frames():
    for n in range(1, 4):
        batch = frame_batch(n, ALL)
        assert (batch.valid(axiom("glb")) == batch.valid(axiom("slöb"))).all()
