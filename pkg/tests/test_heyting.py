from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from strategies import guarded_polynomials

from imlk import order
from imlk.fixpoint import diag
from imlk.heyting import (
    THREE,
    TWO,
    AlgebraError,
    Operator,
    Polynomial,
    PolynomialError,
    cb_coderivative,
    chain,
    classify_operator,
    coderivative,
    coderivative_via_density,
    coderivative_via_density_table,
    dense_matrix,
    enumerate_algebras,
    enumerate_operators,
    fixpoint_counts,
    from_order,
    from_poset,
    is_dense,
    parse_poset_text,
    poly_fixpoints,
    poly_grid,
    poly_values,
    scattered,
)
from imlk.parser import parse
from imlk.syntax import free_vars

C2 = (0b11, 0b10)
FORK = (0b111, 0b010, 0b100)
BOT3, MID3, TOP3 = 0, 1, 2
POLYS = guarded_polynomials()


def test_from_poset_examples():
    assert from_poset((1,)).m == 2
    ha = from_poset(C2)
    assert ha.labels == (0, 0b10, 0b11)
    assert [[ha.leq(a, b) for b in range(3)] for a in range(3)] == [[a <= b for b in range(3)] for a in range(3)]
    ha = from_poset(FORK)
    assert [ha.element_name(a) for a in range(ha.m)] == ["{}", "{1}", "{2}", "{1,2}", "{0,1,2}"]
    with pytest.raises(AlgebraError):
        from_poset((0b11, 0b11))


def test_tables_validate():
    for rows in order.enumerate_posets(3):
        from_poset(rows).check()
    THREE.check()


def test_from_order_rejects_non_distributive():
    # the diamond M3
    le = [[1, 1, 1, 1, 1], [0, 1, 0, 0, 1], [0, 0, 1, 0, 1], [0, 0, 0, 1, 1], [0, 0, 0, 0, 1]]
    with pytest.raises(AlgebraError):
        from_order(le)


def test_from_order_agrees_with_upsets():
    for rows in order.enumerate_posets(3):
        ha = from_poset(rows)
        hb = from_order(ha.le)
        for t in ("meet", "join", "impl"):
            assert (getattr(ha, t) == getattr(hb, t)).all()


def test_coderivative_examples():
    assert coderivative(THREE).table == (MID3, TOP3, TOP3)
    assert coderivative(TWO).table == (1, 1)
    for ha in enumerate_algebras(8):
        assert coderivative(ha)(ha.top) == ha.top


def test_cb_coderivative_examples():
    ha = from_poset(C2)
    op = cb_coderivative(C2)
    assert ha.labels[op(ha.index_of_label(0))] == 0b10
    assert ha.labels[op(ha.index_of_label(0b10))] == 0b11
    for rows in order.enumerate_posets(3):
        top = from_poset(rows).top
        assert cb_coderivative(rows)(top) == top


def test_density_examples():
    assert is_dense(THREE, MID3, BOT3)
    assert not is_dense(THREE, BOT3, BOT3)
    for i in range(3):
        assert is_dense(THREE, TOP3, i)
    with pytest.raises(AlgebraError):
        is_dense(THREE, BOT3, MID3)


def test_coderivative_via_density_examples():
    assert coderivative_via_density(THREE, BOT3) == MID3
    assert coderivative_via_density(TWO, 0) == 1
    for ha in enumerate_algebras(6):
        assert coderivative_via_density(ha, ha.top) == ha.top


def test_classify_examples():
    for rows in order.enumerate_posets(3):
        ha = from_poset(rows)
        f = classify_operator(ha, coderivative(ha))
        assert f.operator and f.r and f.mhc and f.km
    ident = classify_operator(THREE, Operator((0, 1, 2)))
    assert ident.mhc and not ident.km
    const = classify_operator(THREE, Operator((2, 2, 2)))
    assert const.operator and const.r and not const.mhc


def test_poly_fixpoint_examples():
    cod = coderivative(THREE)
    assert poly_fixpoints(THREE, cod, parse("box p -> bot"), "p") == {BOT3}
    assert poly_fixpoints(THREE, cod, parse("p"), "p") == {0, 1, 2}
    assert poly_fixpoints(THREE, cod, parse("box p"), "p") == {TOP3}
    with pytest.raises(PolynomialError):
        poly_fixpoints(THREE, cod, parse("box p -> h"), "p")
    with pytest.raises(PolynomialError):
        poly_fixpoints(THREE, cod, parse("box p -> e7"), "p")


def test_poly_constants():
    cod = coderivative(THREE)
    assert poly_fixpoints(THREE, cod, parse("box p -> e1"), "p") == poly_fixpoints(
        THREE, cod, parse("box p -> h"), "p", {"h": 1}
    )
    assert Polynomial(parse("box p -> h"), constants={"h": 1}).fixpoints(THREE, cod) == {MID3}


def test_scattered_examples():
    assert scattered(from_poset(C2))
    assert scattered(from_poset(FORK))
    assert scattered(TWO)


def test_enumerations():
    assert [ha.m for ha in enumerate_algebras(4)] == [2, 4, 3, 4]
    # distributive lattices with 2..8 elements: 1, 1, 2, 3, 5, 8, 15
    sizes = [ha.m for ha in enumerate_algebras(8)]
    assert [sizes.count(k) for k in range(2, 9)] == [1, 1, 2, 3, 5, 8, 15]
    ops = list(enumerate_operators(THREE))
    assert all(classify_operator(THREE, op).operator for op in ops)
    # all monotone maps fixing top on the chain preserve meets
    assert len(ops) == 6


def test_poset_file():
    rows = parse_poset_text("# fork\npoints 3\nle 0 1\nle 0 2\n")
    assert rows == FORK
    rows = parse_poset_text("points 3\nle 0 1\nle 1 2\n")
    assert rows == (0b111, 0b110, 0b100)
    with pytest.raises(AlgebraError):
        parse_poset_text("points 2\nle 0 1\nle 1 0\n")


# --- invariants -----------------------------------------------------------------------


def test_coderivatives_agree_on_small_posets():
    for n in range(1, 6):
        for rows in order.enumerate_posets(n):
            ha = from_poset(rows)
            cod = coderivative(ha)
            assert cod == cb_coderivative(rows)
            assert cod == coderivative_via_density_table(ha)


def test_density_two_ways():
    for ha in enumerate_algebras(8):
        dm = dense_matrix(ha)
        for h, i in product(range(ha.m), repeat=2):
            if ha.leq(i, h):
                d = is_dense(ha, h, i)
                assert d.dense == d.via_join == dm[h, i]
            else:
                assert not dm[h, i]


def pairs(max_m=4):
    for ha in enumerate_algebras(max_m):
        for op in enumerate_operators(ha):
            yield ha, op, classify_operator(ha, op)


PAIRS = list(pairs())


def family_has_fixpoints(ha, op):
    return all(poly_fixpoints(ha, op, parse("box p -> h"), "p", {"h": h}) for h in range(ha.m))


def sampled_fixpoint_counts(ha, op):
    for t in POLYS:
        yield t, fixpoint_counts(ha, op, t, "p", ("c1", "c2"))


def test_k4_gl_iff_family_has_fixpoints():
    seen = 0
    for ha, op, f in PAIRS:
        if f.k4:
            seen += 1
            assert f.gl == family_has_fixpoints(ha, op)
    assert seen == 40


def test_mhc_km_iff_guarded_polynomials_have_fixpoints():
    seen = 0
    for ha, op, f in PAIRS:
        if f.mhc:
            seen += 1
            every = all((n >= 1).all() for _, n in sampled_fixpoint_counts(ha, op))
            assert f.km == every
    assert seen == 18


def test_unique_fixpoints_on_gl_algebras():
    for ha, op, f in PAIRS:
        if f.gl:
            assert all((n == 1).all() for _, n in sampled_fixpoint_counts(ha, op))


def test_diagonal_fixpoint_is_algebraic_fixpoint():
    for ha, op, f in PAIRS:
        if not f.gl:
            continue
        for t in POLYS[::3]:
            d = diag(t, "p")
            assert "p" not in free_vars(d)
            for c1, c2 in product(range(ha.m), repeat=2):
                env = {"c1": c1, "c2": c2}
                value = int(poly_values(ha, op, d, "p", env)[0])
                assert value in poly_fixpoints(ha, op, t, "p", env)


def test_grid_matches_pointwise_evaluation():
    for ha, op, f in PAIRS[::7]:
        for t in POLYS[::11]:
            grid = poly_grid(ha, op, t, "p", ("c1", "c2"))
            for c1, c2 in product(range(ha.m), repeat=2):
                env = {"c1": c1, "c2": c2}
                assert list(grid[c1, c2]) == list(poly_values(ha, op, t, "p", env))


def test_gl_operators_are_k4():
    for ha, op, f in PAIRS:
        if f.operator and f.gl:
            assert f.k4


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6))
def test_chains_are_scattered(k):
    ha = chain(k)
    cod = coderivative(ha)
    assert cod.table == tuple(list(range(1, k)) + [k - 1])
    assert scattered(ha)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.sampled_from(order.enumerate_posets(n))))
def test_upset_algebra_laws(rows):
    ha = from_poset(rows)
    labels = np.array(ha.labels)
    a, b = labels[:, None], labels[None, :]
    assert (labels[ha.meet] == (a & b)).all()
    assert (labels[ha.join] == (a | b)).all()
