import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import closed_term
from proclone.errors import GuardExceeded
from proclone.finsem import (FinRelation, curry_table, denote_closed, enumerate_relations, fundamental_lemma_check,
                             interp_type, rel_member, relation_from_mask, relation_matrix, sem_equal, serialize,
                             uncurry_table)
from proclone.stlc import UNIT, Arrow, O, Prod, normalize, parse_term, typecheck

IDENTITY = parse_term("\\x:o. x")
SWAP = FinRelation.of(2, 2, [(0, 1), (1, 0)])


def test_cardinalities_frozen():
    assert interp_type(Arrow(Arrow(O, O), O), 2).cardinality == 16
    assert interp_type(Arrow(O, O), 3).cardinality == 27
    assert interp_type(Prod((O, Arrow(O, O))), 2).cardinality == 8
    assert interp_type(UNIT, 3).cardinality == 1


def test_function_enumeration_order():
    d = interp_type(Arrow(O, O), 3)
    # first domain element is the most significant digit
    assert d.index(denote_closed(IDENTITY, 3)) == 5
    assert [tuple(f.table()) for f in d.elements()[:3]] == [(0, 0, 0), (0, 0, 1), (0, 0, 2)]
    for i in range(d.cardinality):
        assert d.index(d.element(i)) == i


def test_curry_uncurry_roundtrip():
    for table in itertools.product(range(2), repeat=4):
        assert uncurry_table(2, 2, curry_table(2, 2, table)) == table


def test_relation_enumeration_counts():
    assert len(list(enumerate_relations(2, 2))) == 16
    assert len(list(enumerate_relations(2, 3))) == 64
    with pytest.raises(GuardExceeded):
        list(enumerate_relations(3, 5))


def test_swap_relation_on_functions_frozen():
    m = relation_matrix(Arrow(O, O), SWAP)
    assert m.astype(int).tolist() == [[0, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, 0]]


def test_guard_refuses_huge_enumeration():
    with pytest.raises(GuardExceeded):
        interp_type(Arrow(Arrow(O, O), Arrow(O, O)), 4, 1000).elements()


def test_serialize_small_value():
    assert serialize(Arrow(O, O), 3, denote_closed(IDENTITY, 3)) == {"type": "o -> o", "base": 3, "index": 5}


@pytest.mark.parametrize("ty", [O, Arrow(O, O), Prod((O, O)), UNIT, Arrow(Arrow(O, O), O), Arrow(O, Arrow(O, O))])
def test_diagonal_relation_is_equality(ty):
    d = interp_type(ty, 2)
    m = relation_matrix(ty, FinRelation.diagonal(2))
    els = d.elements()
    expected = np.array([[sem_equal(ty, 2, a, b) for b in els] for a in els])
    assert np.array_equal(m, expected)


def test_full_relation_on_arrows_is_full():
    ty = Arrow(O, O)
    assert relation_matrix(ty, FinRelation.full(2, 3)).all()


@given(st.integers(0, 10_000), st.integers(1, 3), st.integers(1, 3))
def test_fundamental_lemma_on_random_terms(seed, q, q2):
    t, ty = closed_term(seed)
    rel = relation_from_mask(q, q2, seed % (1 << (q * q2)))
    try:
        assert fundamental_lemma_check(t, ty, rel)
    except GuardExceeded:
        pass


@given(st.integers(0, 10_000), st.integers(1, 3))
def test_denotation_invariant_under_normalization(seed, q):
    t, ty = closed_term(seed)
    assert sem_equal(ty, q, denote_closed(t, q), denote_closed(normalize((), t), q))


@given(st.integers(0, (1 << 4) - 1))
def test_rel_member_matches_matrix(mask):
    rel = relation_from_mask(2, 2, mask)
    ty = Arrow(O, O)
    d = interp_type(ty, 2)
    m = relation_matrix(ty, rel)
    for i, j in itertools.product(range(d.cardinality), repeat=2):
        assert rel_member(ty, rel, d.element(i), d.element(j)) == bool(m[i, j])


def test_non_parametric_value_breaks_relation():
    # a constant function at size 2 is not related to the identity at size 2 by the diagonal
    ty = Arrow(O, O)
    d = interp_type(ty, 2)
    assert not rel_member(ty, FinRelation.diagonal(2), d.element(0), d.element(1))
    assert typecheck((), IDENTITY) == ty
