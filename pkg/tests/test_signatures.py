import itertools

import pytest
from hypothesis import given, strategies as st

from proclone.clones import FiniteMonoid, MonoidAction, RankedAlphabet, trees_below_depth
from proclone.errors import ActionLawViolation
from proclone.signatures import (PointedPair, Signature, Y0, Y1, action_roundtrip, adjunction_counts,
                                 collapse_check, compose_signatures, corrupt_action, free_iteration,
                                 free_iteration_agrees, monoid_object_laws, raw_monoid_object, semidirect,
                                 semidirect_associator, setsig, setsig_coherence, sigset, unit_laws_check)

S01 = RankedAlphabet((0, 1))


def test_composite_sizes_frozen():
    x = Signature.of_alphabet(S01)
    assert [x.size(n) for n in range(3)] == [1, 2, 3]
    assert [compose_signatures(x, x).size(n) for n in range(3)] == [2, 3, 4]


def test_free_iteration_sizes_frozen():
    # with y0 o (empty) = 1 the constant enters at the first step
    assert [len(free_iteration(S01, d, 1)) for d in range(7)] == [0, 2, 4, 6, 8, 10, 12]
    assert len(free_iteration(S01, 2, 1)) == 4
    assert len(free_iteration(S01, 3, 1)) == 6


@pytest.mark.parametrize("arities", [(0, 1), (1,), (0, 2), (1, 1)])
def test_free_iteration_agrees_with_trees(arities):
    sigma = RankedAlphabet(arities)
    depth = 6 if max(arities) < 2 else 4
    assert free_iteration_agrees(sigma, depth, 1)
    assert free_iteration(sigma, 3, 1) == trees_below_depth(sigma, 1, 3)


def test_sigset_frozen():
    assert sigset(Y0).sizes == (1, 1)
    assert sigset(Y1).sizes == (0, 1)
    assert sigset(Signature.of_alphabet(RankedAlphabet((0, 1, 2)))).sizes == (1, 3)


def test_setsig_shape():
    x = setsig(PointedPair.of(2, 3))
    assert [x.size(n) for n in range(3)] == [2, 5, 8]


def test_semidirect_sizes_frozen():
    p = semidirect(PointedPair.of(2, 1), PointedPair.of(1, 2))
    assert p.sizes == (3, 2)


@given(st.integers(0, 2), st.integers(0, 2), st.lists(st.integers(0, 2), max_size=3))
def test_setsig_sigset_hom_counts_agree(q, a, arities):
    left, right = adjunction_counts(PointedPair.of(q, a), Signature.of_alphabet(RankedAlphabet(arities)))
    assert left == right


@given(st.lists(st.integers(0, 2), max_size=3))
def test_unit_and_collapse_isomorphisms(arities):
    x = Signature.of_alphabet(RankedAlphabet(arities))
    for r in unit_laws_check(x) + [collapse_check(x, x)]:
        assert r.passed, r.witness


@pytest.mark.parametrize("sizes", [(1, 1), (2, 1), (2, 2)])
def test_setsig_is_monoidal(sizes):
    p = PointedPair.of(*sizes)
    for r in setsig_coherence(p, p, p):
        assert r.passed, (r.name, r.witness)


def test_semidirect_associator_is_bijective():
    pairs = [PointedPair.of(2, 2), PointedPair.of(1, 2)]
    for p, r, s in itertools.product(pairs, repeat=3):
        qa, aa = semidirect_associator(p, r, s)
        rhs = semidirect(p, semidirect(r, s))
        assert sorted(map(str, qa.values())) == sorted(map(str, rhs.q))
        assert sorted(map(str, aa.values())) == sorted(map(str, rhs.a))


ACTIONS = [
    MonoidAction.flip(),
    MonoidAction.trivial(3),
    MonoidAction(FiniteMonoid.cyclic(3), 3, tuple(tuple((x + a) % 3 for x in range(3)) for a in range(3))),
    MonoidAction(FiniteMonoid(((0, 1), (1, 1)), 0), 2, ((0, 1), (0, 0))),
]


@pytest.mark.parametrize("ma", ACTIONS)
def test_action_roundtrip(ma):
    r = action_roundtrip(ma)
    assert r["passed"], r["checks"]


@pytest.mark.parametrize("mode", ["unit", "action", "monoid"])
def test_corrupted_actions_are_rejected(mode):
    bad = corrupt_action(MonoidAction.flip(), mode)
    with pytest.raises(ActionLawViolation):
        bad.validate()
    assert not all(ok for _, ok, _ in monoid_object_laws(raw_monoid_object(bad)))
