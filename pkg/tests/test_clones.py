import itertools

import pytest
from hypothesis import given, strategies as st

from proclone.errors import ActionLawViolation, ArityMismatch
from proclone.clones import (ActionClone, EndoClone, FiniteMonoid, FreeClone, FreeMorphism, MonoidAction,
                             MutatedClone, Node, ProductClone, RankedAlphabet, TVar, appvar, cay, check_clone_laws,
                             check_morphism, check_tree, delta, endo_drop_iso, enumerate_morphisms, eval_morphism,
                             eval_tree_batch, assignment_tables, identity_morphism, image_clone, morphism_count,
                             parse_tree, projection_morphism, terminal_clone, tree_key, tree_size, tree_subst,
                             trees_below_depth, trees_of_size, trees_up_to)

S01 = RankedAlphabet((0, 1))
S11 = RankedAlphabet((1, 1))
S02 = RankedAlphabet((0, 2))


def test_tree_counts_frozen():
    assert [len(trees_of_size(S01, 1, k)) for k in range(1, 9)] == [2] * 8
    assert len(trees_up_to(S02, 2, 5)) == 66
    assert [str(t) for t in trees_up_to(S01, 1, 3)] == ["x1", "a1", "(a2 x1)", "(a2 a1)", "(a2 (a2 x1))",
                                                         "(a2 (a2 a1))"]


def test_trees_below_depth_frozen():
    assert len(trees_below_depth(S01, 1, 3)) == 6
    assert all(tree_size(t) <= 3 for t in trees_below_depth(S01, 1, 3))


def test_parse_tree_and_check():
    t = parse_tree("(a2 (a1 x1) x2)")
    assert t == Node(2, (Node(1, (TVar(1),)), TVar(2)))
    check_tree(RankedAlphabet((1, 2)), 2, t)
    with pytest.raises(ArityMismatch):
        check_tree(RankedAlphabet((1, 1)), 2, t)


def test_canonical_order_is_by_size_first():
    ts = trees_up_to(S02, 1, 5)
    keys = [tree_key(t) for t in ts]
    assert keys == sorted(keys)
    assert [tree_size(t) for t in ts] == sorted(tree_size(t) for t in ts)


def test_endo_subst_frozen():
    e = EndoClone(2)
    assert [e.carrier_size(n) for n in range(3)] == [2, 4, 16]
    assert e.var(2, 1) == (0, 0, 1, 1)
    # x or y applied to (x, not x)
    assert e.subst(2, 1, (0, 1, 1, 1), [(0, 1), (1, 0)]) == (1, 1)


def test_action_clone_carrier_frozen():
    a = ActionClone(MonoidAction.flip())
    assert [a.carrier_size(n) for n in range(3)] == [2, 4, 6]
    assert a.carrier(1) == ((0, 0), (0, 1), (1, 0, 1), (1, 1, 1))


def test_morphism_counts_frozen():
    e = EndoClone(2)
    assert morphism_count(S01, e) == 8
    assert morphism_count(S11, e) == 16
    assert len(enumerate_morphisms(S11, e)) == 16


def test_image_clone_of_negation():
    img = image_clone(FreeMorphism(RankedAlphabet((1,)), EndoClone(2), [(1, 0)]))
    assert [img.carrier_size(n) for n in range(3)] == [0, 2, 4]
    assert eval_morphism(FreeMorphism(RankedAlphabet((1,)), EndoClone(2), [(1, 0)]), img.witness(1, (1, 0)), 1) == (1, 0)


def test_eval_morphism_frozen():
    p = FreeMorphism(S01, EndoClone(2), [(1,), (1, 0)])
    assert eval_morphism(p, parse_tree("(a2 (a2 x1))"), 1) == (0, 1)
    assert eval_morphism(p, parse_tree("(a2 a1)"), 1) == (0, 0)


@pytest.mark.parametrize("clone,bound", [
    (EndoClone(1), 2), (EndoClone(2), 2), (ActionClone(MonoidAction.flip()), 3), (terminal_clone(), 3),
    (delta(EndoClone(2)), 2), (ProductClone([EndoClone(2), ActionClone(MonoidAction.flip())]), 2),
])
def test_finite_clone_laws(clone, bound):
    r = check_clone_laws(clone, bound)
    assert r.passed, r.counterexample


def test_small_finite_clones_are_checked_exhaustively():
    for c in (EndoClone(2), EndoClone(1), ActionClone(MonoidAction.flip())):
        assert check_clone_laws(c, 2).exhaustive


def test_free_clone_laws_small():
    r = check_clone_laws(FreeClone(S01, 4), 2, samples=300)
    assert r.passed, r.counterexample


@pytest.mark.parametrize("mode", MutatedClone.MODES)
def test_mutations_are_detected(mode):
    r = check_clone_laws(MutatedClone(EndoClone(2), mode), 2)
    assert not r.passed
    assert r.counterexample is not None


def test_monoid_and_action_validation():
    assert FiniteMonoid.cyclic(3).violations() is None
    broken = MonoidAction(FiniteMonoid.cyclic(2), 2, ((0, 1), (0, 0)))
    with pytest.raises(ActionLawViolation):
        broken.validate()
    with pytest.raises(ActionLawViolation):
        ActionClone(broken)


def test_cayley_is_a_morphism_and_appvar_retracts():
    for c in (EndoClone(2), ActionClone(MonoidAction.flip())):
        for m in (0, 1):
            assert check_morphism(cay(c, m), 2).passed
        for n in range(3):
            phi = cay(c, n)
            for x in c.carrier(n):
                assert c.eq(n, appvar(c, n, phi.apply(n, x)), x)


def test_drop_isomorphism_roundtrip():
    fwd, bwd = endo_drop_iso(2)
    assert check_morphism(fwd, 2).passed and check_morphism(bwd, 2).passed
    for n in range(3):
        for f in fwd.source.carrier(n):
            assert bwd.apply(n, fwd.apply(n, f)) == f


def test_projection_and_identity_morphisms():
    prod = ProductClone([EndoClone(2), EndoClone(3)])
    assert check_morphism(projection_morphism(prod, 0), 1).passed
    assert check_morphism(identity_morphism(EndoClone(2)), 2).passed


def _tree_strategy(sigma, n, size):
    pool = trees_up_to(sigma, n, size)
    return st.sampled_from(pool)


@given(_tree_strategy(S02, 2, 5), st.lists(_tree_strategy(S02, 2, 3), min_size=2, max_size=2),
       st.lists(_tree_strategy(S02, 1, 3), min_size=2, max_size=2))
def test_free_substitution_is_associative(t, us, vs):
    lhs = tree_subst(tree_subst(t, us), vs)
    rhs = tree_subst(t, [tree_subst(u, vs) for u in us])
    assert lhs == rhs


@given(_tree_strategy(S02, 2, 6), st.lists(_tree_strategy(S02, 1, 4), min_size=2, max_size=2),
       st.integers(0, 7))
def test_free_morphisms_preserve_substitution(t, us, k):
    e = EndoClone(2)
    p = enumerate_morphisms(S02, e)[k % morphism_count(S02, e)]
    lhs = eval_morphism(p, tree_subst(t, us), 1)
    rhs = e.subst(2, 1, eval_morphism(p, t, 2), [eval_morphism(p, u, 1) for u in us])
    assert lhs == rhs


@given(_tree_strategy(S11, 2, 6))
def test_batch_evaluation_matches_single(t):
    ms = enumerate_morphisms(S11, EndoClone(2))
    batch = eval_tree_batch(S11, 2, assignment_tables(S11, ms), t, 2)
    for row, p in zip(batch, ms):
        assert tuple(int(v) for v in row) == tuple(eval_morphism(p, t, 2))


def test_freeness_assignment_determines_morphism():
    e = EndoClone(2)
    for p, p2 in itertools.combinations(enumerate_morphisms(S11, e), 2):
        assert any(eval_morphism(p, Node(j, (TVar(1),)), 1) != eval_morphism(p2, Node(j, (TVar(1),)), 1)
                   for j in (1, 2))
