import pytest
from hypothesis import given, strategies as st

from proclone.church import (ChurchContext, decode, encode, from_semantic, generator, kleisli_subst,
                             roundtrip_all, semantic_fold_matches, substitution_bijection, to_semantic)
from proclone.clones import EndoClone, Node, RankedAlphabet, TVar, enumerate_morphisms, parse_tree, tree_subst, trees_up_to
from proclone.errors import NotChurchTyped
from proclone.stlc import App, Lam, Tup, Var, normalize, parse_term, show, typecheck

S01 = RankedAlphabet((0, 1))
S11 = RankedAlphabet((1, 1))
S02 = RankedAlphabet((0, 2))


def test_encoding_frozen():
    cc = ChurchContext(S01, 1)
    assert str(cc.type) == "(o * (o -> o)) -> o -> o"
    assert show(encode(cc, parse_tree("(a2 (a2 x1))"))) == "\\x0:(o * (o -> o)). \\x1:o. x0.2 (x0.2 x1)"
    assert show(encode(ChurchContext(S01, 0), parse_tree("(a2 a1)"))) == "\\x0:(o * (o -> o)). x0.2 x0.1"


def test_encodings_are_normal_and_typed():
    for n in range(3):
        cc = ChurchContext(S02, n)
        for t in trees_up_to(S02, n, 5):
            m = encode(cc, t)
            assert typecheck((), m) == cc.type
            assert normalize((), m) == m


def test_decode_rejects_wrong_type():
    with pytest.raises(NotChurchTyped):
        decode(ChurchContext(S01, 1), parse_term("\\x:o. x"))


def test_decode_normalizes_first():
    cc = ChurchContext(S01, 0)
    m = parse_term("(\\g:(o * (o -> o)) -> o. g) (\\s:(o * (o -> o)). s.2 (s.2 s.1))")
    assert str(decode(cc, m)) == "(a2 (a2 a1))"


@pytest.mark.parametrize("sigma", [S01, S11, S02])
def test_roundtrip_counts_frozen(sigma):
    counts = [roundtrip_all(ChurchContext(sigma, n), 6) for n in range(3)]
    assert all(bad is None for _, bad in counts)


def test_roundtrip_count_for_corpus_frozen():
    total = sum(roundtrip_all(ChurchContext(s, n), 8)[0] for s in (S01, S11, S02) for n in range(4))
    assert total == 3620


def test_generators_build_nodes():
    cc = ChurchContext(S02, 0)
    kids = [parse_tree("a1"), parse_tree("(a2 a1 a1)")]
    g = generator(S02, 2)
    term = Lam(cc.sigma_type, App(App(g, Tup(tuple(encode(cc, k) for k in kids))), Var(0)))
    assert normalize((), term) == encode(cc, Node(2, tuple(kids)))


def _pair(sigma, m, n, size):
    return st.tuples(st.sampled_from(trees_up_to(sigma, m, size)),
                     st.lists(st.sampled_from(trees_up_to(sigma, n, size)), min_size=m, max_size=m))


@given(_pair(S02, 2, 1, 5))
def test_encode_is_substitution_homomorphism(pair):
    t, us = pair
    cm, cn = ChurchContext(S02, 2), ChurchContext(S02, 1)
    assert encode(cn, tree_subst(t, us)) == kleisli_subst(cm, encode(cm, t), [encode(cn, u) for u in us], 1)


@given(st.sampled_from(trees_up_to(S11, 2, 7)))
def test_decode_encode_identity(t):
    cc = ChurchContext(S11, 2)
    assert decode(cc, encode(cc, t)) == t


def test_substitution_bijection_frozen():
    r = substitution_bijection(S11, 2).check()
    assert r == {"passed": True, "morphisms": 16, "points": 16}


def test_semantic_points_roundtrip():
    e = EndoClone(2)
    for p in enumerate_morphisms(S01, e):
        assert from_semantic(S01, e, to_semantic(p, 2)).key() == p.key()


@given(st.sampled_from(trees_up_to(S11, 1, 5)), st.integers(0, 15))
def test_semantic_fold_matches_evaluation(t, k):
    p = enumerate_morphisms(S11, EndoClone(2))[k]
    assert semantic_fold_matches(ChurchContext(S11, 1), t, p)


def test_semantic_fold_two_variables():
    cc = ChurchContext(S11, 2)
    ms = enumerate_morphisms(S11, EndoClone(2))
    t = Node(1, (Node(2, (TVar(2),)),))
    assert all(semantic_fold_matches(cc, t, p) for p in ms)
