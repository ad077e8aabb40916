import pytest
from hypothesis import given, strategies as st

from proclone.church import ChurchContext, encode
from proclone.clones import (ActionClone, EndoClone, MonoidAction, Node, RankedAlphabet, TVar, parse_tree,
                             trees_up_to)
from proclone.errors import MissingRosterMember
from proclone.finsem import denote_closed, sem_equal
from proclone.profinite import (CloneRoster, Inconclusive, ParametricFamily, ProfiniteTermApprox,
                                artificial_family, bidefinability_check, definability_search, family_of_tree,
                                family_subst, fixed_point_check, lift, mismatched_family, naturality_check,
                                non_parametric_family, parametric_to_tree, parametricity_check, restrict,
                                retraction_check)
from proclone.stlc import Arrow, Lam, O, Prod, Tup, App, Var, arrows, typecheck

S1 = RankedAlphabet((1,))
S01 = RankedAlphabet((0, 1))
STANDARD = CloneRoster.standard()


def test_roster_description_frozen():
    assert STANDARD.describe() == ["Endo(2)", "Endo(3)", "Act(M2,2)"]
    assert STANDARD.endo_sizes() == [2, 3]


def test_family_tables_frozen():
    u = family_of_tree(parse_tree("(a1 (a1 x1))"), S1, 1, CloneRoster([EndoClone(2)]))
    # f |-> f o f on the four unary maps of a two element set
    assert u.digest() == {"Endo(2)": [0, 1, 1, 3]}


@given(st.sampled_from(trees_up_to(S01, 1, 5)))
def test_tree_families_are_natural(t):
    u = family_of_tree(t, S01, 1, CloneRoster.default(S01))
    r = naturality_check(u)
    assert r.verdict == "pass", r.failures


def test_artificial_family_fails_naturality():
    roster = CloneRoster([EndoClone(2), EndoClone(3)])
    u = artificial_family(S1, 1, roster, Node(1, (TVar(1),)), TVar(1), "Endo(3)")
    r = naturality_check(u)
    assert r.verdict == "fail"
    assert r.failures


def test_off_roster_evaluation_needs_a_rule():
    u = family_of_tree(parse_tree("(a1 x1)"), S1, 1, STANDARD)
    u.rule = None
    with pytest.raises(MissingRosterMember):
        u.value(EndoClone(4), STANDARD.morphisms(S1, EndoClone(2))[0])


@pytest.mark.parametrize("t", trees_up_to(S1, 1, 5))
def test_definability_search_recovers_tree(t):
    u = family_of_tree(t, S1, 1, STANDARD)
    assert definability_search(u, 5) == t
    assert bidefinability_check(u, 5).verdict == "pass"


def test_definability_is_roster_relative():
    deep = Node(1, (TVar(1),))
    for _ in range(11):
        deep = Node(1, (deep,))
    found = definability_search(family_of_tree(deep, S1, 1, STANDARD), 8)
    assert found != deep
    assert family_of_tree(found, S1, 1, STANDARD).equal_on_roster(family_of_tree(deep, S1, 1, STANDARD))


def test_search_reports_inconclusive():
    odd = artificial_family(S1, 1, STANDARD, Node(1, (TVar(1),)), TVar(1), "Act(M2,2)")
    assert isinstance(definability_search(odd, 6), Inconclusive)


@given(st.sampled_from(trees_up_to(S01, 1, 4)))
def test_lift_restrict_roundtrip(t):
    cc = ChurchContext(S01, 1)
    u = family_of_tree(t, S01, 1, STANDARD)
    theta = restrict(u)
    for q, v in theta.components.items():
        assert sem_equal(cc.type, q, v, denote_closed(encode(cc, t), q))
    assert lift(theta, S01, 1, STANDARD).equal_on_roster(u)
    assert theta.bidefinability_check().verdict == "pass"


@given(st.sampled_from(trees_up_to(S01, 1, 4)))
def test_restrict_lift_roundtrip(t):
    cc = ChurchContext(S01, 1)
    m = encode(cc, t)
    theta = ProfiniteTermApprox(cc.type, {q: denote_closed(m, q) for q in (2, 3)}, m)
    back = restrict(lift(theta, S01, 1, STANDARD))
    assert all(sem_equal(cc.type, q, back.components[q], theta.components[q]) for q in (2, 3))


def test_family_substitution_matches_tree_substitution():
    roster = CloneRoster([EndoClone(2), ActionClone(MonoidAction.flip())])
    h, a = parse_tree("(a2 x1)"), parse_tree("(a2 (a2 a1))")
    fam = family_subst(family_of_tree(h, S01, 1, roster), [family_of_tree(a, S01, 1, roster)], 1)
    assert fam.equal_on_roster(family_of_tree(parse_tree("(a2 (a2 (a2 a1)))"), S01, 1, roster))


@pytest.mark.parametrize("n", [0, 1, 2])
def test_retraction_on_roster(n):
    for c in CloneRoster.default(S01).clones:
        assert retraction_check(c, n).verdict == "pass"


@pytest.mark.parametrize("t", trees_up_to(S01, 0, 4))
def test_fixed_point_equation_holds_for_trees(t):
    rho = ParametricFamily.of_tree(ChurchContext(S01, 0), t)
    r = fixed_point_check(rho, S01, 2)
    assert r.verdict == "pass"
    assert r.notes == ["|Q|=2, |Q*|=256"]


def test_fixed_point_equation_rejects_non_parametric():
    cc = ChurchContext(S01, 0)
    rho = non_parametric_family(cc, parse_tree("(a2 (a2 a1))"), parse_tree("(a2 a1)"), 8)
    r = fixed_point_check(rho, S01, 2)
    assert r.verdict == "fail"
    assert r.failures


@given(st.sampled_from(trees_up_to(S01, 1, 4)))
def test_tree_families_are_parametric(t):
    rho = ParametricFamily.of_tree(ChurchContext(S01, 1), t)
    r = parametricity_check(rho)
    assert r.verdict == "pass"
    assert r.checked["3x3"] == 512
    assert parametric_to_tree(rho, S01, 5) == t


def test_mismatched_family_is_not_parametric():
    cc = ChurchContext(S1, 1)
    rho = mismatched_family(cc, {2: parse_tree("(a1 x1)"), 3: parse_tree("(a1 (a1 x1))")})
    r = parametricity_check(rho)
    assert r.verdict == "fail"
    assert r.failures[0][:2] == (2, 3)


def test_product_codomain_splits():
    cc = ChurchContext(S1, 1)
    t1, t2 = parse_tree("(a1 x1)"), parse_tree("(a1 (a1 x1))")
    body = Tup((App(encode(cc, t1), Var(0)), App(encode(cc, t2), Var(0))))
    m = Lam(cc.sigma_type, body)
    ty = typecheck((), m)
    assert ty == Arrow(cc.sigma_type, Prod((arrows([O], O), arrows([O], O))))
    found = parametric_to_tree(ParametricFamily.of_term(m, ty), S1, 4)
    assert found == (t1, t2)
