import pytest
from hypothesis import given, strategies as st

from conftest import closed_term
from proclone.errors import ParseError, ScopeError, TypeCheckError
from proclone.stlc import (App, Arrow, Lam, O, Prod, Proj, Tup, UNIT, UNIT_VALUE, Var, alpha_eq, arrows,
                           beta_eta_equal, normalize, parse_term, parse_type, power, reduce_step, redexes, show,
                           term_size, type_depth, typecheck)

I = Lam(O, Var(0))
K = Lam(O, Lam(O, Var(1)))


def eta_long(t, ty, ctx=()):
    """Reference eta expansion of a beta normal term, driven by its type."""
    if isinstance(ty, Arrow):
        if isinstance(t, Lam):
            return Lam(t.ty, eta_long(t.body, ty.cod, ctx + (ty.dom,)))
        from proclone.stlc import shift
        return Lam(ty.dom, eta_long(App(shift(t, 1), eta_long(Var(0), ty.dom, ctx + (ty.dom,))), ty.cod,
                                    ctx + (ty.dom,)))
    if isinstance(ty, Prod):
        if isinstance(t, Tup):
            return Tup(tuple(eta_long(u, a, ctx) for u, a in zip(t.items, ty.items)))
        return Tup(tuple(eta_long(Proj(t, i + 1), a, ctx) for i, a in enumerate(ty.items)))
    return spine_long(t, ctx)


def spine_long(t, ctx):
    if isinstance(t, App):
        return App(spine_long(t.fn, ctx), eta_long(t.arg, typecheck(ctx, t.arg), ctx))
    if isinstance(t, Proj):
        return Proj(spine_long(t.subject, ctx), t.index)
    return t


def reference_normal_form(ctx, t):
    while (r := reduce_step(t)) is not None:
        t = r
    long = eta_long(t, typecheck(ctx, t), tuple(ctx))
    while (r := reduce_step(long)) is not None:
        long = r
    return long


def test_types_print_and_parse():
    for src, ty in [("o", O), ("o -> o -> o", arrows([O, O], O)), ("(o -> o) -> o", Arrow(Arrow(O, O), O)),
                    ("(o * o)", Prod((O, O))), ("1", UNIT), ("((o -> o) *)", Prod((Arrow(O, O),)))]:
        assert parse_type(src) == ty
        assert parse_type(str(ty)) == ty


def test_power_and_depth():
    assert power(O, 3) == Prod((O, O, O))
    assert type_depth(O) == 0
    assert type_depth(Arrow(Arrow(O, O), O)) == 2


def test_typecheck_basics():
    assert typecheck((), I) == Arrow(O, O)
    assert typecheck((), K) == arrows([O, O], O)
    assert typecheck((), UNIT_VALUE) == UNIT
    assert typecheck((O,), Var(0)) == O
    assert typecheck((), parse_term("\\p:(o * o). p.2")) == Arrow(Prod((O, O)), O)


def test_typecheck_errors():
    with pytest.raises(TypeCheckError):
        typecheck((), App(I, I))
    with pytest.raises(ScopeError):
        typecheck((), Var(0))
    with pytest.raises(TypeCheckError):
        typecheck((), Lam(Prod((O,)), Proj(Var(0), 2)))


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as exc:
        parse_term("\\x:o. (x")
    assert exc.value.line == 1
    with pytest.raises(ParseError) as exc:
        parse_term("\\x:o. y")
    assert exc.value.column == 7


def test_normal_forms_frozen():
    # oracle values computed once and frozen
    assert normalize((), App(I, Var(0)) if False else App(Lam(Arrow(O, O), Var(0)), I)) == I
    assert normalize((), parse_term("\\f:o -> o. f")) == parse_term("\\f:o -> o. \\x:o. f x")
    assert normalize((), parse_term("\\p:(o * o). p")) == parse_term("\\p:(o * o). <p.1, p.2>")
    assert normalize((), parse_term("\\u:1. u")) == parse_term("\\u:1. ()")
    assert show(normalize((), parse_term("(\\k:o -> o -> o. \\x:o. k x x) (\\a:o. \\b:o. b)"))) == "\\x0:o. x0"


def test_alpha_equivalence_is_structural():
    assert alpha_eq(parse_term("\\x:o. x"), parse_term("\\y:o. y"))
    assert not alpha_eq(K, Lam(O, Lam(O, Var(0))))


def test_show_parse_roundtrip_on_examples():
    for src in ["\\x:o. x", "\\f:(o -> o). \\x:o. f (f x)", "\\p:(o * (o -> o)). p.2 p.1", "()"]:
        t = parse_term(src)
        assert parse_term(show(t)) == t


@given(st.integers(0, 10_000))
def test_normalize_agrees_with_reduction_and_expansion(seed):
    t, ty = closed_term(seed)
    nf = normalize((), t)
    assert typecheck((), nf) == ty
    assert nf == reference_normal_form((), t)


@given(st.integers(0, 10_000))
def test_normal_forms_are_fixed_points(seed):
    t, _ = closed_term(seed)
    nf = normalize((), t)
    assert normalize((), nf) == nf
    assert redexes(nf) == []


@given(st.integers(0, 10_000))
def test_one_step_reduction_preserves_type_and_normal_form(seed):
    t, ty = closed_term(seed)
    nf = normalize((), t)
    for r in redexes(t):
        assert typecheck((), r) == ty
        assert normalize((), r) == nf
        assert beta_eta_equal((), r, t)


@given(st.integers(0, 10_000))
def test_show_parse_roundtrip(seed):
    t, _ = closed_term(seed)
    assert parse_term(show(t)) == t
    assert term_size(t) >= 1
