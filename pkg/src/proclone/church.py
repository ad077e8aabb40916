"""Church encoding of trees as closed terms of type ``S => o^n => o``.

``S`` is the product ``(o^{n_1} => o) x ... x (o^{n_l} => o)`` of an alphabet.
Trees encode with their root outermost: ``b(a(x1))`` becomes
``\\s. \\x. s.2 (s.1 x)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .clones import (EndoClone, FreeMorphism, Node, RankedAlphabet, TVar, Tree, check_tree, enumerate_morphisms,
                     eval_morphism, trees_up_to)
from .errors import ArityMismatch, NotChurchTyped
from .finsem import DEFAULT_GUARD, curry_table, denote_closed, interp_type, uncurry_table
from .stlc import (Arrow, Lam, O, Prod, Proj, Term, Var, App, apps, arrows, normalize, power, typecheck)


def sigma_type(sigma: RankedAlphabet) -> Prod:
    return Prod(tuple(arrows([O] * a, O) for a in sigma.arities))


@dataclass(frozen=True)
class ChurchContext:
    sigma: RankedAlphabet
    n: int

    @cached_property
    def sigma_type(self) -> Prod:
        return sigma_type(self.sigma)

    @cached_property
    def body_type(self):
        return arrows([O] * self.n, O)

    @cached_property
    def type(self) -> Arrow:
        return Arrow(self.sigma_type, self.body_type)


def encode(cc: ChurchContext, t: Tree) -> Term:
    check_tree(cc.sigma, cc.n, t)
    n = cc.n

    def fold(u):
        if isinstance(u, TVar):
            return Var(n - u.index)
        return apps(Proj(Var(n), u.letter), *(fold(c) for c in u.children))

    body = fold(t)
    for _ in range(n):
        body = Lam(O, body)
    return Lam(cc.sigma_type, body)


def decode(cc: ChurchContext, m: Term) -> Tree:
    ty = typecheck((), m)
    if ty != cc.type:
        raise NotChurchTyped(f"expected {cc.type}, found {ty}")
    nf = normalize((), m)
    body = nf.body
    for _ in range(cc.n):
        body = body.body
    n = cc.n

    def read(u):
        args = []
        while isinstance(u, App):
            args.append(u.arg)
            u = u.fn
        args.reverse()
        if isinstance(u, Var):
            assert not args and u.index < n
            return TVar(n - u.index)
        assert isinstance(u, Proj) and u.subject == Var(n)
        assert len(args) == cc.sigma.arity(u.index)
        return Node(u.index, tuple(read(a) for a in args))

    return read(body)


def generator(sigma: RankedAlphabet, i: int) -> Term:
    """``\\t:(S=>o)^{n_i}. \\s:S. s.i (t.1 s) ... (t.n_i s)`` in canonical form."""
    if not 1 <= i <= len(sigma):
        raise IndexError(f"letter {i} outside 1..{len(sigma)}")
    st = sigma_type(sigma)
    k = sigma.arity(i)
    body = apps(Proj(Var(0), i), *(App(Proj(Var(1), j), Var(0)) for j in range(1, k + 1)))
    term = Lam(power(Arrow(st, O), k), Lam(st, body))
    return normalize((), term)


def generator_type(sigma: RankedAlphabet, i: int):
    st = sigma_type(sigma)
    return Arrow(power(Arrow(st, O), sigma.arity(i)), Arrow(st, O))


def kleisli_subst(cc_m: ChurchContext, head: Term, args: list, n: int) -> Term:
    """Term-level substitution ``\\s. \\x. M s (N_1 s x) ... (N_m s x)``, normalized."""
    if len(args) != cc_m.n:
        raise ArityMismatch(f"head has {cc_m.n} variables, got {len(args)} arguments")
    sig = Var(n)
    xs = [Var(n - i) for i in range(1, n + 1)]
    body = apps(head, sig, *(apps(a, sig, *xs) for a in args))
    term = body
    for _ in range(n):
        term = Lam(O, term)
    return normalize((), Lam(cc_m.sigma_type, term))


# ---------------------------------------------------------------------------
# Letter assignments into Endo(Q) versus points of [[S]]_Q


def to_semantic(p: FreeMorphism, q: int, guard: int = DEFAULT_GUARD) -> tuple:
    return tuple(curry_table(q, a, x, guard) for a, x in zip(p.sigma.arities, p.assignment))


def from_semantic(sigma: RankedAlphabet, endo: EndoClone, point) -> FreeMorphism:
    return FreeMorphism(sigma, endo, [uncurry_table(endo.q, a, v) for a, v in zip(sigma.arities, point)])


@dataclass
class SubstitutionBijection:
    sigma: RankedAlphabet
    q: int
    guard: int = DEFAULT_GUARD

    def __post_init__(self):
        self.endo = EndoClone(self.q, self.guard)
        self.domain = interp_type(sigma_type(self.sigma), self.q, self.guard)

    def forward(self, p: FreeMorphism):
        return to_semantic(p, self.q, self.guard)

    def backward(self, point) -> FreeMorphism:
        return from_semantic(self.sigma, self.endo, point)

    def check(self) -> dict:
        """Both directions are mutually inverse and the image is all of ``[[S]]_Q``."""
        morphisms = enumerate_morphisms(self.sigma, self.endo)
        indices = set()
        for p in morphisms:
            point = self.forward(p)
            indices.add(self.domain.index(point))
            if self.backward(point).key() != p.key():
                return {"passed": False, "witness": str(p.assignment)}
        for k in range(self.domain.cardinality):
            point = self.domain.element(k)
            if self.domain.index(self.forward(self.backward(point))) != k:
                return {"passed": False, "witness": k}
        ok = len(indices) == len(morphisms) == self.domain.cardinality
        return {"passed": ok, "morphisms": len(morphisms), "points": self.domain.cardinality}


def substitution_bijection(sigma: RankedAlphabet, q: int, guard: int = DEFAULT_GUARD) -> SubstitutionBijection:
    return SubstitutionBijection(sigma, q, guard)


def semantic_fold(cc: ChurchContext, t: Tree, point, q: int, guard: int = DEFAULT_GUARD) -> tuple:
    """Row-major table over ``Q^n`` of ``[[encode t]]_Q`` at ``point``."""
    v = denote_closed(encode(cc, t), q, guard)(point)
    return uncurry_table(q, cc.n, v)


def semantic_fold_matches(cc: ChurchContext, t: Tree, p: FreeMorphism, guard: int = DEFAULT_GUARD) -> bool:
    q = p.target.q
    return tuple(eval_morphism(p, t, cc.n)) == semantic_fold(cc, t, to_semantic(p, q, guard), q, guard)


def church_trees(cc: ChurchContext, max_size: int):
    return trees_up_to(cc.sigma, cc.n, max_size)


def roundtrip_all(cc: ChurchContext, max_size: int) -> tuple:
    """``(checked, first failure or None)`` for ``decode . encode`` on every small tree."""
    count = 0
    for t in church_trees(cc, max_size):
        count += 1
        if decode(cc, encode(cc, t)) != t:
            return count, t
    return count, None


__all__ = [
    "ChurchContext", "encode", "decode", "generator", "generator_type", "kleisli_subst", "sigma_type",
    "to_semantic", "from_semantic", "substitution_bijection", "SubstitutionBijection",
    "semantic_fold", "semantic_fold_matches", "roundtrip_all",
]
