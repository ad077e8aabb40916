"""Finite-roster approximations of profinite trees, profinite terms and
parametric families, with the checks relating them.

Every verdict here is relative to an explicit roster of locally finite
clones (for natural families) or of base-set sizes (for term families).
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .church import ChurchContext, encode, from_semantic, generator, sigma_type
from .clones import (ActionClone, appvar, Clone, CayleyMorphism, DEFAULT_GUARD, EndoClone, FreeMorphism, ImageClone,
                     LazyOp, MonoidAction, ProductClone, RankedAlphabet, Tree, assignment_tables, compose_free,
                     endo_drop_iso, enumerate_morphisms, eval_morphism, eval_tree_batch, identity_morphism,
                     inclusion_morphism, morphism_count, projection_morphism, tree_subst, trees_up_to)
from .errors import GuardExceeded, MissingRosterMember
from .finsem import (SemFunction, curry_table, denote_closed, enumerate_relations, interp_type, rel_member,
                     sem_equal, RELATION_CUTOFF)
from .stlc import Arrow, O, Prod, Term, arrows


@dataclass(frozen=True)
class Inconclusive:
    bound: int

    def __str__(self):
        return f"inconclusive(bound={self.bound})"


# ---------------------------------------------------------------------------
# Rosters and natural families


class CloneRoster:
    """An explicit finite list of locally finite clones standing in for all of them."""

    def __init__(self, clones: Sequence[Clone]):
        self.clones = tuple(clones)
        names = [c.name for c in self.clones]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate roster members: {names}")
        self._morphisms = {}

    @classmethod
    def default(cls, sigma: RankedAlphabet, guard: int = DEFAULT_GUARD) -> "CloneRoster":
        endos = [EndoClone(q, guard) for q in (1, 2, 3)]
        img = ImageClone(FreeMorphism(sigma, endos[1], [_default_letter(a) for a in sigma.arities]), 3, guard)
        return cls(endos + [ActionClone(MonoidAction.flip(), guard), img])

    @classmethod
    def standard(cls, guard: int = DEFAULT_GUARD) -> "CloneRoster":
        """Endo(2), Endo(3) and the Z/2 action clone."""
        return cls([EndoClone(2, guard), EndoClone(3, guard), ActionClone(MonoidAction.flip(), guard)])

    def describe(self) -> list:
        return [c.name for c in self.clones]

    def by_name(self, name: str) -> Clone:
        for c in self.clones:
            if c.name == name:
                return c
        raise MissingRosterMember(name)

    def endo(self, q: int) -> EndoClone | None:
        for c in self.clones:
            if isinstance(c, EndoClone) and c.q == q:
                return c
        return None

    def endo_sizes(self) -> list:
        return [c.q for c in self.clones if isinstance(c, EndoClone)]

    def morphisms(self, sigma: RankedAlphabet, c: Clone) -> list:
        key = (sigma, c.name)
        if key not in self._morphisms:
            ms = enumerate_morphisms(sigma, c)
            self._morphisms[key] = (ms, {m.key(): k for k, m in enumerate(ms)})
        return self._morphisms[key][0]

    def morphism_position(self, sigma: RankedAlphabet, p: FreeMorphism) -> int:
        self.morphisms(sigma, p.target)
        return self._morphisms[(sigma, p.target.name)][1][p.key()]

    def __contains__(self, c):
        return any(m is c or m.name == c.name for m in self.clones)


def _default_letter(arity):
    """Negation of the first argument, or the constant 1 for constants."""
    if arity == 0:
        return (1,)
    return tuple(1 - pt[0] for pt in itertools.product(range(2), repeat=arity))


@dataclass
class NaturalFamily:
    """Tables ``u_C : Clone(F sigma, C) -> C_n`` for the roster, plus an optional rule off it."""

    sigma: RankedAlphabet
    n: int
    roster: CloneRoster
    tables: dict
    rule: Callable | None = None
    witness: Tree | None = None

    def value(self, c: Clone, p: FreeMorphism):
        """``u_C(p)``; raises :class:`MissingRosterMember` when it cannot be evaluated."""
        if c.name in self.tables and c in self.roster:
            return self.tables[c.name][self.roster.morphism_position(self.sigma, p)]
        if self.rule is not None:
            return self.rule(c, p)
        raise MissingRosterMember(f"{c.name} is not on the roster and the family has no rule")

    def equal_on_roster(self, other: "NaturalFamily") -> bool:
        for c in self.roster.clones:
            a, b = self.tables[c.name], other.tables[c.name]
            if len(a) != len(b) or not all(c.eq(self.n, x, y) for x, y in zip(a, b)):
                return False
        return True

    def digest(self) -> dict:
        out = {}
        for c in self.roster.clones:
            out[c.name] = [c.index(self.n, x) if c.enumerable(self.n) else str(x) for x in self.tables[c.name]]
        return out


def tree_tables(t: Tree, sigma: RankedAlphabet, n: int, roster: CloneRoster) -> dict:
    tables = {}
    for c in roster.clones:
        ms = roster.morphisms(sigma, c)
        if isinstance(c, EndoClone) and ms:
            arr = eval_tree_batch(sigma, c.q, assignment_tables(sigma, ms), t, n)
            tables[c.name] = tuple(tuple(row) for row in arr.tolist())
        else:
            tables[c.name] = tuple(eval_morphism(p, t, n) for p in ms)
    return tables


def family_of_tree(t: Tree, sigma: RankedAlphabet, n: int, roster: CloneRoster) -> NaturalFamily:
    """``u_C(p) = p(t)``."""
    return NaturalFamily(sigma, n, roster, tree_tables(t, sigma, n, roster),
                         rule=lambda c, p: eval_morphism(p, t, n), witness=t)


def family_subst(u: NaturalFamily, vs: Sequence[NaturalFamily], n: int) -> NaturalFamily:
    """Substitution of families: ``(u[v])_C(p) = s(u_C(p); v_1,C(p), ...)``."""
    roster = u.roster
    tables = {}
    for c in roster.clones:
        rows = []
        for k in range(len(roster.morphisms(u.sigma, c))):
            rows.append(c.subst(u.n, n, u.tables[c.name][k], [v.tables[c.name][k] for v in vs]))
        tables[c.name] = tuple(rows)
    witness = None
    if u.witness is not None and all(v.witness is not None for v in vs):
        witness = tree_subst(u.witness, [v.witness for v in vs])
    rule = None
    if u.rule is not None and all(v.rule is not None for v in vs):
        rule = lambda c, p: c.subst(u.n, n, u.rule(c, p), [v.rule(c, p) for v in vs])
    return NaturalFamily(u.sigma, n, roster, tables, rule, witness)


# ---------------------------------------------------------------------------
# Naturality


@dataclass
class CheckReport:
    name: str
    verdict: str = "pass"
    checked: dict = field(default_factory=dict)
    uncovered: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def fail(self, witness):
        self.verdict = "fail"
        self.failures.append(witness)

    def count(self, key, k=1):
        self.checked[key] = self.checked.get(key, 0) + k

    def as_dict(self):
        return {
            "name": self.name,
            "verdict": self.verdict,
            "checked": dict(sorted(self.checked.items())),
            "uncovered": sorted(self.uncovered),
            "failures": [str(f) for f in self.failures],
            "notes": list(self.notes),
        }


def generated_morphisms(roster: CloneRoster, cay_arities=(0, 1), max_cay_size: int = 64) -> list:
    """The recipe: identities, product projections, image inclusions, Cayley maps and the drop isomorphism."""
    out = []
    for c in roster.clones:
        out.append(identity_morphism(c))
    for a, b in itertools.combinations_with_replacement(roster.clones, 2):
        prod = ProductClone([a, b])
        out.append(projection_morphism(prod, 0))
        out.append(projection_morphism(prod, 1))
    for c in roster.clones:
        if isinstance(c, ImageClone):
            out.append(inclusion_morphism(c))
    for c in roster.clones:
        for m in cay_arities:
            size = c.carrier_size(m)
            if size is not None and 0 < size <= max_cay_size:
                out.append(CayleyMorphism(c, m))
    for c in roster.clones:
        if isinstance(c, EndoClone):
            out.append(endo_drop_iso(c.q, c.guard)[0])
    return out


def naturality_check(u: NaturalFamily, max_points: int = 512, seed: int = 0,
                     morphisms: Sequence | None = None) -> CheckReport:
    """Check ``phi_n(u_C(p)) = u_C'(phi . p)`` for every generated ``phi : C -> C'``."""
    rng = random.Random(seed)
    report = CheckReport("naturality")
    report.notes.append("roster-relative: " + ", ".join(u.roster.describe()))
    for phi in (morphisms if morphisms is not None else generated_morphisms(u.roster)):
        src, tgt = phi.source, phi.target
        count = morphism_count(u.sigma, src)
        if count is None or count > src.guard:
            report.uncovered.append(f"{phi.name} (source morphisms not enumerable)")
            continue
        if src in u.roster:
            points = u.roster.morphisms(u.sigma, src)
        else:
            points = enumerate_morphisms(u.sigma, src)
        if len(points) > max_points:
            points = [points[k] for k in sorted(rng.sample(range(len(points)), max_points))]
            report.notes.append(f"{phi.name}: sampled {max_points} of {count} points")
        try:
            for p in points:
                lhs = phi.apply(u.n, u.value(src, p))
                rhs = u.value(tgt, compose_free(p, phi))
                report.count(phi.name)
                if not tgt.eq(u.n, lhs, rhs):
                    report.fail((phi.name, p.assignment, lhs, rhs))
                    break
        except MissingRosterMember:
            report.uncovered.append(f"{phi.name} (family not evaluable off the roster)")
        except GuardExceeded as exc:
            report.uncovered.append(f"{phi.name} ({exc})")
    return report


# ---------------------------------------------------------------------------
# Definability


def definability_search(u: NaturalFamily, size_bound: int) -> Tree | Inconclusive:
    """Least tree (in the canonical order) defining ``u`` on the whole roster."""
    targets = {}
    for c in u.roster.clones:
        if isinstance(c, EndoClone):
            targets[c.name] = np.array(u.tables[c.name], dtype=np.int64).reshape(len(u.tables[c.name]), -1)
    for t in trees_up_to(u.sigma, u.n, size_bound):
        if _defines(t, u, targets):
            return t
    return Inconclusive(size_bound)


def _defines(t, u, targets):
    roster = u.roster
    # cheap Endo members first
    for c in sorted(roster.clones, key=lambda c: not isinstance(c, EndoClone)):
        ms = roster.morphisms(u.sigma, c)
        if not ms:
            continue
        if c.name in targets:
            got = eval_tree_batch(u.sigma, c.q, _tables_for(roster, u.sigma, c), t, u.n)
            if not np.array_equal(got, targets[c.name]):
                return False
        else:
            table = u.tables[c.name]
            if not all(c.eq(u.n, eval_morphism(p, t, u.n), x) for p, x in zip(ms, table)):
                return False
    return True


_ASSIGNMENT_CACHE = {}


def _tables_for(roster, sigma, c):
    key = (id(roster), sigma, c.name)
    if key not in _ASSIGNMENT_CACHE:
        _ASSIGNMENT_CACHE[key] = assignment_tables(sigma, roster.morphisms(sigma, c))
    return _ASSIGNMENT_CACHE[key]


def bidefinability_check(u: NaturalFamily, size_bound: int) -> CheckReport:
    """One tree defines ``u`` on every pair of roster clones simultaneously."""
    report = CheckReport("bidefinability")
    t = definability_search(u, size_bound)
    if isinstance(t, Inconclusive):
        report.verdict = "inconclusive"
        report.notes.append(str(t))
        return report
    report.notes.append(f"witness {t}")
    for a, b in itertools.combinations(u.roster.clones, 2):
        report.count(f"{a.name}/{b.name}")
    return report


# ---------------------------------------------------------------------------
# Profinite terms


@dataclass
class ProfiniteTermApprox:
    """Components ``theta_Q`` on roster sizes and, when known, a defining term."""

    ty: object
    components: dict
    witness: Term | None = None
    guard: int = DEFAULT_GUARD

    def component(self, q: int):
        if q in self.components:
            return self.components[q]
        if self.witness is None:
            raise MissingRosterMember(f"no component at {q} and no defining term")
        return denote_closed(self.witness, q, self.guard)

    def bidefinability_check(self) -> CheckReport:
        report = CheckReport("term bidefinability")
        if self.witness is None:
            report.verdict = "inconclusive"
            report.notes.append("no defining term known")
            return report
        for q, v in sorted(self.components.items()):
            report.count(str(q))
            if not sem_equal(self.ty, q, v, denote_closed(self.witness, q, self.guard), self.guard):
                report.fail(("component", q))
        return report


def restrict(u: NaturalFamily, size_bound: int = 6) -> ProfiniteTermApprox:
    """``theta_Q = u_{Endo(Q)}`` transported to ``[[S => o^n => o]]_Q``."""
    cc = ChurchContext(u.sigma, u.n)
    sizes = u.roster.endo_sizes()
    if not sizes:
        raise MissingRosterMember("the roster has no Endo(Q) member")
    comps = {}
    for q in sizes:
        comps[q] = _restrict_component(u, cc, u.roster.endo(q))
    witness_tree = u.witness
    if witness_tree is None:
        found = definability_search(u, size_bound)
        witness_tree = None if isinstance(found, Inconclusive) else found
    witness = encode(cc, witness_tree) if witness_tree is not None else None
    return ProfiniteTermApprox(cc.type, comps, witness, u.roster.clones[0].guard)


def _restrict_component(u, cc, endo):
    dom = interp_type(cc.sigma_type, endo.q, endo.guard)
    cod = interp_type(cc.body_type, endo.q, endo.guard)

    def rule(point):
        p = from_semantic(u.sigma, endo, point)
        return curry_table(endo.q, u.n, u.value(endo, p), endo.guard)

    return SemFunction(dom, cod, rule)


def curry_op(k: int, arity: int, op, guard: int = DEFAULT_GUARD):
    """Curried element of ``[[o^arity => o]]_k`` from a table or :class:`LazyOp`."""
    if not isinstance(op, LazyOp):
        return curry_table(k, arity, op, guard)
    if arity == 0:
        return op()

    def build(prefix):
        depth = len(prefix)
        dom = interp_type(O, k, guard)
        cod = interp_type(arrows([O] * (arity - depth - 1), O), k, guard)
        if depth == arity - 1:
            return SemFunction(dom, cod, lambda x: op(*prefix, x))
        return SemFunction(dom, cod, lambda x: build(prefix + (x,)))

    return build(())


def lift(theta: ProfiniteTermApprox, sigma: RankedAlphabet, n: int, roster: CloneRoster) -> NaturalFamily:
    """``u_C(p) = appvar(theta_{|C_n|}(cay^n . p))``."""
    tables = {}
    for c in roster.clones:
        tables[c.name] = tuple(_lift_value(theta, sigma, n, c, p) for p in roster.morphisms(sigma, c))

    def rule(c, p):
        return _lift_value(theta, sigma, n, c, p)

    return NaturalFamily(sigma, n, roster, tables, rule)


def _lift_value(theta, sigma, n, c, p):
    k = c.carrier_size(n)
    if k is None or k > c.guard:
        raise GuardExceeded(f"lift through {c.name}_{n}", k, c.guard)
    cay = CayleyMorphism(c, n)
    point = tuple(curry_op(k, a, cay.apply(a, x), c.guard) for a, x in zip(sigma.arities, p.assignment))
    v = theta.component(k)(point)
    for i in range(1, n + 1):
        v = v(c.index(n, c.var(n, i)))
    return c.carrier(n)[v]


def retraction_check(c: Clone, n: int) -> CheckReport:
    """``appvar . (cay^n . -)`` is the identity on ``Clone(F y_n, C) = C_n``."""
    report = CheckReport(f"retraction {c.name} n={n}")
    cay = CayleyMorphism(c, n)
    for x in c.carrier(n):
        report.count(c.name)
        if not c.eq(n, appvar(c, n, cay.apply(n, x)), x):
            report.fail((c.name, n, x))
    return report


def semantic_kleisli(q: int, sigma: RankedAlphabet, head, args: Sequence, n: int, guard: int = DEFAULT_GUARD):
    """``sigma |-> head(sigma)(a_1(sigma), ..., a_m(sigma))`` at base ``q``."""
    st = sigma_type(sigma)
    dom = interp_type(st, q, guard)
    cod = interp_type(arrows([O] * n, O), q, guard)
    def rule(point):
        hs = [a(point) for a in args]
        h = head(point)
        return curry_table(q, n, tuple(
            _apply_curried(h, [_apply_curried(g, list(pt)) for g in hs]) for pt in itertools.product(range(q), repeat=n)
        ), guard)

    return SemFunction(dom, cod, rule)


def _apply_curried(v, args):
    for a in args:
        v = v(a)
    return v


# ---------------------------------------------------------------------------
# Parametric families


@dataclass
class ParametricFamily:
    ty: object
    rule: Callable
    roster: tuple = (1, 2, 3)
    label: str = "family"

    def at(self, q: int):
        return self.rule(q)

    @classmethod
    def of_term(cls, m: Term, ty, roster=(1, 2, 3), guard: int = DEFAULT_GUARD, label="term"):
        return cls(ty, lambda q: denote_closed(m, q, guard), tuple(roster), label)

    @classmethod
    def of_tree(cls, cc: ChurchContext, t: Tree, roster=(1, 2, 3), guard: int = DEFAULT_GUARD):
        return cls.of_term(encode(cc, t), cc.type, roster, guard, label=str(t))


def parametricity_check(rho: ParametricFamily, guard: int = DEFAULT_GUARD, relations: dict | None = None) -> CheckReport:
    """``(rho_Q, rho_Q') in [[A]]_R`` for every enumerable relation between roster sets."""
    report = CheckReport("parametricity")
    report.notes.append(f"roster sizes {list(rho.roster)}")
    for q, q2 in itertools.product(rho.roster, repeat=2):
        if relations is not None and (q, q2) in relations:
            rels = relations[(q, q2)]
        elif q * q2 <= RELATION_CUTOFF:
            rels = enumerate_relations(q, q2)
        else:
            report.uncovered.append(f"{q}x{q2} (more than 2^{RELATION_CUTOFF} relations)")
            continue
        v, w = rho.at(q), rho.at(q2)
        for rel in rels:
            report.count(f"{q}x{q2}")
            try:
                ok = rel_member(rho.ty, rel, v, w, guard)
            except GuardExceeded as exc:
                report.uncovered.append(f"{q}x{q2} ({exc})")
                break
            if not ok:
                report.fail((q, q2, str(rel)))
                break
    return report


def parametric_to_tree(rho: ParametricFamily, sigma: RankedAlphabet, size_bound: int,
                       guard: int = DEFAULT_GUARD):
    """Least tree whose encoding denotes ``rho_Q`` at every roster size.

    For ``S => Gamma`` with ``Gamma`` a product of ``o^{m_j} => o`` the search
    runs once per component and returns a tuple of trees.
    """
    st = sigma_type(sigma)
    if not isinstance(rho.ty, Arrow) or rho.ty.dom != st:
        raise ValueError(f"expected a family of type {st} => ..., got {rho.ty}")
    cod = rho.ty.cod
    if isinstance(cod, Prod):
        out = []
        for j, comp in enumerate(cod.items):
            part = ParametricFamily(Arrow(st, comp), _component_rule(rho, st, comp, j, guard), rho.roster)
            out.append(parametric_to_tree(part, sigma, size_bound, guard))
        return tuple(out)
    n = _order(cod)
    cc = ChurchContext(sigma, n)
    targets = {q: rho.at(q) for q in rho.roster}
    for t in trees_up_to(sigma, n, size_bound):
        if all(sem_equal(cc.type, q, denote_closed(encode(cc, t), q, guard), v, guard) for q, v in targets.items()):
            return t
    return Inconclusive(size_bound)


def _order(ty):
    n = 0
    while isinstance(ty, Arrow):
        if ty.dom != O:
            raise ValueError(f"not of the form o => ... => o: {ty}")
        n += 1
        ty = ty.cod
    if ty != O:
        raise ValueError(f"not of the form o => ... => o: {ty}")
    return n


def _component_rule(rho, st, comp, j, guard):
    def at(q):
        whole = rho.at(q)
        return SemFunction(interp_type(st, q, guard), interp_type(comp, q, guard), lambda s: whole(s)[j])
    return at


# ---------------------------------------------------------------------------
# The fixed-point equation


def fixed_point_check(rho: ParametricFamily, sigma: RankedAlphabet, q: int, guard: int = DEFAULT_GUARD) -> CheckReport:
    """``rho_Q = rho_{Q*}([[g_1]]_Q, ..., [[g_l]]_Q)`` with ``Q* = [[S => o]]_Q``."""
    report = CheckReport("fixed point")
    st = sigma_type(sigma)
    if rho.ty != Arrow(st, O):
        raise ValueError(f"fixed-point check needs type {Arrow(st, O)}, got {rho.ty}")
    star = interp_type(Arrow(st, O), q, guard)
    qstar = star.cardinality
    report.notes.append(f"|Q|={q}, |Q*|={qstar}")
    point = []
    for i, a in enumerate(sigma.arities, start=1):
        g = denote_closed(generator(sigma, i), q, guard)
        point.append(_generator_component(g, star, qstar, a, guard))
    rhs_index = rho.at(qstar)(tuple(point))
    rhs = star.element(rhs_index)
    lhs = rho.at(q)
    sigma_dom = interp_type(st, q, guard)
    for s in sigma_dom.elements():
        report.count("points")
        if lhs(s) != rhs(s):
            report.fail({"point": sigma_dom.index(s), "lhs": lhs(s), "rhs": rhs(s)})
            break
    return report


def _generator_component(g, star, qstar, arity, guard):
    """``[[g_i]]_Q`` as a curried operation on indices of ``Q*``."""
    if arity == 0:
        return star.index(g(()))

    def build(prefix):
        dom = interp_type(O, qstar, guard)
        cod = interp_type(arrows([O] * (arity - len(prefix) - 1), O), qstar, guard)
        if len(prefix) == arity - 1:
            return SemFunction(dom, cod, lambda k: star.index(g(tuple(star.element(i) for i in prefix + (k,)))))
        return SemFunction(dom, cod, lambda k: build(prefix + (k,)))

    return build(())


def non_parametric_family(cc: ChurchContext, small: Tree, large: Tree, threshold: int,
                          guard: int = DEFAULT_GUARD) -> ParametricFamily:
    """``[[small]]`` at sizes up to ``threshold`` and ``[[large]]`` beyond: not definable."""
    a, b = encode(cc, small), encode(cc, large)
    return ParametricFamily(cc.type, lambda q: denote_closed(a if q <= threshold else b, q, guard),
                            label=f"{small}|{large}@{threshold}")


def mismatched_family(cc: ChurchContext, by_size: dict, guard: int = DEFAULT_GUARD, roster=(2, 3)) -> ParametricFamily:
    """A family taking the semantics of a different tree at each listed size."""
    terms = {q: encode(cc, t) for q, t in by_size.items()}
    return ParametricFamily(cc.type, lambda q: denote_closed(terms[q], q, guard), tuple(roster), label="mismatched")


def artificial_family(sigma: RankedAlphabet, n: int, roster: CloneRoster, default: Tree, special: Tree,
                      special_name: str) -> NaturalFamily:
    """``p(special)`` on the clone named ``special_name`` and ``p(default)`` everywhere else."""
    def rule(c, p):
        return eval_morphism(p, special if c.name == special_name else default, n)

    tables = {c.name: tuple(rule(c, p) for p in roster.morphisms(sigma, c)) for c in roster.clones}
    return NaturalFamily(sigma, n, roster, tables, rule)


__all__ = [
    "CloneRoster", "NaturalFamily", "ProfiniteTermApprox", "ParametricFamily", "Inconclusive", "CheckReport",
    "family_of_tree", "family_subst", "naturality_check", "generated_morphisms", "definability_search",
    "bidefinability_check", "restrict", "lift", "retraction_check", "semantic_kleisli", "parametricity_check",
    "parametric_to_tree", "fixed_point_check", "non_parametric_family", "mismatched_family", "artificial_family",
]
