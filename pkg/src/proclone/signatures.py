"""Signatures as presheaves on finite ordinals, their composition, the free
iteration, and the pointed-pair encoding of monoid actions.

Only finite coproducts of representables are handled.  Such a signature is a
tuple of labelled summands ``(label, k)`` standing for ``y_k``; its set at
``n`` is ``{(label, f) | f : <k> -> <n>}`` with ``f`` a tuple of values in
``1..n``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

from .clones import (ActionClone, MonoidAction, FiniteMonoid, Node, RankedAlphabet, TVar,
                     check_clone_laws, trees_below_depth)
from .errors import ActionLawViolation, GuardExceeded, Unsupported


@dataclass(frozen=True)
class Signature:
    summands: tuple  # ((label, arity), ...)

    def __post_init__(self):
        object.__setattr__(self, "summands", tuple((lab, int(k)) for lab, k in self.summands))
        labels = [lab for lab, _ in self.summands]
        if len(set(labels)) != len(labels):
            raise ValueError("summand labels must be distinct")

    @classmethod
    def of_alphabet(cls, sigma: RankedAlphabet) -> "Signature":
        return cls(tuple((j, a) for j, a in enumerate(sigma.arities, start=1)))

    @classmethod
    def representable(cls, k: int, label="*") -> "Signature":
        return cls(((label, k),))

    def arity_of(self, label) -> int:
        return dict(self.summands)[label]

    def elements(self, n: int) -> tuple:
        return tuple((lab, f) for lab, k in self.summands for f in itertools.product(range(1, n + 1), repeat=k))

    def size(self, n: int) -> int:
        return sum(n ** k for _, k in self.summands)

    def act(self, g: tuple, elem):
        """Relabel along ``g : <m> -> <n>`` given as a tuple of images."""
        lab, f = elem
        return lab, tuple(g[i - 1] for i in f)

    def __str__(self):
        return " + ".join(f"y{k}" for _, k in self.summands) or "0"


@dataclass(frozen=True)
class TabulatedSignature:
    """A signature given only by its sets up to an arity bound."""

    sets: tuple

    def elements(self, n):
        return self.sets[n]


Y0 = Signature.representable(0)
Y1 = Signature.representable(1)


def compose_signatures(x, x2) -> Signature:
    """``X o X'``: the summand ``(s, k)`` contributes ``(X')^k``, with ``y_a x y_b = y_{a+b}``."""
    if not isinstance(x, Signature) or not isinstance(x2, Signature):
        raise Unsupported("composition of tabulated signatures needs a general coend")
    out = []
    for s, k in x.summands:
        for combo in itertools.product(x2.summands, repeat=k):
            out.append(((s, tuple(lab for lab, _ in combo)), sum(a for _, a in combo)))
    return Signature(tuple(out))


def composite_elements(x: Signature, x2: Signature, n: int) -> tuple:
    """``(X o X')_n`` computed directly as pairs ``(s, (u_1..u_k))`` with ``u_i`` in ``X'_n``."""
    pool = x2.elements(n)
    return tuple((s, us) for s, k in x.summands for us in itertools.product(pool, repeat=k))


def composite_to_closed(elem):
    """The Yoneda collapse ``(s, (u_1..u_k)) |-> ((s, labels), f_1 ++ ... ++ f_k)``."""
    s, us = elem
    return (s, tuple(lab for lab, _ in us)), tuple(v for _, f in us for v in f)


# ---------------------------------------------------------------------------
# Natural bijections between coproducts of representables


@dataclass
class IsoReport:
    name: str
    passed: bool
    checked: int
    witness: object = None

    def as_dict(self):
        return {"name": self.name, "passed": self.passed, "checked": self.checked,
                "witness": None if self.witness is None else str(self.witness)}


def summand_map_iso(name: str, x: Signature, y: Signature, label_map: Callable, n_bound: int = 3) -> IsoReport:
    """Check that ``(l, f) |-> (label_map(l), f)`` is a natural bijection ``X -> Y``."""
    checked = 0
    for n in range(n_bound + 1):
        src = x.elements(n)
        img = [(label_map(lab), f) for lab, f in src]
        target = set(y.elements(n))
        for e, v in zip(src, img):
            checked += 1
            if v not in target:
                return IsoReport(name, False, checked, ("not in target", n, e, v))
        if len(set(img)) != len(img) or len(img) != len(target):
            return IsoReport(name, False, checked, ("not bijective", n))
        for m in range(n_bound + 1):
            for g in itertools.product(range(1, m + 1), repeat=n):
                for e in src[:16]:
                    checked += 1
                    lhs = (label_map(e[0]), tuple(g[i - 1] for i in e[1]))
                    rhs = y.act(g, (label_map(e[0]), e[1]))
                    if lhs != rhs:
                        return IsoReport(name, False, checked, ("not natural", e, g))
    return IsoReport(name, True, checked)


def left_unitor(x: Signature):
    """``y_1 o X -> X``."""
    return lambda lab: lab[1][0]


def right_unitor(x: Signature):
    """``X o y_1 -> X``."""
    return lambda lab: lab[0]


def absorber(x: Signature):
    """``y_0 o X -> y_0``."""
    return lambda lab: lab[0]


def associator(x: Signature, y: Signature, z: Signature):
    """Label map ``(X o Y) o Z -> X o (Y o Z)``."""
    ya = dict(y.summands)

    def fwd(lab):
        (s, ts), us = lab
        out, pos = [], 0
        for t in ts:
            k = ya[t]
            out.append((t, tuple(us[pos:pos + k])))
            pos += k
        return s, tuple(out)

    return fwd


def unit_laws_check(x: Signature, n_bound: int = 3) -> list:
    return [
        summand_map_iso("left unit y1 o X = X", compose_signatures(Y1, x), x, left_unitor(x), n_bound),
        summand_map_iso("right unit X o y1 = X", compose_signatures(x, Y1), x, right_unitor(x), n_bound),
        summand_map_iso("absorption y0 o X = y0", compose_signatures(Y0, x), Y0, absorber(x), n_bound),
    ]


def collapse_check(x: Signature, x2: Signature, n_bound: int = 3) -> IsoReport:
    """The direct composite and the closed form agree through an explicit bijection."""
    closed = compose_signatures(x, x2)
    checked = 0
    for n in range(n_bound + 1):
        direct = composite_elements(x, x2, n)
        img = [composite_to_closed(e) for e in direct]
        checked += len(img)
        if len(set(img)) != len(img) or set(img) != set(closed.elements(n)):
            return IsoReport("coend collapse", False, checked, n)
    return IsoReport("coend collapse", True, checked)


# ---------------------------------------------------------------------------
# Free iteration


def free_iteration(sigma: RankedAlphabet, depth: int, n: int, guard: int = 1 << 20) -> frozenset:
    """``S^(0) = {}``, ``S^(k+1) = V + X o S^(k)`` with elements represented as trees."""
    s = frozenset()
    for _ in range(depth):
        nxt = {TVar(i) for i in range(1, n + 1)}
        pool = sorted(s, key=str)
        for j, a in enumerate(sigma.arities, start=1):
            if len(pool) ** a > guard:
                raise GuardExceeded("free iteration", len(pool) ** a, guard)
            for kids in itertools.product(pool, repeat=a):
                nxt.add(Node(j, kids))
        s = frozenset(nxt)
    return s


def free_iteration_agrees(sigma: RankedAlphabet, max_depth: int, n: int) -> bool:
    prev = frozenset()
    for d in range(max_depth + 1):
        cur = free_iteration(sigma, d, n)
        if not prev <= cur or cur != trees_below_depth(sigma, n, d):
            return False
        prev = cur
    return True


# ---------------------------------------------------------------------------
# Pointed pairs


@dataclass(frozen=True)
class PointedPair:
    q: tuple
    a: tuple

    @classmethod
    def of(cls, q: int, a: int) -> "PointedPair":
        return cls(tuple(range(q)), tuple(range(a)))

    @property
    def sizes(self):
        return len(self.q), len(self.a)


UNIT_PAIR = PointedPair((), ("*",))


def semidirect(p: PointedPair, r: PointedPair) -> PointedPair:
    """``(Q, A) x| (R, B) = (Q + A x R, A x B)`` with tagged elements."""
    q = tuple(("q", x) for x in p.q) + tuple(("ar", a, x) for a in p.a for x in r.q)
    return PointedPair(q, tuple((a, b) for a in p.a for b in r.a))


def setsig(p: PointedPair) -> Signature:
    return Signature(tuple((("q", x), 0) for x in p.q) + tuple((("a", a), 1) for a in p.a))


def sigset(x: Signature) -> PointedPair:
    """``(X_0, X_1)``."""
    return PointedPair(x.elements(0), x.elements(1))


def adjunction_counts(p: PointedPair, x: Signature) -> tuple:
    """Brute-force ``|Sig(setsig p, X)|`` and ``|Set^2(p, sigset X)|``.

    A transformation out of a coproduct of ``y_0`` and ``y_1`` is determined by
    its components at ``0`` and ``1``; naturality is checked against the unique
    map ``<0> -> <1>``.
    """
    src = setsig(p)
    s0, s1 = src.elements(0), src.elements(1)
    x0, x1 = x.elements(0), x.elements(1)
    left = 0
    for a0 in itertools.product(x0, repeat=len(s0)):
        alpha0 = dict(zip(s0, a0))
        for a1 in itertools.product(x1, repeat=len(s1)):
            alpha1 = dict(zip(s1, a1))
            if all(alpha1[src.act((), e)] == x.act((), alpha0[e]) for e in s0):
                left += 1
    pair = sigset(x)
    right = len(pair.q) ** len(p.q) * len(pair.a) ** len(p.a)
    return left, right


def semidirect_associator(p: PointedPair, r: PointedPair, s: PointedPair):
    """Explicit bijection ``((P x| R) x| S) -> (P x| (R x| S))`` as a pair of dicts."""
    lhs = semidirect(semidirect(p, r), s)
    q_map = {}
    for e in lhs.q:
        if e[0] == "q":
            inner = e[1]
            if inner[0] == "q":
                q_map[e] = ("q", inner[1])
            else:
                q_map[e] = ("ar", inner[1], ("q", inner[2]))
        else:
            (a, b), x = e[1], e[2]
            q_map[e] = ("ar", a, ("ar", b, x))
    a_map = {((a, b), c): (a, (b, c)) for (a, b), c in lhs.a}
    return q_map, a_map


def semidirect_unitors(p: PointedPair):
    """``(0,1) x| P -> P`` and ``P x| (0,1) -> P``."""
    left = semidirect(UNIT_PAIR, p)
    right = semidirect(p, UNIT_PAIR)
    lq = {e: e[2] for e in left.q}
    la = {e: e[1] for e in left.a}
    rq = {e: e[1] for e in right.q}
    ra = {e: e[0] for e in right.a}
    return (lq, la), (rq, ra)


def mu_label(lab):
    """Summand map ``setsig P o setsig P' -> setsig(P x| P')``."""
    (kind, x), inner = lab
    if kind == "q":
        return ("q", ("q", x))
    (kind2, y), = inner
    if kind2 == "q":
        return ("q", ("ar", x, y))
    return ("a", (x, y))


def setsig_coherence(p: PointedPair, r: PointedPair, s: PointedPair, n_bound: int = 3) -> list:
    """The monoidal structure of setsig: multiplication, unit and the associativity square."""
    reports = [
        summand_map_iso("mu: setsig P o setsig R = setsig(P x| R)",
                        compose_signatures(setsig(p), setsig(r)), setsig(semidirect(p, r)), mu_label, n_bound),
        summand_map_iso("unit: setsig(0,1) = y1", setsig(UNIT_PAIR), Y1, lambda lab: "*", n_bound),
    ]
    sp, sr, ss = setsig(p), setsig(r), setsig(s)
    q_assoc, a_assoc = semidirect_associator(p, r, s)
    alpha = associator(sp, sr, ss)
    checked = 0
    witness = None
    for lab, _ in compose_signatures(compose_signatures(sp, sr), ss).summands:
        checked += 1
        # upper path: mu_{PxR,S} . (mu_{P,R} o S)
        head, tail = lab
        upper = mu_label((mu_label(head), tail))
        # lower path: setsig(assoc) . mu_{P,RxS} . (P o mu_{R,S}) . alpha
        s0, ts = alpha(lab)
        lower = mu_label((s0, tuple(mu_label(t) for t in ts)))
        kind, e = upper
        transported = (kind, q_assoc[e] if kind == "q" else a_assoc[e])
        if transported != lower:
            witness = (lab, transported, lower)
            break
    reports.append(IsoReport("associativity square", witness is None, checked, witness))
    return reports


# ---------------------------------------------------------------------------
# Monoid actions as monoids in (Set^2, x|)


@dataclass(frozen=True)
class MonoidObject:
    """A monoid on ``(Q, M)``: unit ``e`` in ``M`` and multiplication split as ``f, g, m``."""

    pair: PointedPair
    e: object
    f: dict  # Q -> Q
    g: dict  # (m, q) -> Q
    m: dict  # (m, m') -> M

    def multiply(self):
        """The multiplication ``(Q, M) x| (Q, M) -> (Q, M)`` as a pair of dicts."""
        src = semidirect(self.pair, self.pair)
        mq = {x: (self.f[x[1]] if x[0] == "q" else self.g[(x[1], x[2])]) for x in src.q}
        return mq, dict(self.m)


def monoid_object_of(ma: MonoidAction) -> MonoidObject:
    pair = PointedPair.of(ma.q, ma.monoid.size)
    return MonoidObject(
        pair,
        ma.monoid.unit,
        {x: x for x in pair.q},
        {(a, x): ma.act[a][x] for a in pair.a for x in pair.q},
        {(a, b): ma.monoid.mul[a][b] for a in pair.a for b in pair.a},
    )


def _tensor(phi, psi, p, r):
    """``phi x| psi`` on elements of ``p x| r``."""
    (pq, pa), (rq, ra) = phi, psi
    src = semidirect(p, r)
    q = {x: (("q", pq[x[1]]) if x[0] == "q" else ("ar", pa[x[1]], rq[x[2]])) for x in src.q}
    return q, {(a, b): (pa[a], ra[b]) for a, b in src.a}


def monoid_object_laws(obj: MonoidObject) -> list:
    """Left unit, right unit and associativity diagrams, each as ``(law, ok, witness)``."""
    p = obj.pair
    mq, mm = obj.multiply()
    ident = ({x: x for x in p.q}, {a: a for a in p.a})
    unit = ({}, {"*": obj.e})
    out = []

    (lq, la), (rq, ra) = semidirect_unitors(p)
    uq, ua = _tensor(unit, ident, UNIT_PAIR, p)
    bad = [x for x in lq if mq[uq[x]] != lq[x]] + [a for a in la if mm[ua[a]] != la[a]]
    out.append(("left unit", not bad, bad[:1]))
    uq, ua = _tensor(ident, unit, p, UNIT_PAIR)
    bad = [x for x in rq if mq[uq[x]] != rq[x]] + [a for a in ra if mm[ua[a]] != ra[a]]
    out.append(("right unit", not bad, bad[:1]))

    pp = semidirect(p, p)
    mult = (mq, mm)
    left_q, left_a = _tensor(mult, ident, pp, p)
    right_q, right_a = _tensor(ident, mult, p, pp)
    q_assoc, a_assoc = semidirect_associator(p, p, p)
    bad = []
    for x in left_q:
        if mq[left_q[x]] != mq[right_q[q_assoc[x]]]:
            bad.append(x)
    for a in left_a:
        if mm[left_a[a]] != mm[right_a[a_assoc[a]]]:
            bad.append(a)
    out.append(("associativity", not bad, bad[:1]))
    return out


def action_of_monoid_object(obj: MonoidObject) -> MonoidAction:
    size = len(obj.pair.a)
    mul = tuple(tuple(obj.m[(a, b)] for b in range(size)) for a in range(size))
    act = tuple(tuple(obj.g[(a, x)] for x in obj.pair.q) for a in range(size))
    return MonoidAction(FiniteMonoid(mul, obj.e), len(obj.pair.q), act)


def action_roundtrip(ma: MonoidAction, arity_bound: int = 2) -> dict:
    """Monoid action to monoid object and back, with every law verified."""
    ma.validate()
    obj = monoid_object_of(ma)
    laws = monoid_object_laws(obj)
    back = action_of_monoid_object(obj)
    f_identity = all(obj.f[x] == x for x in obj.pair.q)
    clone_report = check_clone_laws(ActionClone(back), arity_bound)
    checks = [{"law": law, "passed": ok, "witness": [str(w) for w in wit]} for law, ok, wit in laws]
    checks.append({"law": "f is the identity", "passed": f_identity, "witness": []})
    checks.append({"law": "recovered action equals input", "passed": back == ma, "witness": []})
    checks.append({"law": "action clone laws", "passed": clone_report.passed,
                   "witness": [] if clone_report.passed else [str(clone_report.counterexample)]})
    return {"passed": all(c["passed"] for c in checks), "checks": checks}


def corrupt_action(ma: MonoidAction, mode: str) -> MonoidAction:
    """Mutations of an action; none of them satisfies the action laws."""
    act = [list(r) for r in ma.act]
    mul = [list(r) for r in ma.monoid.mul]
    if mode == "unit":
        x = 0
        act[ma.monoid.unit][x] = (act[ma.monoid.unit][x] + 1) % ma.q
    elif mode == "action":
        a = next(a for a in range(ma.monoid.size) if a != ma.monoid.unit)
        act[a] = [act[a][0]] * ma.q
    elif mode == "monoid":
        a = next(a for a in range(ma.monoid.size) if a != ma.monoid.unit)
        mul[a][a] = a
    else:
        raise ValueError(f"unknown mutation {mode!r}")
    return MonoidAction(FiniteMonoid(tuple(map(tuple, mul)), ma.monoid.unit), ma.q, tuple(map(tuple, act)))


def raw_monoid_object(ma: MonoidAction) -> MonoidObject:
    """The monoid-object candidate built from tables without validating them."""
    return monoid_object_of(ma)


def check_action_or_violation(ma: MonoidAction):
    try:
        ma.validate()
    except ActionLawViolation as exc:
        return exc
    return None
