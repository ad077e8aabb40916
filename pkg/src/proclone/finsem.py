"""Finite-set semantics of simple types and terms, and logical relations.

Semantic values are plain Python data: a base element of ``Fin(q)`` is an
``int``, a product element is a ``tuple`` (the unit is ``()``), and a
function is a :class:`SemFunction`, which is intensional (a rule) with a memo
table.  Domains are enumerated in a fixed order: base elements ascending,
products lexicographically, functions as tuples of codomain values indexed by
the domain order (first domain element most significant).  That order gives
every element of an enumerable domain a canonical index.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import numpy as np

from . import kernels
from .errors import GuardExceeded
from .stlc import Arrow, Base, Lam, App, Prod, SimpleType, Term, Tup, Var, typecheck

DEFAULT_GUARD = 65536
# Largest relation matrix (left cardinality x right cardinality) ever materialized.
MATRIX_CAP = 1 << 26


@dataclass(frozen=True)
class Fin:
    size: int

    def __post_init__(self):
        if self.size < 0:
            raise ValueError("Fin size must be non-negative")


@dataclass(frozen=True)
class FinRelation:
    left: int
    right: int
    pairs: frozenset

    def __post_init__(self):
        for x, y in self.pairs:
            if not (0 <= x < self.left and 0 <= y < self.right):
                raise ValueError(f"pair {(x, y)} outside {self.left} x {self.right}")

    @classmethod
    def of(cls, left, right, pairs):
        return cls(left, right, frozenset(pairs))

    @classmethod
    def diagonal(cls, q):
        return cls(q, q, frozenset((x, x) for x in range(q)))

    @classmethod
    def full(cls, left, right):
        return cls(left, right, frozenset(itertools.product(range(left), range(right))))

    def matrix(self):
        m = np.zeros((self.left, self.right), dtype=np.bool_)
        for x, y in self.pairs:
            m[x, y] = True
        return m

    def __str__(self):
        return f"{self.left}x{self.right}:{sorted(self.pairs)}"


RELATION_CUTOFF = 12


def enumerate_relations(left: int, right: int) -> Iterator[FinRelation]:
    """All relations between ``Fin(left)`` and ``Fin(right)``, by bitmask over row-major pairs."""
    cells = list(itertools.product(range(left), range(right)))
    if len(cells) > RELATION_CUTOFF:
        raise GuardExceeded("relation enumeration", 2 ** len(cells), 2 ** RELATION_CUTOFF)
    for mask in range(2 ** len(cells)):
        yield FinRelation(left, right, frozenset(c for k, c in enumerate(cells) if mask >> k & 1))


def relation_from_mask(left: int, right: int, mask: int) -> FinRelation:
    cells = itertools.product(range(left), range(right))
    return FinRelation(left, right, frozenset(c for k, c in enumerate(cells) if mask >> k & 1))


# ---------------------------------------------------------------------------
# Domains


class SemDomain:
    """The finite set ``[[ty]]_q`` with guarded enumeration and canonical indexing."""

    def __init__(self, ty: SimpleType, q: int, guard: int):
        self.ty = ty
        self.q = q
        self.guard = guard
        if isinstance(ty, Arrow):
            self.dom = interp_type(ty.dom, Fin(q), guard)
            self.cod = interp_type(ty.cod, Fin(q), guard)
            self.cardinality = self.cod.cardinality ** self.dom.cardinality
        elif isinstance(ty, Prod):
            self.items = tuple(interp_type(a, Fin(q), guard) for a in ty.items)
            self.cardinality = 1
            for d in self.items:
                self.cardinality *= d.cardinality
        else:
            self.cardinality = q
        self._elements = None

    def __repr__(self):
        return f"SemDomain({self.ty}, {self.q})"

    @property
    def enumerable(self) -> bool:
        return self.cardinality <= self.guard

    def require_enumerable(self):
        if not self.enumerable:
            raise GuardExceeded(f"enumeration of [[{self.ty}]]_{self.q}", self.cardinality, self.guard)

    def elements(self) -> tuple:
        if self._elements is None:
            self.require_enumerable()
            self._elements = tuple(self.element(i) for i in range(self.cardinality))
        return self._elements

    def element(self, i: int):
        if not 0 <= i < self.cardinality:
            raise IndexError(f"index {i} outside [[{self.ty}]]_{self.q}")
        if self._elements is not None:
            return self._elements[i]
        if isinstance(self.ty, Base):
            return i
        if isinstance(self.ty, Prod):
            out = []
            for d in reversed(self.items):
                i, r = divmod(i, d.cardinality)
                out.append(d.element(r))
            return tuple(reversed(out))
        self.dom.require_enumerable()
        n, c = self.dom.cardinality, self.cod.cardinality
        digits = []
        for _ in range(n):
            i, r = divmod(i, c)
            digits.append(r)
        digits.reverse()
        return SemFunction.from_table(self.dom, self.cod, tuple(digits))

    def index(self, v) -> int:
        if isinstance(self.ty, Base):
            return v
        if isinstance(self.ty, Prod):
            k = 0
            for d, x in zip(self.items, v):
                k = k * d.cardinality + d.index(x)
            return k
        k = 0
        c = self.cod.cardinality
        for digit in v.table():
            k = k * c + digit
        return k

    def indexable(self) -> bool:
        """Whether :meth:`index` can be computed without tripping a guard."""
        if isinstance(self.ty, Base):
            return True
        if isinstance(self.ty, Prod):
            return all(d.indexable() for d in self.items)
        return self.dom.enumerable and self.cod.indexable()

    def key(self, v):
        """A hashable memo key for ``v``: canonical when possible, identity otherwise."""
        if isinstance(self.ty, Base):
            return v
        if isinstance(self.ty, Prod):
            return tuple(d.key(x) for d, x in zip(self.items, v))
        return v.fingerprint()


@lru_cache(maxsize=None)
def _domain(ty, q, guard):
    return SemDomain(ty, q, guard)


def interp_type(ty: SimpleType, q: Fin | int, guard: int = DEFAULT_GUARD) -> SemDomain:
    return _domain(ty, q.size if isinstance(q, Fin) else q, guard)


class SemFunction:
    """An element of ``[[A -> B]]_q`` given by a rule, memoized on canonical keys."""

    __slots__ = ("dom", "cod", "_rule", "_memo", "_table", "_fp", "_lock", "_graph_table")

    def __init__(self, dom: SemDomain, cod: SemDomain, rule: Callable):
        self.dom = dom
        self.cod = cod
        self._rule = rule
        self._memo = {}
        self._table = None
        self._graph_table = None
        self._fp = None
        self._lock = threading.Lock()

    @classmethod
    def from_table(cls, dom, cod, table):
        """Function given by the codomain indices of its values, in domain order."""
        f = cls(dom, cod, lambda x: cod.element(table[dom.index(x)]))
        f._table = tuple(table)
        return f

    def __call__(self, x):
        if self._table is not None and self.dom.indexable():
            return self.cod.element(self._table[self.dom.index(x)])
        k = self.dom.key(x)
        hit = self._memo.get(k)
        if hit is not None:
            return hit[1]
        v = self._rule(x)
        with self._lock:
            self._memo[k] = (x, v)  # keep x alive: identity keys must not be recycled
        return v

    def table(self) -> tuple:
        """Codomain indices of the values on the enumerated domain."""
        if self._table is None:
            self._table = tuple(self.cod.index(self(x)) for x in self.dom.elements())
        return self._table

    def np_table(self) -> np.ndarray:
        if self._graph_table is None:
            self._graph_table = np.asarray(self.table(), dtype=np.int64)
        return self._graph_table

    def fingerprint(self):
        if self._fp is None:
            if self.dom.enumerable and self.cod.indexable():
                self._fp = ("table", self.table())
            else:
                self._fp = ("id", id(self), self)
        return self._fp

    def observed(self):
        """Points queried so far, as (argument, value) pairs."""
        return [(x, v) for x, v in self._memo.values()]

    def __repr__(self):
        return f"<SemFunction [[{self.dom.ty} -> {self.cod.ty}]]_{self.dom.q}>"


def curry_table(q: int, arity: int, table: Sequence[int], guard: int = DEFAULT_GUARD):
    """Curried element of ``[[o -> ... -> o]]_q`` from a row-major table of ``Q^arity -> Q``."""
    from .stlc import O, arrows

    if arity == 0:
        return table[0]

    def build(prefix, k):
        ty = arrows([O] * (arity - k), O)
        dom = interp_type(O, q, guard)
        cod = interp_type(ty.cod, q, guard)
        if k == arity - 1:
            return SemFunction(dom, cod, lambda x: table[prefix * q + x])
        return SemFunction(dom, cod, lambda x: build(prefix * q + x, k + 1))

    return build(0, 0)


def uncurry_table(q: int, arity: int, value) -> tuple:
    """Row-major table of a curried element of ``[[o -> ... -> o]]_q``."""
    out = []
    for args in itertools.product(range(q), repeat=arity):
        v = value
        for a in args:
            v = v(a)
        out.append(v)
    return tuple(out)


# ---------------------------------------------------------------------------
# Terms


def _compile(ctx: tuple, t: Term, q: int, guard: int):
    """Typed compilation of ``t`` into a closure over environments (outermost first)."""
    if isinstance(t, Var):
        k = len(ctx) - 1 - t.index
        return ctx[k], lambda env: env[k]
    if isinstance(t, Lam):
        body_ty, body = _compile(ctx + (t.ty,), t.body, q, guard)
        dom = interp_type(t.ty, q, guard)
        cod = interp_type(body_ty, q, guard)
        return Arrow(t.ty, body_ty), lambda env: SemFunction(dom, cod, lambda x: body(env + (x,)))
    if isinstance(t, App):
        fn_ty, fn = _compile(ctx, t.fn, q, guard)
        _, arg = _compile(ctx, t.arg, q, guard)
        return fn_ty.cod, lambda env: fn(env)(arg(env))
    if isinstance(t, Tup):
        parts = [_compile(ctx, u, q, guard) for u in t.items]
        fns = [f for _, f in parts]
        return Prod(tuple(a for a, _ in parts)), lambda env: tuple(f(env) for f in fns)
    subj_ty, subj = _compile(ctx, t.subject, q, guard)
    i = t.index - 1
    return subj_ty.items[i], lambda env: subj(env)[i]


def interp_term(ctx: Sequence[SimpleType], t: Term, q: Fin | int, env: Sequence = (), guard: int = DEFAULT_GUARD):
    """The denotation ``[[t]]_q`` at the environment ``env`` (outermost variable first)."""
    typecheck(ctx, t)
    qs = q.size if isinstance(q, Fin) else q
    if len(env) != len(ctx):
        raise ValueError(f"environment has {len(env)} values for a context of length {len(ctx)}")
    _, fn = _compile(tuple(ctx), t, qs, guard)
    return fn(tuple(env))


@lru_cache(maxsize=4096)
def denote_closed(t: Term, q: int, guard: int = DEFAULT_GUARD):
    """Cached denotation of a closed term."""
    return interp_term((), t, q, (), guard)


def sem_equal(ty: SimpleType, q: Fin | int, v, w, guard: int = DEFAULT_GUARD) -> bool:
    """Extensional equality in ``[[ty]]_q``."""
    d = interp_type(ty, q, guard)
    return _sem_equal(d, v, w)


def _sem_equal(d: SemDomain, v, w) -> bool:
    if v is w:
        return True
    if isinstance(d.ty, Base):
        return v == w
    if isinstance(d.ty, Prod):
        return all(_sem_equal(c, x, y) for c, x, y in zip(d.items, v, w))
    d.dom.require_enumerable()
    if d.cod.indexable():
        return v.table() == w.table()
    return all(_sem_equal(d.cod, v(x), w(x)) for x in d.dom.elements())


# ---------------------------------------------------------------------------
# Logical relations


def _app_table(d: SemDomain) -> np.ndarray:
    """``app[f, x]`` = codomain index of ``f(x)`` over the enumerated function space."""
    n, c = d.dom.cardinality, d.cod.cardinality
    f = np.arange(d.cardinality, dtype=np.int64)[:, None]
    weights = np.array([c ** (n - 1 - x) for x in range(n)], dtype=np.int64)[None, :]
    return (f // weights) % c


@lru_cache(maxsize=1024)
def relation_matrix(ty: SimpleType, rel: FinRelation, guard: int = DEFAULT_GUARD) -> np.ndarray:
    """The logical relation ``[[ty]]_R`` as a boolean matrix over canonical indices."""
    left = interp_type(ty, rel.left, guard)
    right = interp_type(ty, rel.right, guard)
    left.require_enumerable()
    right.require_enumerable()
    if left.cardinality * right.cardinality > MATRIX_CAP:
        raise GuardExceeded(f"relation matrix at {ty}", left.cardinality * right.cardinality, MATRIX_CAP)
    if isinstance(ty, Base):
        m = rel.matrix()
    elif isinstance(ty, Prod):
        m = np.ones((1, 1), dtype=np.bool_)
        for a in ty.items:
            m = np.kron(m, relation_matrix(a, rel, guard)).astype(np.bool_)
    else:
        m = kernels.arrow_relation(
            _app_table(left),
            _app_table(right),
            relation_matrix(ty.dom, rel, guard),
            relation_matrix(ty.cod, rel, guard),
        )
    m.setflags(write=False)
    return m


def rel_member(ty: SimpleType, rel: FinRelation, v, w, guard: int = DEFAULT_GUARD) -> bool:
    """Whether ``(v, w)`` lies in the logical relation ``[[ty]]_R``."""
    if isinstance(ty, Base):
        return (v, w) in rel.pairs
    if isinstance(ty, Prod):
        return all(rel_member(a, rel, x, y, guard) for a, x, y in zip(ty.items, v, w))
    rdom = relation_matrix(ty.dom, rel, guard)
    left = interp_type(ty, rel.left, guard)
    right = interp_type(ty, rel.right, guard)
    if _matrix_ok(ty.cod, rel, guard):
        rcod = relation_matrix(ty.cod, rel, guard)
        return kernels.pair_related(v.np_table(), w.np_table(), rdom, rcod)
    xs = left.dom.elements()
    ys = right.dom.elements()
    for i, j in zip(*np.nonzero(rdom)):
        if not rel_member(ty.cod, rel, v(xs[i]), w(ys[j]), guard):
            return False
    return True


def _matrix_ok(ty, rel, guard):
    left = interp_type(ty, rel.left, guard)
    right = interp_type(ty, rel.right, guard)
    return left.enumerable and right.enumerable and left.cardinality * right.cardinality <= MATRIX_CAP


def fundamental_lemma_check(t: Term, ty: SimpleType, rel: FinRelation, guard: int = DEFAULT_GUARD) -> bool:
    actual = typecheck((), t)
    if actual != ty:
        raise ValueError(f"term has type {actual}, not {ty}")
    return rel_member(ty, rel, denote_closed(t, rel.left, guard), denote_closed(t, rel.right, guard), guard)


# ---------------------------------------------------------------------------
# Serialization


def serialize(ty: SimpleType, q: int, v, guard: int = DEFAULT_GUARD) -> dict:
    """Canonical-index form of a semantic value, or its observed graph when too large."""
    d = interp_type(ty, q, guard)
    if d.indexable():
        return {"type": str(ty), "base": q, "index": d.index(v)}
    if isinstance(v, SemFunction):
        graph = [[repr(d.dom.key(x)), _short(d.cod, y)] for x, y in v.observed()]
        return {"type": str(ty), "base": q, "intensional": True, "graph": sorted(graph)}
    return {"type": str(ty), "base": q, "components": [serialize(a, q, x, guard) for a, x in zip(ty.items, v)]}


def _short(d, y):
    return d.index(y) if d.indexable() else repr(d.key(y))
