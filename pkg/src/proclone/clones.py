"""Abstract clones: free clones of trees, endomorphism and action clones,
derived clones, morphisms, the Cayley embedding and a law checker.

A clone here is any object with ``var(n, i)``, ``subst(m, n, x, ys)`` and a
guarded ``carrier(n)``.  Variable positions are 1-based, as are letters.
"""
from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .errors import ActionLawViolation, ArityMismatch, GuardExceeded, ParseError

DEFAULT_GUARD = 65536


# ---------------------------------------------------------------------------
# Alphabets and trees


@dataclass(frozen=True)
class RankedAlphabet:
    arities: tuple

    def __post_init__(self):
        object.__setattr__(self, "arities", tuple(int(a) for a in self.arities))
        if any(a < 0 for a in self.arities):
            raise ValueError("arities must be non-negative")

    def __len__(self):
        return len(self.arities)

    def arity(self, j: int) -> int:
        if not 1 <= j <= len(self.arities):
            raise IndexError(f"letter a{j} not in alphabet {list(self.arities)}")
        return self.arities[j - 1]

    def __str__(self):
        return str(list(self.arities))


@dataclass(frozen=True)
class TVar:
    index: int

    def __str__(self):
        return f"x{self.index}"


@dataclass(frozen=True)
class Node:
    letter: int
    children: tuple = ()

    def __str__(self):
        if not self.children:
            return f"a{self.letter}"
        return "(" + " ".join([f"a{self.letter}"] + [str(c) for c in self.children]) + ")"


Tree = TVar | Node


def tree_size(t: Tree) -> int:
    if isinstance(t, TVar):
        return 1
    return 1 + sum(tree_size(c) for c in t.children)


def tree_depth(t: Tree) -> int:
    if isinstance(t, TVar) or not t.children:
        return 0
    return 1 + max(tree_depth(c) for c in t.children)


def tree_key(t: Tree):
    """Sort key: size, then variables before nodes, then index or letter, then children."""
    return (tree_size(t),) + _shape_key(t)


def _shape_key(t):
    if isinstance(t, TVar):
        return (0, t.index)
    return (1, t.letter) + tuple(tree_key(c) for c in t.children)


def check_tree(sigma: RankedAlphabet, n: int, t: Tree) -> None:
    if isinstance(t, TVar):
        if not 1 <= t.index <= n:
            raise ArityMismatch(f"variable x{t.index} outside 1..{n}")
        return
    if len(t.children) != sigma.arity(t.letter):
        raise ArityMismatch(f"letter a{t.letter} has arity {sigma.arity(t.letter)}, got {len(t.children)} children")
    for c in t.children:
        check_tree(sigma, n, c)


def tree_subst(t: Tree, args: Sequence[Tree]) -> Tree:
    """Simultaneous substitution of ``args[i-1]`` for ``x_i``."""
    if isinstance(t, TVar):
        if not 1 <= t.index <= len(args):
            raise ArityMismatch(f"variable x{t.index} but only {len(args)} arguments")
        return args[t.index - 1]
    return Node(t.letter, tuple(tree_subst(c, args) for c in t.children))


_TREE_TOKEN = re.compile(r"\s*(?:(\()|(\))|([ax])(\d+))")


def parse_tree(src: str) -> Tree:
    pos = 0
    tokens = []
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TREE_TOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos:].lstrip()[:1]!r}", 1, pos + 1)
        start = m.start() + len(m.group(0)) - len(m.group(0).lstrip())
        tokens.append((m.group(1) or m.group(2) or m.group(3), m.group(4), start + 1))
        pos = m.end()
    k = 0

    def atom():
        nonlocal k
        if k >= len(tokens):
            raise ParseError("unexpected end of tree", 1, len(src) + 1)
        kind, num, col = tokens[k]
        k += 1
        if kind == "x":
            return TVar(int(num))
        if kind == "a":
            return Node(int(num), ())
        if kind != "(":
            raise ParseError("unexpected ')'", 1, col)
        if k >= len(tokens) or tokens[k][0] != "a":
            raise ParseError("expected a letter after '('", 1, tokens[k][2] if k < len(tokens) else len(src) + 1)
        letter = int(tokens[k][1])
        k += 1
        children = []
        while k < len(tokens) and tokens[k][0] != ")":
            children.append(atom())
        if k >= len(tokens):
            raise ParseError("unclosed '('", 1, col)
        k += 1
        return Node(letter, tuple(children))

    t = atom()
    if k != len(tokens):
        raise ParseError("trailing input", 1, tokens[k][2])
    return t


@lru_cache(maxsize=None)
def _trees_exact(arities: tuple, n: int, size: int) -> tuple:
    if size <= 0:
        return ()
    out = []
    if size == 1:
        out.extend(TVar(i) for i in range(1, n + 1))
    for j, a in enumerate(arities, start=1):
        if a == 0:
            if size == 1:
                out.append(Node(j, ()))
            continue
        for split in _compositions(size - 1, a):
            pools = [_trees_exact(arities, n, s) for s in split]
            for kids in itertools.product(*pools):
                out.append(Node(j, kids))
    out.sort(key=tree_key)
    return tuple(out)


def _compositions(total, parts):
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def trees_of_size(sigma: RankedAlphabet, n: int, size: int) -> tuple:
    return _trees_exact(sigma.arities, n, size)


def trees_up_to(sigma: RankedAlphabet, n: int, max_size: int) -> tuple:
    """All trees over ``sigma`` with ``n`` variables and size at most ``max_size``, in canonical order."""
    out = []
    for s in range(1, max_size + 1):
        out.extend(_trees_exact(sigma.arities, n, s))
    return tuple(out)


def trees_below_depth(sigma: RankedAlphabet, n: int, depth: int) -> frozenset:
    """Trees of depth strictly below ``depth`` (leaves have depth 0)."""
    level = frozenset()
    for _ in range(depth):
        nxt = set(TVar(i) for i in range(1, n + 1))
        for j, a in enumerate(sigma.arities, start=1):
            for kids in itertools.product(sorted(level, key=tree_key), repeat=a):
                nxt.add(Node(j, kids))
        level = frozenset(nxt)
    return level


# ---------------------------------------------------------------------------
# Clones


class Clone:
    """Base class.  Subclasses supply ``var``, ``subst`` and ``_enumerate``."""

    guard = DEFAULT_GUARD
    name = "clone"

    def var(self, n: int, i: int):
        raise NotImplementedError

    def subst(self, m: int, n: int, x, ys: Sequence):
        raise NotImplementedError

    def carrier_size(self, n: int):
        """Cardinality of the n-ary carrier, or ``None`` when unbounded."""
        raise NotImplementedError

    def _enumerate(self, n: int) -> tuple:
        raise NotImplementedError

    def enumerable(self, n: int) -> bool:
        size = self.carrier_size(n)
        return size is not None and size <= self.guard

    def carrier(self, n: int) -> tuple:
        cache = self.__dict__.setdefault("_carriers", {})
        if n not in cache:
            size = self.carrier_size(n)
            if size is None or size > self.guard:
                raise GuardExceeded(f"carrier {self.name}_{n}", size if size is not None else float("inf"), self.guard)
            cache[n] = self._enumerate(n)
        return cache[n]

    def index(self, n: int, x) -> int:
        cache = self.__dict__.setdefault("_indices", {})
        if n not in cache:
            cache[n] = {self.key(n, e): k for k, e in enumerate(self.carrier(n))}
        return cache[n][self.key(n, x)]

    def key(self, n: int, x):
        return x

    def eq(self, n: int, x, y) -> bool:
        return self.key(n, x) == self.key(n, y)

    def _check_args(self, m, ys):
        if len(ys) != m:
            raise ArityMismatch(f"{self.name}: substitution of arity {m} given {len(ys)} arguments")

    def __repr__(self):
        return self.name


class FreeClone(Clone):
    """Trees over a ranked alphabet; carriers are enumerated up to a size bound."""

    def __init__(self, sigma: RankedAlphabet, size_bound: int = 5, guard: int = DEFAULT_GUARD):
        self.sigma = sigma
        self.size_bound = size_bound
        self.guard = guard
        self.name = f"F{list(sigma.arities)}"

    def var(self, n, i):
        if not 1 <= i <= n:
            raise ArityMismatch(f"variable {i} outside 1..{n}")
        return TVar(i)

    def subst(self, m, n, x, ys):
        self._check_args(m, ys)
        return tree_subst(x, ys)

    def carrier_size(self, n):
        return len(trees_up_to(self.sigma, n, self.size_bound))

    def _enumerate(self, n):
        return trees_up_to(self.sigma, n, self.size_bound)


class LazyOp:
    """An n-ary operation on ``range(k)`` given by a rule, memoized."""

    __slots__ = ("k", "arity", "rule", "_memo")

    def __init__(self, k: int, arity: int, rule: Callable):
        self.k = k
        self.arity = arity
        self.rule = rule
        self._memo = {}

    def __call__(self, *args) -> int:
        hit = self._memo.get(args)
        if hit is None:
            hit = self._memo[args] = self.rule(args)
        return hit

    def __repr__(self):
        return f"<LazyOp {self.k}^{self.arity} -> {self.k}>"


def op_apply(x, k: int, args: Sequence[int]) -> int:
    """Apply an Endo element (table or lazy op) over ``range(k)`` to ``args``."""
    if isinstance(x, LazyOp):
        return x(*args)
    idx = 0
    for a in args:
        idx = idx * k + a
    return x[idx]


class EndoClone(Clone):
    """All operations ``Q^n -> Q``; elements are row-major tables or :class:`LazyOp`."""

    def __init__(self, q: int, guard: int = DEFAULT_GUARD):
        self.q = q
        self.guard = guard
        self.name = f"Endo({q})"

    def table_length(self, n):
        return self.q ** n

    def var(self, n, i):
        if not 1 <= i <= n:
            raise ArityMismatch(f"variable {i} outside 1..{n}")
        return _projection(self.q, n, i)

    def subst(self, m, n, x, ys):
        self._check_args(m, ys)
        if isinstance(x, LazyOp) or any(isinstance(y, LazyOp) for y in ys):
            if self.q ** n <= self.guard:
                return tuple(op_apply(x, self.q, [op_apply(y, self.q, pt) for y in ys]) for pt in _points(self.q, n))
            return LazyOp(self.q, n, lambda pt: op_apply(x, self.q, [op_apply(y, self.q, pt) for y in ys]))
        width = self.q ** n
        if m == 0:
            return (x[0],) * width
        args = np.array(ys, dtype=np.int64).reshape(m, width)
        return tuple(kernels.endo_compose(np.asarray(x, dtype=np.int64), args, self.q).tolist())

    def carrier_size(self, n):
        length = self.q ** n
        if length > 64:
            return None if self.q > 1 else 1
        return self.q ** length

    def _enumerate(self, n):
        return tuple(itertools.product(range(self.q), repeat=self.q ** n))

    def index(self, n, x):
        k = 0
        for d in self.key(n, x):
            k = k * self.q + d
        return k

    def key(self, n, x):
        if isinstance(x, LazyOp):
            if self.q ** n > self.guard:
                raise GuardExceeded(f"tabulating a {self.name} operation", self.q ** n, self.guard)
            return tuple(x(*pt) for pt in _points(self.q, n))
        return tuple(x)


@lru_cache(maxsize=None)
def _points(q, n):
    return tuple(itertools.product(range(q), repeat=n))


@lru_cache(maxsize=None)
def _projection(q, n, i):
    return tuple(pt[i - 1] for pt in _points(q, n))


@dataclass(frozen=True)
class FiniteMonoid:
    """A monoid on ``range(size)`` with multiplication table ``mul[a][b] = a*b``."""

    mul: tuple
    unit: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mul", tuple(tuple(r) for r in self.mul))

    @property
    def size(self):
        return len(self.mul)

    def violations(self):
        """First failing monoid law as ``(law, witness)``, or ``None``."""
        r = range(self.size)
        for a in r:
            if self.mul[self.unit][a] != a:
                return "left unit", (a,)
            if self.mul[a][self.unit] != a:
                return "right unit", (a,)
        for a, b, c in itertools.product(r, repeat=3):
            if self.mul[self.mul[a][b]][c] != self.mul[a][self.mul[b][c]]:
                return "associativity", (a, b, c)
        return None

    @classmethod
    def cyclic(cls, k):
        return cls(tuple(tuple((a + b) % k for b in range(k)) for a in range(k)), 0)

    @classmethod
    def trivial(cls):
        return cls(((0,),), 0)


@dataclass(frozen=True)
class MonoidAction:
    monoid: FiniteMonoid
    q: int
    act: tuple  # act[m][x] = m . x

    def __post_init__(self):
        object.__setattr__(self, "act", tuple(tuple(r) for r in self.act))

    def violations(self):
        bad = self.monoid.violations()
        if bad:
            return ("monoid " + bad[0], bad[1])
        if len(self.act) != self.monoid.size or any(len(r) != self.q for r in self.act):
            return "action table shape", (len(self.act), self.q)
        for x in range(self.q):
            if self.act[self.monoid.unit][x] != x:
                return "unit acts as identity", (x,)
        for a, b in itertools.product(range(self.monoid.size), repeat=2):
            for x in range(self.q):
                if self.act[a][self.act[b][x]] != self.act[self.monoid.mul[a][b]][x]:
                    return "action associativity", (a, b, x)
        return None

    def validate(self):
        bad = self.violations()
        if bad:
            raise ActionLawViolation(*bad)
        return self

    @classmethod
    def flip(cls):
        """Z/2 acting on {0, 1} by negation."""
        return cls(FiniteMonoid.cyclic(2), 2, ((0, 1), (1, 0)))

    @classmethod
    def trivial(cls, q):
        return cls(FiniteMonoid.trivial(), q, (tuple(range(q)),))


class ActionClone(Clone):
    """Clone of a monoid action: constants ``(0, q)`` and scaled variables ``(1, m, i)``."""

    def __init__(self, action: MonoidAction, guard: int = DEFAULT_GUARD, validate: bool = True):
        if validate:
            action.validate()
        self.action = action
        self.guard = guard
        self.name = f"Act(M{action.monoid.size},{action.q})"

    def var(self, n, i):
        if not 1 <= i <= n:
            raise ArityMismatch(f"variable {i} outside 1..{n}")
        return (1, self.action.monoid.unit, i)

    def subst(self, m, n, x, ys):
        self._check_args(m, ys)
        if x[0] == 0:
            return x
        _, a, i = x
        u = ys[i - 1]
        if u[0] == 0:
            return (0, self.action.act[a][u[1]])
        return (1, self.action.monoid.mul[a][u[1]], u[2])

    def carrier_size(self, n):
        return self.action.q + self.action.monoid.size * n

    def _enumerate(self, n):
        consts = [(0, q) for q in range(self.action.q)]
        scaled = [(1, a, i) for a in range(self.action.monoid.size) for i in range(1, n + 1)]
        return tuple(consts + scaled)


def make_endo_clone(q: int, guard: int = DEFAULT_GUARD) -> EndoClone:
    return EndoClone(q, guard)


def make_action_clone(action: MonoidAction, guard: int = DEFAULT_GUARD) -> ActionClone:
    return ActionClone(action, guard)


class DeltaClone(Clone):
    """``(dC)_n = C_{n+1}``: adjoin one extra constant variable."""

    def __init__(self, base: Clone):
        self.base = base
        self.guard = base.guard
        self.name = f"d{base.name}"

    def var(self, n, i):
        if not 1 <= i <= n:
            raise ArityMismatch(f"variable {i} outside 1..{n}")
        return self.base.var(n + 1, i)

    def subst(self, m, n, x, ys):
        self._check_args(m, ys)
        return self.base.subst(m + 1, n + 1, x, list(ys) + [self.base.var(n + 1, n + 1)])

    def carrier_size(self, n):
        return self.base.carrier_size(n + 1)

    def _enumerate(self, n):
        return self.base.carrier(n + 1)

    def key(self, n, x):
        return self.base.key(n + 1, x)

    def index(self, n, x):
        return self.base.index(n + 1, x)


def delta(c: Clone) -> DeltaClone:
    return DeltaClone(c)


class ProductClone(Clone):
    """Componentwise product; the empty product is the terminal clone."""

    def __init__(self, parts: Sequence[Clone], guard: int = DEFAULT_GUARD, name: str | None = None):
        self.parts = tuple(parts)
        self.guard = guard
        self.name = name or ("1" if not self.parts else " x ".join(p.name for p in self.parts))

    def var(self, n, i):
        if not 1 <= i <= n:
            raise ArityMismatch(f"variable {i} outside 1..{n}")
        return tuple(p.var(n, i) for p in self.parts)

    def subst(self, m, n, x, ys):
        self._check_args(m, ys)
        return tuple(p.subst(m, n, x[k], [y[k] for y in ys]) for k, p in enumerate(self.parts))

    def carrier_size(self, n):
        total = 1
        for p in self.parts:
            s = p.carrier_size(n)
            if s is None:
                return None
            total *= s
        return total

    def _enumerate(self, n):
        return tuple(itertools.product(*(p.carrier(n) for p in self.parts)))

    def key(self, n, x):
        return tuple(p.key(n, e) for p, e in zip(self.parts, x))

    def index(self, n, x):
        k = 0
        for p, e in zip(self.parts, x):
            k = k * p.carrier_size(n) + p.index(n, e)
        return k


def power_clone(c: Clone, k: int, guard: int = DEFAULT_GUARD) -> ProductClone:
    return ProductClone([c] * k, guard, name=f"{c.name}^{k}")


def terminal_clone() -> ProductClone:
    return ProductClone([])


def derived_clones(kind: str, *args, **kw) -> Clone:
    """Dispatch to ``product``, ``power``, ``terminal``, ``image`` or ``delta``."""
    makers = {
        "product": lambda parts: ProductClone(parts, **kw),
        "power": lambda c, k: power_clone(c, k, **kw),
        "terminal": terminal_clone,
        "image": lambda p, max_arity=3: ImageClone(p, max_arity, **kw),
        "delta": delta,
    }
    return makers[kind](*args)


class ImageClone(Clone):
    """Subclone of ``p.target`` consisting of the values ``p(t)`` of trees.

    Carriers are closed under the letters by a fixpoint, which also records
    the least tree reaching each element.
    """

    def __init__(self, p: "FreeMorphism", max_arity: int = 3, guard: int = DEFAULT_GUARD):
        self.p = p
        self.inner = p.target
        self.max_arity = max_arity
        self.guard = guard
        self.name = f"Im({p.name})"
        self._closure = {}

    def closure(self, n: int) -> dict:
        """Map from element key to (element, least witness tree)."""
        if n in self._closure:
            return self._closure[n]
        if n > self.max_arity:
            raise GuardExceeded(f"image carrier at arity {n}", n, self.max_arity)
        target, sigma = self.inner, self.p.sigma
        found = {}
        for i in range(1, n + 1):
            e = target.var(n, i)
            found.setdefault(target.key(n, e), (e, TVar(i)))
        frontier = True
        while frontier:
            frontier = False
            current = sorted(found.values(), key=lambda ew: tree_key(ew[1]))
            for j, a in enumerate(sigma.arities, start=1):
                for combo in itertools.product(current, repeat=a):
                    e = target.subst(a, n, self.p.assignment[j - 1], [c[0] for c in combo])
                    k = target.key(n, e)
                    w = Node(j, tuple(c[1] for c in combo))
                    old = found.get(k)
                    if old is None:
                        found[k] = (e, w)
                        frontier = True
                        if len(found) > self.guard:
                            raise GuardExceeded("image carrier", len(found), self.guard)
                    elif tree_key(w) < tree_key(old[1]):
                        found[k] = (old[0], w)
        self._closure[n] = found
        return found

    def var(self, n, i):
        return self.inner.var(n, i)

    def subst(self, m, n, x, ys):
        return self.inner.subst(m, n, x, ys)

    def carrier_size(self, n):
        return len(self.closure(n))

    def _enumerate(self, n):
        items = self.closure(n)
        return tuple(items[k][0] for k in sorted(items, key=lambda k: self._order_key(n, k)))

    def _order_key(self, n, k):
        try:
            return (0, self.inner.index(n, self.closure(n)[k][0]))
        except GuardExceeded:
            return (1, tree_key(self.closure(n)[k][1]))

    def witness(self, n, x) -> Tree:
        return self.closure(n)[self.inner.key(n, x)][1]

    def key(self, n, x):
        return self.inner.key(n, x)


def image_clone(p: "FreeMorphism", max_arity: int = 3, guard: int = DEFAULT_GUARD) -> ImageClone:
    return ImageClone(p, max_arity, guard)


# ---------------------------------------------------------------------------
# Morphisms


class CloneMorphism:
    source: Clone
    target: Clone
    name = "morphism"

    def apply(self, n: int, x):
        raise NotImplementedError

    def __repr__(self):
        return f"{self.name}: {self.source.name} -> {self.target.name}"


class FunctionMorphism(CloneMorphism):
    def __init__(self, source, target, fn, name):
        self.source = source
        self.target = target
        self._fn = fn
        self.name = name

    def apply(self, n, x):
        return self._fn(n, x)


def identity_morphism(c: Clone) -> FunctionMorphism:
    return FunctionMorphism(c, c, lambda n, x: x, f"id[{c.name}]")


def projection_morphism(prod: ProductClone, k: int) -> FunctionMorphism:
    return FunctionMorphism(prod, prod.parts[k], lambda n, x: x[k], f"pi{k + 1}[{prod.name}]")


def inclusion_morphism(img: ImageClone) -> FunctionMorphism:
    return FunctionMorphism(img, img.inner, lambda n, x: x, f"incl[{img.name}]")


class FreeMorphism(CloneMorphism):
    """A morphism out of a free clone, given by its letter assignment."""

    def __init__(self, sigma: RankedAlphabet, target: Clone, assignment: Sequence, size_bound: int = 5):
        if len(assignment) != len(sigma):
            raise ArityMismatch(f"assignment has {len(assignment)} letters, alphabet has {len(sigma)}")
        self.sigma = sigma
        self.target = target
        self.assignment = tuple(assignment)
        self.source = FreeClone(sigma, size_bound, target.guard)
        self.name = f"p[{target.name}]"

    def apply(self, n, t):
        return eval_morphism(self, t, n)

    def key(self):
        return tuple(self.target.key(a, x) for a, x in zip(self.sigma.arities, self.assignment))

    def __eq__(self, other):
        return isinstance(other, FreeMorphism) and self.sigma == other.sigma and self.target is other.target and self.key() == other.key()

    def __hash__(self):
        return hash((self.sigma, id(self.target), self.key()))


def enumerate_morphisms(sigma: RankedAlphabet, c: Clone, guard: int | None = None) -> list:
    """All morphisms ``F(sigma) -> c``, lexicographic in the carrier orders."""
    guard = c.guard if guard is None else guard
    count = morphism_count(sigma, c)
    if count is None or count > guard:
        raise GuardExceeded(f"morphisms F{list(sigma.arities)} -> {c.name}", count if count is not None else float("inf"), guard)
    pools = [c.carrier(a) for a in sigma.arities]
    return [FreeMorphism(sigma, c, combo) for combo in itertools.product(*pools)]


def morphism_count(sigma: RankedAlphabet, c: Clone):
    total = 1
    for a in sigma.arities:
        s = c.carrier_size(a)
        if s is None:
            return None
        total *= s
    return total


def morphism_index(p: FreeMorphism) -> int:
    k = 0
    for a, x in zip(p.sigma.arities, p.assignment):
        k = k * p.target.carrier_size(a) + p.target.index(a, x)
    return k


def eval_morphism(p: FreeMorphism, t: Tree, n: int | None = None):
    """The unique extension of a letter assignment, folded over ``t``."""
    if n is None:
        n = max_var(t)
    c = p.target

    def fold(u):
        if isinstance(u, TVar):
            return c.var(n, u.index)
        a = p.sigma.arity(u.letter)
        if len(u.children) != a:
            raise ArityMismatch(f"letter a{u.letter} has arity {a}")
        return c.subst(a, n, p.assignment[u.letter - 1], [fold(k) for k in u.children])

    return fold(t)


def max_var(t: Tree) -> int:
    if isinstance(t, TVar):
        return t.index
    return max((max_var(c) for c in t.children), default=0)


def eval_tree_batch(sigma: RankedAlphabet, q: int, tables: Sequence[np.ndarray], t: Tree, n: int) -> np.ndarray:
    """Evaluate ``t`` under many morphisms into Endo(q) at once.

    ``tables[j]`` is a ``(P, q**n_j)`` array holding letter ``j+1`` for each of
    ``P`` morphisms; the result is ``(P, q**n)``.
    """
    p = tables[0].shape[0] if tables else 1
    width = q ** n
    cache = {}

    def fold(u):
        if u in cache:
            return cache[u]
        if isinstance(u, TVar):
            row = np.asarray(_projection(q, n, u.index), dtype=np.int64)
            out = np.broadcast_to(row, (p, width))
        else:
            a = sigma.arity(u.letter)
            head = tables[u.letter - 1]
            if a == 0:
                out = np.broadcast_to(head[:, :1], (p, width))
            else:
                args = np.stack([np.ascontiguousarray(fold(k)) for k in u.children])
                out = kernels.endo_compose_batch(np.ascontiguousarray(head), args, q)
        cache[u] = out
        return out

    return np.ascontiguousarray(fold(t))


def assignment_tables(sigma: RankedAlphabet, morphisms: Sequence[FreeMorphism]) -> list:
    return [np.array([m.assignment[j] for m in morphisms], dtype=np.int64).reshape(len(morphisms), -1)
            for j in range(len(sigma))]


def compose_free(p: FreeMorphism, phi: CloneMorphism) -> FreeMorphism:
    """``phi . p`` as a letter assignment."""
    return FreeMorphism(p.sigma, phi.target, [phi.apply(a, x) for a, x in zip(p.sigma.arities, p.assignment)])


def surjection_morphism(img: ImageClone, sigma_bound: int = 5) -> FreeMorphism:
    """The corestriction ``F(sigma) -> Im(p)``."""
    return FreeMorphism(img.p.sigma, img, img.p.assignment, sigma_bound)


class OpClone(Clone):
    """Operations on an arbitrary set, compared pointwise on a finite sample of it.

    Elements are callables taking a tuple of points.  This is the Cayley target
    for clones whose carriers are only enumerated up to a bound.
    """

    def __init__(self, points: Sequence, name: str, guard: int = DEFAULT_GUARD):
        self.points = tuple(points)
        self.guard = guard
        self.name = name

    def var(self, n, i):
        if not 1 <= i <= n:
            raise ArityMismatch(f"variable {i} outside 1..{n}")
        return lambda args: args[i - 1]

    def subst(self, m, n, x, ys):
        self._check_args(m, ys)
        ys = tuple(ys)
        return lambda args: x(tuple(y(args) for y in ys))

    def carrier_size(self, n):
        return None

    def eq(self, n, x, y):
        total = len(self.points) ** n
        if total > self.guard:
            raise GuardExceeded(f"pointwise comparison in {self.name}", total, self.guard)
        return all(x(pt) == y(pt) for pt in itertools.product(self.points, repeat=n))


class CayleyMorphism(CloneMorphism):
    """``cay^m : C -> Endo(C_m)``.

    When ``C_m`` is finite its elements are identified with carrier indices and
    the target is ``Endo(|C_m|)``; otherwise the target is an :class:`OpClone`.
    """

    def __init__(self, c: Clone, m: int):
        self.source = c
        self.m = m
        self.name = f"cay^{m}[{c.name}]"
        self.finite = not isinstance(c, FreeClone) and c.enumerable(m)
        if self.finite:
            self.elements = c.carrier(m)
            self.k = len(self.elements)
            self.target = EndoClone(self.k, c.guard)
        else:
            self.target = OpClone(c.carrier(m), f"Op({c.name}_{m})", c.guard)

    def apply(self, n, x):
        c, m = self.source, self.m
        if not self.finite:
            return lambda args: c.subst(n, m, x, list(args))
        els = self.elements

        def rule(idx):
            return c.index(m, c.subst(n, m, x, [els[i] for i in idx]))

        if self.k ** n <= self.source.guard:
            return tuple(rule(pt) for pt in itertools.product(range(self.k), repeat=n))
        return LazyOp(self.k, n, rule)


def cay(c: Clone, m: int) -> CayleyMorphism:
    return CayleyMorphism(c, m)


def appvar(c: Clone, n: int, f) -> object:
    """Apply an element of ``Endo(C_n)_n`` to the variables of ``C_n``."""
    k = c.carrier_size(n)
    idx = [c.index(n, c.var(n, i)) for i in range(1, n + 1)]
    return c.carrier(n)[op_apply(f, k, idx)]


def endo_drop_iso(q: int, guard: int = DEFAULT_GUARD):
    """The isomorphism ``d Endo(q) -> prod_q Endo(q)``, ``f |-> (r |-> f(-, r))``, and its inverse."""
    dendo = DeltaClone(EndoClone(q, guard))
    prod = power_clone(EndoClone(q, guard), q, guard)

    def fwd(n, f):
        return tuple(tuple(f[k * q + r] for k in range(q ** n)) for r in range(q))

    def bwd(n, fs):
        return tuple(fs[r][k] for k in range(q ** n) for r in range(q))

    return (FunctionMorphism(dendo, prod, fwd, f"drop[{q}]"),
            FunctionMorphism(prod, dendo, bwd, f"undrop[{q}]"))


# ---------------------------------------------------------------------------
# Checkers


@dataclass
class LawReport:
    subject: str
    passed: bool = True
    exhaustive: bool = True
    counts: dict = field(default_factory=dict)
    counterexample: object = None

    def record(self, law, ok, witness):
        self.counts[law] = self.counts.get(law, 0) + 1
        if not ok and self.passed:
            self.passed = False
            self.counterexample = (law,) + tuple(witness)
        return ok

    def as_dict(self):
        return {
            "subject": self.subject,
            "passed": self.passed,
            "exhaustive": self.exhaustive,
            "counts": dict(sorted(self.counts.items())),
            "counterexample": None if self.counterexample is None else [str(w) for w in self.counterexample],
        }


def _grid(pools, limit, samples, rng, report):
    """Exhaustive product of pools when small, otherwise seeded random draws."""
    total = 1
    for p in pools:
        total *= len(p)
    if total == 0:
        return []
    if total <= limit:
        return list(itertools.product(*pools))
    report.exhaustive = False
    return [tuple(p[rng.randrange(len(p))] for p in pools) for _ in range(samples)]


def check_clone_laws(c: Clone, arity_bound: int = 2, samples: int = 2000, seed: int = 0,
                     exhaustive_limit: int = 20000) -> LawReport:
    """Check left unit, projection and associativity up to ``arity_bound``."""
    rng = random.Random(seed)
    report = LawReport(c.name)
    arities = range(arity_bound + 1)
    for n in arities:
        vs = [c.var(n, i) for i in range(1, n + 1)]
        for x in _grid([c.carrier(n)], exhaustive_limit, samples, rng, report):
            x = x[0]
            if not report.record("left unit", c.eq(n, c.subst(n, n, x, vs), x), (n, x)):
                return report
    for m, n in itertools.product(arities, repeat=2):
        for ys in _grid([c.carrier(n)] * m, exhaustive_limit, samples, rng, report):
            for i in range(1, m + 1):
                if not report.record("projection", c.eq(n, c.subst(m, n, c.var(m, i), list(ys)), ys[i - 1]), (m, n, i, ys)):
                    return report
    for m, n, k in itertools.product(arities, repeat=3):
        tabulated = _tabulated_associativity(c, m, n, k)
        if tabulated is not None:
            total, bad = tabulated
            report.counts["associativity"] = report.counts.get("associativity", 0) + total
            if bad is not None:
                report.passed = False
                report.counterexample = ("associativity", m, n, k) + bad
                return report
            continue
        pools = [c.carrier(m)] + [c.carrier(n)] * m + [c.carrier(k)] * n
        for combo in _grid(pools, exhaustive_limit, samples, rng, report):
            x, ys, zs = combo[0], list(combo[1:1 + m]), list(combo[1 + m:])
            lhs = c.subst(n, k, c.subst(m, n, x, ys), zs)
            rhs = c.subst(m, k, x, [c.subst(n, k, y, zs) for y in ys])
            if not report.record("associativity", c.eq(k, lhs, rhs), (m, n, k, x, ys, zs)):
                return report
    return report


TABLE_LIMIT = 1 << 17
GRID_LIMIT = 1 << 22


def subst_table(c: Clone, m: int, n: int) -> np.ndarray:
    """``T[x, ys]`` = carrier index of ``subst(x; ys)``, with ``ys`` flattened row-major."""
    cache = c.__dict__.setdefault("_subst_tables", {})
    if (m, n) not in cache:
        xs, yn = c.carrier(m), c.carrier(n)
        out = np.empty((len(xs), len(yn) ** m), dtype=np.int64)
        for a, x in enumerate(xs):
            for b, ys in enumerate(itertools.product(yn, repeat=m)):
                out[a, b] = c.index(n, c.subst(m, n, x, list(ys)))
        cache[(m, n)] = out
    return cache[(m, n)]


def _tabulated_associativity(c, m, n, k):
    """Exhaustive associativity through substitution tables, or ``None`` if too large."""
    if isinstance(c, (FreeClone, OpClone)):
        return None
    sizes = {}
    for a in {m, n, k}:
        s = c.carrier_size(a)
        if s is None or s > c.guard:
            return None
        sizes[a] = s
    cm, cn, ck = sizes[m], sizes[n], sizes[k]
    if max(cm * cn ** m, cn * ck ** n, cm * ck ** m) > TABLE_LIMIT or cm * cn ** m * ck ** n > GRID_LIMIT:
        return None
    try:
        t_mn, t_nk, t_mk = subst_table(c, m, n), subst_table(c, n, k), subst_table(c, m, k)
    except KeyError:
        # truncated carrier not closed under substitution
        return None
    total = cm * cn ** m * ck ** n
    if total == 0:
        return 0, None
    lhs = t_nk[t_mn][:, :, :]  # (x, ys, zs)
    ys = np.arange(cn ** m, dtype=np.int64)
    inner = np.zeros((cn ** m, ck ** n), dtype=np.int64)
    for i in range(m):
        digit = (ys // cn ** (m - 1 - i)) % cn
        inner = inner * ck + t_nk[digit]
    rhs = t_mk[:, inner]
    bad = np.argwhere(lhs != rhs)
    if bad.size == 0:
        return total, None
    x, y, z = (int(v) for v in bad[0])
    ytuple = [c.carrier(n)[(y // cn ** (m - 1 - i)) % cn] for i in range(m)]
    ztuple = [c.carrier(k)[(z // ck ** (n - 1 - i)) % ck] for i in range(n)]
    return total, (c.carrier(m)[x], ytuple, ztuple)


def check_morphism(phi: CloneMorphism, arity_bound: int = 2, samples: int = 2000, seed: int = 0,
                   exhaustive_limit: int = 20000) -> LawReport:
    """Check preservation of variables and of substitution."""
    rng = random.Random(seed)
    src, tgt = phi.source, phi.target
    report = LawReport(phi.name)
    arities = range(arity_bound + 1)
    for n in arities:
        for i in range(1, n + 1):
            if not report.record("variables", tgt.eq(n, phi.apply(n, src.var(n, i)), tgt.var(n, i)), (n, i)):
                return report
    for m, n in itertools.product(arities, repeat=2):
        pools = [src.carrier(m)] + [src.carrier(n)] * m
        for combo in _grid(pools, exhaustive_limit, samples, rng, report):
            x, ys = combo[0], list(combo[1:])
            lhs = phi.apply(n, src.subst(m, n, x, ys))
            rhs = tgt.subst(m, n, phi.apply(m, x), [phi.apply(n, y) for y in ys])
            if not report.record("substitution", tgt.eq(n, lhs, rhs), (m, n, x, ys)):
                return report
    return report


class MutatedClone(Clone):
    """A clone with one deliberately broken operation, for mutation testing."""

    MODES = ("swap-subst", "reverse-vars", "collapse-constants")

    def __init__(self, base: Clone, mode: str):
        if mode not in self.MODES:
            raise ValueError(f"unknown mutation {mode!r}")
        self.base = base
        self.mode = mode
        self.guard = base.guard
        self.name = f"{base.name}!{mode}"

    def var(self, n, i):
        if self.mode == "reverse-vars" and n >= 2:
            return self.base.var(n, n + 1 - i)
        return self.base.var(n, i)

    def subst(self, m, n, x, ys):
        out = self.base.subst(m, n, x, ys)
        if self.mode == "swap-subst" and m == 2 and self.base.enumerable(n):
            els = self.base.carrier(n)
            if len(els) > 1:
                return els[(self.base.index(n, out) + 1) % len(els)]
        if self.mode == "collapse-constants" and m == 0 and n >= 1:
            return self.base.var(n, 1)
        return out

    def carrier_size(self, n):
        return self.base.carrier_size(n)

    def _enumerate(self, n):
        return self.base.carrier(n)

    def key(self, n, x):
        return self.base.key(n, x)
