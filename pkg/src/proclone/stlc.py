"""Simply typed lambda calculus with finite products.

Terms are nameless (de Bruijn indices, ``Var(0)`` is the innermost binder) and
every abstraction carries the type of its parameter, so typing is
syntax-directed.  Products are n-ary; the empty product doubles as the unit
type and the empty tuple as the unit value.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union

from .errors import GuardExceeded, ParseError, ScopeError, TypeCheckError

# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class Base:
    def __str__(self):
        return "o"


@dataclass(frozen=True)
class Arrow:
    dom: "SimpleType"
    cod: "SimpleType"

    def __str__(self):
        left = str(self.dom)
        if isinstance(self.dom, Arrow):
            left = f"({left})"
        return f"{left} -> {self.cod}"


@dataclass(frozen=True)
class Prod:
    items: tuple

    def __str__(self):
        if not self.items:
            return "1"
        parts = [f"({a})" if isinstance(a, Arrow) else str(a) for a in self.items]
        if len(parts) == 1:
            return f"({parts[0]} *)"
        return "(" + " * ".join(parts) + ")"


SimpleType = Union[Base, Arrow, Prod]

O = Base()
UNIT = Prod(())


def arrows(doms: Sequence[SimpleType], cod: SimpleType) -> SimpleType:
    """Curried arrow ``d1 -> d2 -> ... -> cod``."""
    for d in reversed(doms):
        cod = Arrow(d, cod)
    return cod


def prod(*items: SimpleType) -> Prod:
    return Prod(tuple(items))


def power(a: SimpleType, n: int) -> Prod:
    return Prod((a,) * n)


def type_depth(a: SimpleType) -> int:
    if isinstance(a, Base):
        return 0
    if isinstance(a, Arrow):
        return 1 + max(type_depth(a.dom), type_depth(a.cod))
    return 1 + max((type_depth(b) for b in a.items), default=0)


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Lam:
    ty: SimpleType
    body: "Term"


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Tup:
    items: tuple


@dataclass(frozen=True)
class Proj:
    subject: "Term"
    index: int  # 1-based


Term = Union[Var, Lam, App, Tup, Proj]

UNIT_VALUE = Tup(())


def apps(fn: Term, *args: Term) -> Term:
    for a in args:
        fn = App(fn, a)
    return fn


def lams(tys: Sequence[SimpleType], body: Term) -> Term:
    for ty in reversed(tys):
        body = Lam(ty, body)
    return body


def term_size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    if isinstance(t, Lam):
        return 1 + term_size(t.body)
    if isinstance(t, App):
        return 1 + term_size(t.fn) + term_size(t.arg)
    if isinstance(t, Tup):
        return 1 + sum(term_size(u) for u in t.items)
    return 1 + term_size(t.subject)


def alpha_eq(t: Term, u: Term) -> bool:
    # binders are nameless, so alpha-equivalence is structural equality
    return t == u


# ---------------------------------------------------------------------------
# Typing


def typecheck(ctx: Sequence[SimpleType], t: Term, _loc: str = "") -> SimpleType:
    """Return the unique type of ``t`` in ``ctx`` (innermost variable last)."""
    if isinstance(t, Var):
        if t.index < 0 or t.index >= len(ctx):
            raise ScopeError(f"variable index {t.index} out of scope (context length {len(ctx)}) at {_loc or '<root>'}")
        return ctx[len(ctx) - 1 - t.index]
    if isinstance(t, Lam):
        body = typecheck([*ctx, t.ty], t.body, _loc + ".body")
        return Arrow(t.ty, body)
    if isinstance(t, App):
        fn = typecheck(ctx, t.fn, _loc + ".fn")
        if not isinstance(fn, Arrow):
            raise TypeCheckError(_loc + ".fn", "an arrow type", fn)
        arg = typecheck(ctx, t.arg, _loc + ".arg")
        if arg != fn.dom:
            raise TypeCheckError(_loc + ".arg", fn.dom, arg)
        return fn.cod
    if isinstance(t, Tup):
        return Prod(tuple(typecheck(ctx, u, f"{_loc}.{k + 1}") for k, u in enumerate(t.items)))
    if isinstance(t, Proj):
        subj = typecheck(ctx, t.subject, _loc + ".subject")
        if not isinstance(subj, Prod):
            raise TypeCheckError(_loc + ".subject", "a product type", subj)
        if not 1 <= t.index <= len(subj.items):
            raise TypeCheckError(_loc, f"a projection index in 1..{len(subj.items)}", t.index)
        return subj.items[t.index - 1]
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Shifting and substitution


def shift(t: Term, by: int, cutoff: int = 0) -> Term:
    if isinstance(t, Var):
        if t.index < cutoff:
            return t
        if t.index + by < 0:
            raise ScopeError(f"shifting Var({t.index}) by {by} leaves scope")
        return Var(t.index + by)
    if isinstance(t, Lam):
        return Lam(t.ty, shift(t.body, by, cutoff + 1))
    if isinstance(t, App):
        return App(shift(t.fn, by, cutoff), shift(t.arg, by, cutoff))
    if isinstance(t, Tup):
        return Tup(tuple(shift(u, by, cutoff) for u in t.items))
    return Proj(shift(t.subject, by, cutoff), t.index)


def substitute(t: Term, depth: int, s: Term) -> Term:
    """Replace ``Var(depth)`` in ``t`` by ``s`` and remove that binder.

    ``s`` lives in the context outside the removed binder; it is shifted as it
    travels under the binders of ``t``.  Variables above ``depth`` move down by
    one.  ``substitute(body, 0, arg)`` is beta contraction.
    """
    if depth < 0:
        raise ScopeError(f"negative substitution depth {depth}")
    if isinstance(t, Var):
        if t.index < 0:
            raise ScopeError(f"malformed variable index {t.index}")
        if t.index == depth:
            return shift(s, depth)
        if t.index > depth:
            return Var(t.index - 1)
        return t
    if isinstance(t, Lam):
        return Lam(t.ty, substitute(t.body, depth + 1, s))
    if isinstance(t, App):
        return App(substitute(t.fn, depth, s), substitute(t.arg, depth, s))
    if isinstance(t, Tup):
        return Tup(tuple(substitute(u, depth, s) for u in t.items))
    return Proj(substitute(t.subject, depth, s), t.index)


def reduce_step(t: Term) -> Term | None:
    """Contract the leftmost-outermost beta or projection redex, if any."""
    if isinstance(t, App):
        if isinstance(t.fn, Lam):
            return substitute(t.fn.body, 0, t.arg)
        r = reduce_step(t.fn)
        if r is not None:
            return App(r, t.arg)
        r = reduce_step(t.arg)
        return None if r is None else App(t.fn, r)
    if isinstance(t, Proj):
        if isinstance(t.subject, Tup):
            return t.subject.items[t.index - 1]
        r = reduce_step(t.subject)
        return None if r is None else Proj(r, t.index)
    if isinstance(t, Lam):
        r = reduce_step(t.body)
        return None if r is None else Lam(t.ty, r)
    if isinstance(t, Tup):
        for k, u in enumerate(t.items):
            r = reduce_step(u)
            if r is not None:
                return Tup(t.items[:k] + (r,) + t.items[k + 1:])
    return None


def redexes(t: Term) -> list[Term]:
    """Every term obtained from ``t`` by contracting exactly one redex."""
    out: list[Term] = []
    if isinstance(t, App):
        if isinstance(t.fn, Lam):
            out.append(substitute(t.fn.body, 0, t.arg))
        out += [App(r, t.arg) for r in redexes(t.fn)]
        out += [App(t.fn, r) for r in redexes(t.arg)]
    elif isinstance(t, Proj):
        if isinstance(t.subject, Tup):
            out.append(t.subject.items[t.index - 1])
        out += [Proj(r, t.index) for r in redexes(t.subject)]
    elif isinstance(t, Lam):
        out += [Lam(t.ty, r) for r in redexes(t.body)]
    elif isinstance(t, Tup):
        for k, u in enumerate(t.items):
            out += [Tup(t.items[:k] + (r,) + t.items[k + 1:]) for r in redexes(u)]
    return out


# ---------------------------------------------------------------------------
# Normalization by evaluation: beta-normal, eta-long forms


@dataclass(frozen=True)
class _NVar:
    level: int


@dataclass(frozen=True)
class _NApp:
    fn: object
    arg: object
    arg_ty: SimpleType


@dataclass(frozen=True)
class _NProj:
    subject: object
    index: int


DEFAULT_STEP_BUDGET = 5_000_000


class _Budget:
    __slots__ = ("left", "total")

    def __init__(self, total):
        self.total = total
        self.left = total

    def tick(self):
        self.left -= 1
        if self.left < 0:
            raise GuardExceeded("normalization steps", self.total + 1, self.total)


def _reflect(ne, ty):
    if isinstance(ty, Arrow):
        return lambda v: _reflect(_NApp(ne, v, ty.dom), ty.cod)
    if isinstance(ty, Prod):
        return tuple(_reflect(_NProj(ne, k + 1), a) for k, a in enumerate(ty.items))
    return ne


def _eval(t, env, budget):
    budget.tick()
    if isinstance(t, Var):
        return env[len(env) - 1 - t.index]
    if isinstance(t, Lam):
        body = t.body
        return lambda v: _eval(body, (*env, v), budget)
    if isinstance(t, App):
        return _eval(t.fn, env, budget)(_eval(t.arg, env, budget))
    if isinstance(t, Tup):
        return tuple(_eval(u, env, budget) for u in t.items)
    return _eval(t.subject, env, budget)[t.index - 1]


def _reify(v, ty, depth):
    if isinstance(ty, Arrow):
        return Lam(ty.dom, _reify(v(_reflect(_NVar(depth), ty.dom)), ty.cod, depth + 1))
    if isinstance(ty, Prod):
        return Tup(tuple(_reify(x, a, depth) for x, a in zip(v, ty.items)))
    return _readback(v, depth)


def _readback(ne, depth):
    if isinstance(ne, _NVar):
        return Var(depth - 1 - ne.level)
    if isinstance(ne, _NApp):
        return App(_readback(ne.fn, depth), _reify(ne.arg, ne.arg_ty, depth))
    return Proj(_readback(ne.subject, depth), ne.index)


def normalize(ctx: Sequence[SimpleType], t: Term, budget: int = DEFAULT_STEP_BUDGET) -> Term:
    """Canonical beta-normal eta-long form of a well-typed term."""
    ty = typecheck(ctx, t)
    env = tuple(_reflect(_NVar(k), a) for k, a in enumerate(ctx))
    return _reify(_eval(t, env, _Budget(budget)), ty, len(ctx))


def beta_eta_equal(ctx: Sequence[SimpleType], t: Term, u: Term) -> bool:
    return normalize(ctx, t) == normalize(ctx, u)


# ---------------------------------------------------------------------------
# Concrete syntax

_TOKEN = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<lam>\\|λ)|(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9']*)|(?P<sym>[().:,<>*]))"
)


class _Lexer:
    def __init__(self, src: str):
        self.src = src
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while True:
            m = _TOKEN.match(src, pos)
            if m is None or m.end() == pos:
                rest = src[pos:]
                if rest.strip():
                    off = pos + len(rest) - len(rest.lstrip())
                    raise ParseError(f"unexpected character {src[off]!r}", *self.linecol(off))
                break
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.tokens.append(("eof", "", len(src)))
        self.i = 0

    def linecol(self, offset):
        line = self.src.count("\n", 0, offset) + 1
        col = offset - (self.src.rfind("\n", 0, offset) + 1) + 1
        return line, col

    def peek(self, k=0):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, val, off = self.next()
        if val != text or kind == "eof":
            raise ParseError(f"expected {text!r}, found {val or 'end of input'!r}", *self.linecol(off))

    def fail(self, message):
        raise ParseError(message, *self.linecol(self.peek()[2]))

    def at(self, text):
        kind, val, _ = self.peek()
        return kind != "eof" and val == text


def _parse_type(lx: _Lexer) -> SimpleType:
    left = _parse_type_atom(lx)
    if lx.at("->"):
        lx.next()
        return Arrow(left, _parse_type(lx))
    return left


def _parse_type_atom(lx: _Lexer) -> SimpleType:
    kind, val, _ = lx.peek()
    if kind == "ident" and val == "o":
        lx.next()
        return O
    if kind == "num" and val == "1":
        lx.next()
        return UNIT
    if val == "(" and kind == "sym":
        lx.next()
        if lx.at(")"):
            lx.next()
            return UNIT
        items = [_parse_type(lx)]
        starred = False
        while lx.at("*"):
            lx.next()
            starred = True
            if lx.at(")"):
                break
            items.append(_parse_type(lx))
        lx.expect(")")
        return Prod(tuple(items)) if starred else items[0]
    lx.fail(f"expected a type, found {val or 'end of input'!r}")


def _parse_term(lx: _Lexer, names: list[str]) -> Term:
    if lx.peek()[0] == "lam":
        lx.next()
        kind, name, off = lx.next()
        if kind != "ident":
            raise ParseError("expected a binder name", *lx.linecol(off))
        lx.expect(":")
        ty = _parse_type(lx)
        lx.expect(".")
        return Lam(ty, _parse_term(lx, [*names, name]))
    fn = _parse_postfix(lx, names)
    while True:
        kind, val, _ = lx.peek()
        if kind == "lam":
            return App(fn, _parse_term(lx, names))
        if kind == "ident" or (kind == "sym" and val in "(<"):
            fn = App(fn, _parse_postfix(lx, names))
        else:
            return fn


def _parse_postfix(lx: _Lexer, names: list[str]) -> Term:
    t = _parse_atom(lx, names)
    while lx.at(".") and lx.peek(1)[0] == "num":
        lx.next()
        t = Proj(t, int(lx.next()[1]))
    return t


def _parse_atom(lx: _Lexer, names: list[str]) -> Term:
    kind, val, off = lx.next()
    if kind == "ident":
        for k in range(len(names) - 1, -1, -1):
            if names[k] == val:
                return Var(len(names) - 1 - k)
        raise ParseError(f"unbound variable {val!r}", *lx.linecol(off))
    if val == "(":
        if lx.at(")"):
            lx.next()
            return UNIT_VALUE
        t = _parse_term(lx, names)
        lx.expect(")")
        return t
    if val == "<":
        items = []
        while not lx.at(">"):
            items.append(_parse_term(lx, names))
            if not lx.at(","):
                break
            lx.next()
        lx.expect(">")
        return Tup(tuple(items))
    raise ParseError(f"unexpected {val or 'end of input'!r}", *lx.linecol(off))


def parse_type(src: str) -> SimpleType:
    lx = _Lexer(src)
    ty = _parse_type(lx)
    if lx.peek()[0] != "eof":
        lx.fail(f"trailing input {lx.peek()[1]!r}")
    return ty


def parse_term(src: str, free: Sequence[str] = ()) -> Term:
    """Parse named surface syntax; ``free`` names the context, innermost last."""
    lx = _Lexer(src)
    t = _parse_term(lx, list(free))
    if lx.peek()[0] != "eof":
        lx.fail(f"trailing input {lx.peek()[1]!r}")
    return t


def show(t: Term, free: Sequence[str] = ()) -> str:
    """Render ``t`` in the surface syntax accepted by :func:`parse_term`."""
    def go(t, names, pos):
        # pos: 0 = top, 1 = function position, 2 = argument position
        if isinstance(t, Var):
            if t.index >= len(names):
                raise ScopeError(f"cannot show free Var({t.index})")
            return names[len(names) - 1 - t.index]
        if isinstance(t, Lam):
            x = fresh_in(names)
            s = f"\\{x}:{t.ty}. {go(t.body, [*names, x], 0)}"
            return s if pos == 0 else f"({s})"
        if isinstance(t, App):
            s = f"{go(t.fn, names, 1)} {go(t.arg, names, 2)}"
            return s if pos < 2 else f"({s})"
        if isinstance(t, Tup):
            if not t.items:
                return "()"
            return "<" + ", ".join(go(u, names, 0) for u in t.items) + ">"
        return f"{go(t.subject, names, 3)}.{t.index}"

    def fresh_in(names):
        k = len(names)
        while f"x{k}" in names:
            k += 1
        return f"x{k}"

    return go(t, list(free), 0)
