import random

import pytest
from hypothesis import settings

from proclone.stlc import App, Arrow, Lam, O, Prod, Proj, Tup, UNIT, Var

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

SMALL_TYPES = [O, Arrow(O, O), Prod((O, O)), UNIT, Arrow(Arrow(O, O), O), Arrow(O, Arrow(O, O))]


def random_type(rng: random.Random, depth: int = 2):
    if depth == 0 or rng.random() < 0.35:
        return O
    k = rng.random()
    if k < 0.6:
        return Arrow(random_type(rng, depth - 1), random_type(rng, depth - 1))
    if k < 0.9:
        return Prod(tuple(random_type(rng, depth - 1) for _ in range(rng.randint(1, 2))))
    return UNIT


def random_term(rng: random.Random, ctx: tuple, ty, depth: int = 3):
    """A random well-typed term of ``ty`` in ``ctx`` (innermost last), possibly with redexes."""
    hits = [i for i, a in enumerate(reversed(ctx)) if a == ty]
    if hits and (depth == 0 or rng.random() < 0.3):
        return Var(rng.choice(hits))
    if depth > 0 and rng.random() < 0.25:
        a = random_type(rng, 1)
        return App(Lam(a, random_term(rng, ctx + (a,), ty, depth - 1)), random_term(rng, ctx, a, depth - 1))
    if depth > 0 and rng.random() < 0.15:
        other = random_type(rng, 1)
        tup = Tup((random_term(rng, ctx, ty, depth - 1), random_term(rng, ctx, other, depth - 1)))
        return Proj(tup, 1)
    if isinstance(ty, Arrow):
        return Lam(ty.dom, random_term(rng, ctx + (ty.dom,), ty.cod, max(depth - 1, 0)))
    if isinstance(ty, Prod):
        return Tup(tuple(random_term(rng, ctx, a, max(depth - 1, 0)) for a in ty.items))
    fns = [i for i, a in enumerate(reversed(ctx)) if isinstance(a, Arrow) and a.cod == ty]
    if fns and depth > 0:
        i = rng.choice(fns)
        dom = ctx[len(ctx) - 1 - i].dom
        return App(Var(i), random_term(rng, ctx, dom, depth - 1))
    if hits:
        return Var(rng.choice(hits))
    base = [i for i, a in enumerate(reversed(ctx)) if a == O]
    if base:
        return Var(rng.choice(base))
    raise LookupError("no inhabitant")


def closed_term(seed: int, ty=None):
    """A closed well-typed term; retries until the type is inhabited with the chosen shape."""
    rng = random.Random(seed)
    while True:
        a = ty or Arrow(O, random_type(rng, 2))
        try:
            return random_term(rng, (), a, 4), a
        except LookupError:
            continue


@pytest.fixture
def rng():
    return random.Random(0)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
