"""Check suites, configuration and deterministic reports."""
from __future__ import annotations

import hashlib
import itertools
import json
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import kernels
from .church import (ChurchContext, decode, encode, generator, kleisli_subst, roundtrip_all, semantic_fold_matches,
                     substitution_bijection)
from .clones import (ActionClone, EndoClone, FiniteMonoid, FreeClone, FreeMorphism, ImageClone, MonoidAction,
                     MutatedClone, Node, ProductClone, RankedAlphabet, TVar, cay, check_clone_laws, check_morphism,
                     delta, endo_drop_iso, enumerate_morphisms, identity_morphism, terminal_clone,
                     tree_key, tree_size, tree_subst, trees_up_to)
from .errors import ActionLawViolation, ConfigError, GuardExceeded
from .finsem import (DEFAULT_GUARD, FinRelation, denote_closed, enumerate_relations, fundamental_lemma_check,
                     relation_from_mask, sem_equal)
from .profinite import (CloneRoster, Inconclusive, ParametricFamily, artificial_family, definability_search,
                        family_of_tree, family_subst, fixed_point_check, lift, mismatched_family, naturality_check,
                        non_parametric_family, parametric_to_tree, parametricity_check, restrict, retraction_check,
                        semantic_kleisli)
from .signatures import (PointedPair, Signature, action_roundtrip, adjunction_counts, collapse_check,
                         corrupt_action, free_iteration, free_iteration_agrees, monoid_object_laws, raw_monoid_object,
                         semidirect, semidirect_associator, setsig_coherence, unit_laws_check)
from .stlc import App, Lam, O, Prod, Tup, UNIT, Var, arrows, normalize, parse_term, typecheck

SUITES = (
    "clone-laws", "signatures", "church-roundtrip", "substitution-lemma", "fundamental-lemma", "beta-eta",
    "naturality", "bidefinability", "iso-roundtrip", "fixed-point", "parametricity",
)

GROUPS = {
    "all": SUITES,
    "clone-laws": ("clone-laws", "signatures"),
    "church": ("church-roundtrip", "substitution-lemma"),
    "semantics": ("fundamental-lemma", "beta-eta"),
    "profinite": ("naturality", "bidefinability", "iso-roundtrip", "fixed-point", "parametricity"),
}

DEFAULTS = {
    "seed": 0,
    "guard": DEFAULT_GUARD,
    "suites": list(SUITES),
    "alphabets": [[0, 1], [1, 1], [0, 2]],
    "alphabet_files": [],
    "roster": ["endo2", "endo3", "act"],
    "clone_laws": {"tree_size": 5, "free_arity": 3, "endo_arity": 2, "action_arity": 3, "samples": 2000},
    "church": {"max_size": 8, "vars": [0, 1, 2, 3], "hom_size": 4, "hom_vars": [0, 1, 2]},
    "substitution": {"alphabet": [1, 1], "q": 2, "tree_size": 5},
    "fundamental": {"alphabet": [0, 1], "tree_size": 5, "samples": 500},
    "profinite": {"bound": 5, "exact_size": 4, "iso_size": 4, "fixed_point_size": 4, "parametric_size": 5, "q": 2},
    "mutations": {"as_subjects": False},
}


# ---------------------------------------------------------------------------
# Configuration


def _merge(base, extra, where=""):
    out = dict(base)
    for k, v in extra.items():
        if k not in base:
            raise ConfigError(f"unknown key {k!r}", f"{where}{k}")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"expected a table for {k!r}", f"{where}{k}")
            out[k] = _merge(base[k], v, f"{where}{k}.")
        else:
            out[k] = v
    return out


def load_config(path: str | None = None, overrides: dict | None = None) -> dict:
    cfg = dict(DEFAULTS)
    base_dir = Path(".")
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {path}", path)
        try:
            data = tomllib.loads(p.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse config: {exc}", path) from exc
        cfg = _merge(DEFAULTS, data)
        base_dir = p.parent
    for k, v in (overrides or {}).items():
        if v is not None:
            cfg[k] = v
    unknown = [s for s in cfg["suites"] if s not in SUITES]
    if unknown:
        raise ConfigError(f"unknown suites {unknown}", "suites")
    alphabets = [list(a) for a in cfg["alphabets"]]
    for k, name in enumerate(cfg["alphabet_files"]):
        f = Path(name) if Path(name).is_absolute() else base_dir / name
        if not f.is_file():
            raise ConfigError(f"alphabet file not found: {name}", f"alphabet_files[{k}]")
        alphabets.append(load_alphabet(f, f"alphabet_files[{k}]"))
    cfg["alphabets"] = alphabets
    return cfg


def load_alphabet(path, location=None) -> list:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read alphabet {path}: {exc}", location or str(path)) from exc
    if not isinstance(data, list) or not all(isinstance(a, int) and a >= 0 for a in data):
        raise ConfigError("an alphabet is a list of natural numbers", location or str(path))
    return data


def make_roster(names, guard=DEFAULT_GUARD, sigma=None) -> CloneRoster:
    clones = []
    for name in names:
        key = name.strip().lower()
        if key.startswith("endo") and key[4:].isdigit():
            clones.append(EndoClone(int(key[4:]), guard))
        elif key == "act":
            clones.append(ActionClone(MonoidAction.flip(), guard))
        elif key == "image":
            if sigma is None:
                raise ConfigError("image roster member needs an alphabet", "roster")
            clones.append(CloneRoster.default(sigma, guard).clones[-1])
        else:
            raise ConfigError(f"unknown roster member {name!r}", "roster")
    return CloneRoster(clones)


# ---------------------------------------------------------------------------
# Records


@dataclass
class Record:
    suite: str
    name: str
    anchor: str
    inputs: dict
    verdict: str
    witness: object = None
    counts: dict = field(default_factory=dict)

    def as_dict(self):
        blob = json.dumps(self.inputs, sort_keys=True, default=str)
        return {
            "suite": self.suite,
            "name": self.name,
            "anchor": self.anchor,
            "inputs": self.inputs,
            "inputs_digest": hashlib.sha256(blob.encode()).hexdigest()[:16],
            "verdict": self.verdict,
            "witness": _plain(self.witness),
            "counts": _plain(self.counts),
        }


def _plain(x):
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return str(x)


class Suite:
    def __init__(self, name, cfg):
        self.name = name
        self.cfg = cfg
        self.records = []

    def add(self, name, anchor, inputs, ok, witness=None, counts=None, inconclusive=False):
        verdict = "inconclusive" if inconclusive else ("pass" if ok else "fail")
        if verdict == "fail" and witness is None:
            witness = "no witness produced"
        self.records.append(Record(self.name, name, anchor, inputs, verdict, witness, counts or {}))


def _verdict(records):
    vs = {r.verdict for r in records}
    if "fail" in vs:
        return "fail"
    if "inconclusive" in vs:
        return "inconclusive"
    return "pass"


# ---------------------------------------------------------------------------
# Suites


def suite_clone_laws(s: Suite):
    c = s.cfg["clone_laws"]
    seed, guard = s.cfg["seed"], s.cfg["guard"]
    subjects = []
    for ar in s.cfg["alphabets"]:
        free = FreeClone(RankedAlphabet(ar), c["tree_size"], guard)
        subjects.append((free, c["free_arity"]))
        subjects.append((delta(free), c["free_arity"] - 1))
    endo1, endo2 = EndoClone(1, guard), EndoClone(2, guard)
    flip = ActionClone(MonoidAction.flip(), guard)
    rot3 = ActionClone(MonoidAction(FiniteMonoid.cyclic(3), 3, tuple(tuple((x + a) % 3 for x in range(3)) for a in range(3))), guard)
    img = CloneRoster.default(RankedAlphabet((0, 1)), guard).clones[-1]
    subjects += [
        (endo1, c["endo_arity"]), (endo2, c["endo_arity"]), (flip, c["action_arity"]), (rot3, c["action_arity"] - 1),
        (delta(endo2), c["endo_arity"] - 1), (delta(flip), c["action_arity"] - 1),
        (ProductClone([endo2, flip]), 1), (terminal_clone(), 2), (img, 2),
    ]
    swap_image = ImageClone(FreeMorphism(RankedAlphabet((1,)), endo2, [(1, 0)]))
    if s.cfg["mutations"]["as_subjects"]:
        subjects += [(MutatedClone(endo2, m), 2) for m in MutatedClone.MODES]
    subjects = [(x, b, x.name) for x, b in subjects] + [(swap_image, 2, f"{swap_image.name} of F[1] by swap")]
    for clone, bound, label in subjects:
        r = check_clone_laws(clone, bound, c["samples"], seed)
        s.add(f"laws {label}", "clone axioms", {"clone": clone.name, "arity_bound": bound, "exhaustive": r.exhaustive},
              r.passed, r.counterexample, r.counts)
    for phi in [cay(FreeClone(RankedAlphabet((1,)), 4, guard), 1), cay(endo2, 1), cay(flip, 1), cay(flip, 0),
                identity_morphism(endo2), *endo_drop_iso(2, guard)]:
        r = check_morphism(phi, 2, c["samples"], seed)
        s.add(f"morphism {phi.name}", "clone morphism", {"morphism": phi.name}, r.passed, r.counterexample, r.counts)
    fwd, bwd = endo_drop_iso(2, guard)
    ok = all(bwd.apply(n, fwd.apply(n, f)) == f for n in range(3) for f in fwd.source.carrier(n)) and \
        all(fwd.apply(n, bwd.apply(n, g)) == g for n in range(3) for g in fwd.target.carrier(n))
    s.add("drop isomorphism is bijective", "endo-drop lemma", {"q": 2, "arities": 2}, ok)
    for base in (endo2, flip):
        for mode in MutatedClone.MODES:
            r = check_clone_laws(MutatedClone(base, mode), 2, c["samples"], seed)
            s.add(f"mutation {base.name} {mode} detected", "clone axioms", {"clone": base.name, "mode": mode},
                  not r.passed, None if not r.passed else "mutation not detected", {"counterexample": r.counterexample})
    for sigma in s.cfg["alphabets"]:
        sig = RankedAlphabet(sigma)
        for target in (endo2, flip):
            count = len(enumerate_morphisms(sig, target))
            expected = 1
            for a in sig.arities:
                expected *= target.carrier_size(a)
            s.add(f"morphism count F{sigma} -> {target.name}", "finite clone morphisms",
                  {"alphabet": sigma, "target": target.name}, count == expected, (count, expected), {"morphisms": count})


def suite_signatures(s: Suite):
    for ar in ([0, 1], [1], [0, 2]):
        sig = RankedAlphabet(ar)
        ok = free_iteration_agrees(sig, 6 if max(ar) < 2 else 4, 1)
        s.add(f"free iteration {ar} agrees with trees", "free iteration", {"alphabet": ar, "n": 1}, ok)
    sizes = [len(free_iteration(RankedAlphabet((0, 1)), d, 1)) for d in range(5)]
    s.add("free iteration sizes [0,1]", "free iteration", {"alphabet": [0, 1], "n": 1}, sizes == [2 * d for d in range(5)],
          sizes, {"sizes": sizes})
    checked = 0
    failures = []
    for length in range(4):
        for ar in itertools.product(range(3), repeat=length):
            x = Signature.of_alphabet(RankedAlphabet(ar))
            for r in unit_laws_check(x) + [collapse_check(x, x)]:
                checked += 1
                if not r.passed:
                    failures.append((ar, r.name, r.witness))
    s.add("unit, absorption and collapse bijections", "signature composition", {"alphabets": "l<=3, arities<=2"},
          not failures, failures[:1] or None, {"isomorphisms": checked})
    p = PointedPair.of(2, 2)
    for r in setsig_coherence(p, p, p):
        s.add(f"setsig {r.name}", "setsig is monoidal", {"sizes": [2, 2]}, r.passed, r.witness, {"checked": r.checked})
    bad = []
    for q, a in itertools.product(range(3), repeat=2):
        for xs in ([0], [1], [0, 1], [0, 0, 1], [2, 1]):
            left, right = adjunction_counts(PointedPair.of(q, a), Signature.of_alphabet(RankedAlphabet(xs)))
            if left != right:
                bad.append((q, a, xs, left, right))
    s.add("setsig/sigset hom-set counts", "setsig/sigset adjunction", {"pairs": "Q,A<=2"}, not bad, bad[:1] or None)
    pairs = [PointedPair.of(2, 2), PointedPair.of(1, 2), PointedPair.of(2, 1)]
    ok = True
    for p1, p2, p3 in itertools.product(pairs, repeat=3):
        qa, aa = semidirect_associator(p1, p2, p3)
        lhs, rhs = semidirect(semidirect(p1, p2), p3), semidirect(p1, semidirect(p2, p3))
        ok &= sorted(map(str, qa.values())) == sorted(map(str, rhs.q)) and len(qa) == len(lhs.q)
        ok &= sorted(map(str, aa.values())) == sorted(map(str, rhs.a)) and len(aa) == len(lhs.a)
    s.add("semidirect associator is bijective", "semidirect product", {"sizes": "<=2"}, ok)
    actions = {
        "trivial": MonoidAction.trivial(3),
        "flip": MonoidAction.flip(),
        "rotate3": MonoidAction(FiniteMonoid.cyclic(3), 3, tuple(tuple((x + a) % 3 for x in range(3)) for a in range(3))),
        "reset": MonoidAction(FiniteMonoid(((0, 1), (1, 1)), 0), 2, ((0, 1), (0, 0))),
    }
    for name, ma in actions.items():
        r = action_roundtrip(ma)
        s.add(f"action round trip {name}", "monoid actions", {"action": name}, r["passed"],
              [c for c in r["checks"] if not c["passed"]] or None)
    for mode in ("unit", "action", "monoid"):
        bad = corrupt_action(MonoidAction.flip(), mode)
        try:
            bad.validate()
            raised = None
        except ActionLawViolation as exc:
            raised = exc.law
        laws = monoid_object_laws(raw_monoid_object(bad))
        detected = raised is not None and not all(ok for _, ok, _ in laws)
        s.add(f"action mutation {mode} detected", "monoid actions", {"mode": mode}, detected,
              None if detected else "mutation not detected", {"violation": raised})


def _hom_pairs(sig, m_vars, n_vars, size):
    heads = trees_up_to(sig, m_vars, size)
    args = trees_up_to(sig, n_vars, size)
    for t in heads:
        for us in itertools.product(args, repeat=m_vars):
            yield t, list(us)


def suite_church(s: Suite):
    c = s.cfg["church"]
    for ar in s.cfg["alphabets"]:
        sig = RankedAlphabet(ar)
        total = 0
        fail = None
        for n in c["vars"]:
            count, bad = roundtrip_all(ChurchContext(sig, n), c["max_size"])
            total += count
            fail = fail or bad
        s.add(f"decode . encode {ar}", "Church clone is free", {"alphabet": ar, "max_size": c["max_size"], "vars": c["vars"]},
              fail is None, fail, {"trees": total})
        checked = 0
        bad = None
        for m in c["hom_vars"]:
            for n in c["hom_vars"]:
                cm, cn = ChurchContext(sig, m), ChurchContext(sig, n)
                enc_n = {u: encode(cn, u) for u in trees_up_to(sig, n, c["hom_size"])}
                for t, us in _hom_pairs(sig, m, n, c["hom_size"]):
                    checked += 1
                    lhs = encode(cn, tree_subst(t, us))
                    rhs = kleisli_subst(cm, encode(cm, t), [enc_n[u] for u in us], n)
                    if lhs != rhs:
                        bad = (str(t), [str(u) for u in us])
                        break
        s.add(f"encode is a substitution homomorphism {ar}", "Church clone is free",
              {"alphabet": ar, "size": c["hom_size"], "vars": c["hom_vars"]}, bad is None, bad, {"pairs": checked})
        cc0 = ChurchContext(sig, 0)
        bad = None
        for j, a in enumerate(sig.arities, start=1):
            for kids in itertools.product(trees_up_to(sig, 0, 3), repeat=a):
                st = cc0.sigma_type
                # g_j <\s. [[t_1]] s, ...> applied to s, as a term of type S => o
                tup = Tup(tuple(encode(cc0, k) for k in kids))
                term = Lam(st, App(App(generator(sig, j), tup), Var(0)))
                if normalize((), term) != encode(cc0, Node(j, tuple(kids))):
                    bad = (j, [str(k) for k in kids])
        s.add(f"generators build one-node trees {ar}", "generators", {"alphabet": ar}, bad is None, bad)
    corpus = [
        ("(\\f:(o*(o->o)). f) applied", "(\\g:(o * (o -> o)) -> o. g) (\\s:(o * (o -> o)). s.2 (s.2 s.1))", [0, 1], 0),
        ("eta-short", "\\s:(o * (o -> o)). (\\y:o. s.2 y) s.1", [0, 1], 0),
        ("projection redex", "\\s:((o -> o) * (o -> o)). \\x:o. <s.2, s.1>.1 (s.1 x)", [1, 1], 1),
    ]
    for name, src, ar, n in corpus:
        cc = ChurchContext(RankedAlphabet(ar), n)
        m = parse_term(src)
        t = decode(cc, m)
        ok = encode(cc, t) == normalize((), m)
        s.add(f"encode . decode on {name}", "Church clone is free", {"term": src}, ok, str(t))


def suite_substitution(s: Suite):
    c = s.cfg["substitution"]
    sig = RankedAlphabet(c["alphabet"])
    for alph in (sig, RankedAlphabet(())):
        r = substitution_bijection(alph, c["q"], s.cfg["guard"]).check()
        s.add(f"bijection Clone(F{list(alph.arities)}, Endo({c['q']})) = [[S]]", "substitution lemma",
              {"alphabet": list(alph.arities), "q": c["q"]}, r["passed"], r.get("witness"), r)
    endo = EndoClone(c["q"], s.cfg["guard"])
    ms = enumerate_morphisms(sig, endo)
    for n in (1, 2):
        cc = ChurchContext(sig, n)
        checked, bad = 0, None
        for t in trees_up_to(sig, n, c["tree_size"]):
            for p in ms:
                checked += 1
                if not semantic_fold_matches(cc, t, p, s.cfg["guard"]):
                    bad = (str(t), p.assignment)
                    break
        s.add(f"eval_morphism = semantic fold, n={n}", "substitution lemma",
              {"alphabet": c["alphabet"], "q": c["q"], "n": n, "tree_size": c["tree_size"]}, bad is None, bad,
              {"pairs": checked, "morphisms": len(ms)})


def _closed_corpus(sig, tree_size):
    cc = ChurchContext(sig, 1)
    terms = [(str(t), encode(cc, t), cc.type) for t in trees_up_to(sig, 1, tree_size)]
    for j in range(1, len(sig) + 1):
        g = generator(sig, j)
        terms.append((f"g{j}", g, typecheck((), g)))
    extra = ["\\x:o. x", "\\x:o. \\y:o. x", "\\f:o -> o. \\x:o. f (f x)", "()", "\\p:(o * o). <p.2, p.1>"]
    for src in extra:
        m = parse_term(src)
        terms.append((src, m, typecheck((), m)))
    return terms


def suite_fundamental(s: Suite):
    c = s.cfg["fundamental"]
    guard = s.cfg["guard"]
    sig = RankedAlphabet(c["alphabet"])
    terms = _closed_corpus(sig, c["tree_size"])
    rng = random.Random(s.cfg["seed"])
    groups = []
    for q, q2 in itertools.product((1, 2), repeat=2):
        groups.append((f"{q}x{q2} exhaustive", list(enumerate_relations(q, q2))))
    groups.append(("2x3 exhaustive", list(enumerate_relations(2, 3))))
    for q, q2 in ((2, 3), (3, 3)):
        draws = [relation_from_mask(q, q2, rng.getrandbits(q * q2)) for _ in range(c["samples"])]
        groups.append((f"{q}x{q2} sampled", draws))
    for label, rels in groups:
        checked, bad, skipped = 0, None, []
        small = max(max(r.left, r.right) for r in rels) <= 2
        used = [x for x in terms if small or not x[0].startswith("g")]
        for name, m, ty in used:
            for rel in rels:
                try:
                    ok = fundamental_lemma_check(m, ty, rel, guard)
                except GuardExceeded:
                    skipped.append(name)
                    break
                checked += 1
                if not ok:
                    bad = (name, str(rel))
                    break
        s.add(f"fundamental lemma {label}", "fundamental lemma of logical relations",
              {"alphabet": c["alphabet"], "relations": label, "terms": len(used), "generators": small}, bad is None, bad,
              {"checks": checked, "relations": len(rels)})
        if skipped:
            s.add(f"fundamental lemma {label} beyond guard", "fundamental lemma of logical relations",
                  {"relations": label}, True, sorted(set(skipped)), inconclusive=True)


def suite_beta_eta(s: Suite):
    guard = s.cfg["guard"]
    corpus = [
        "(\\f:o -> o. \\x:o. f x) (\\y:o. y)",
        "\\f:o -> o. f",
        "\\p:(o * o). p",
        "(\\x:o. \\y:o. <y, x>.2)",
        "\\s:(o * (o -> o)). (\\y:o. s.2 y) s.1",
        "(\\g:(o * (o -> o)) -> o. g) (\\s:(o * (o -> o)). s.2 (s.2 s.1))",
        "\\u:1. u",
        "(\\k:o -> o -> o. \\x:o. k x x) (\\a:o. \\b:o. b)",
    ]
    bad = []
    for src in corpus:
        m = parse_term(src)
        ty = typecheck((), m)
        nf = normalize((), m)
        if typecheck((), nf) != ty or normalize((), nf) != nf:
            bad.append((src, "normal form"))
            continue
        for q in (1, 2, 3):
            if not sem_equal(ty, q, denote_closed(m, q, guard), denote_closed(nf, q, guard), guard):
                bad.append((src, q))
    s.add("denotation is invariant under normalization", "beta-eta soundness", {"terms": len(corpus), "sizes": [1, 2, 3]},
          not bad, bad[:1] or None, {"terms": len(corpus)})
    types = [O, arrows([O], O), arrows([O, O], O), Prod((O, O)), UNIT, arrows([arrows([O], O)], O)]
    bad = []
    for ty in types:
        from .finsem import interp_type, relation_matrix
        d = interp_type(ty, 2, guard)
        m = relation_matrix(ty, FinRelation.diagonal(2), guard)
        els = d.elements()
        for i, j in itertools.product(range(len(els)), repeat=2):
            if bool(m[i, j]) != sem_equal(ty, 2, els[i], els[j], guard):
                bad.append((str(ty), i, j))
                break
    s.add("diagonal relation is equality", "logical relations", {"types": [str(t) for t in types], "q": 2},
          not bad, bad[:1] or None)


def _roster(s, sigma=None):
    return make_roster(s.cfg["roster"], s.cfg["guard"], sigma)


def suite_naturality(s: Suite):
    p = s.cfg["profinite"]
    for ar in ([1], [0, 1]):
        sig = RankedAlphabet(ar)
        roster = CloneRoster.default(sig, s.cfg["guard"])
        bad, uncovered, counts = None, set(), {}
        for t in trees_up_to(sig, 1, p["bound"]):
            r = naturality_check(family_of_tree(t, sig, 1, roster), seed=s.cfg["seed"])
            uncovered.update(r.uncovered)
            for k, v in r.checked.items():
                counts[k] = counts.get(k, 0) + v
            if r.verdict != "pass":
                bad = (str(t), r.failures[:1])
                break
        s.add(f"tree families are natural {ar}", "natural families", {"alphabet": ar, "roster": roster.describe(),
              "tree_size": p["bound"]}, bad is None, bad, {"squares": sum(counts.values()), "uncovered": sorted(uncovered)})
    sig = RankedAlphabet((1,))
    roster = CloneRoster([EndoClone(2, s.cfg["guard"]), EndoClone(3, s.cfg["guard"])])
    art = artificial_family(sig, 1, roster, Node(1, (TVar(1),)), TVar(1), "Endo(3)")
    r = naturality_check(art, seed=s.cfg["seed"])
    s.add("non-natural family is rejected", "natural families", {"family": "a1(x1) except x1 on Endo(3)"},
          r.verdict == "fail", r.failures[:1] if r.failures else "not detected")


def suite_bidefinability(s: Suite):
    p = s.cfg["profinite"]
    sig = RankedAlphabet((1,))
    roster = _roster(s, sig)
    trees = trees_up_to(sig, 1, p["bound"])
    bad = None
    for t in trees:
        u = family_of_tree(t, sig, 1, roster)
        found = definability_search(u, p["bound"])
        if isinstance(found, Inconclusive) or not family_of_tree(found, sig, 1, roster).equal_on_roster(u):
            bad = (str(t), str(found))
            break
        if tree_key(found) > tree_key(t) or (tree_size(t) <= p["exact_size"] and found != t):
            bad = (str(t), str(found))
            break
    s.add("definability search recovers a defining tree", "bidefinability", {"alphabet": [1], "roster": roster.describe(),
          "tree_size": p["bound"]}, bad is None, bad, {"trees": len(trees)})
    digests = {}
    for t in trees:
        key = json.dumps(family_of_tree(t, sig, 1, roster).digest(), sort_keys=True)
        digests.setdefault(key, []).append(str(t))
    clashes = [v for v in digests.values() if len(v) > 1]
    s.add("small trees have distinct families", "bidefinability", {"tree_size": p["bound"]}, not clashes,
          clashes[:1] or None, {"families": len(digests)})
    deep = Node(1, (TVar(1),))
    for _ in range(11):
        deep = Node(1, (deep,))
    found = definability_search(family_of_tree(deep, sig, 1, roster), p["bound"] + 3)
    ok = not isinstance(found, Inconclusive) and family_of_tree(found, sig, 1, roster).equal_on_roster(
        family_of_tree(deep, sig, 1, roster))
    s.add("a deep tree agrees with a shorter one on a finite roster", "bidefinability is roster-relative",
          {"tree_size": 13, "bound": p["bound"] + 3}, ok, str(found))
    odd = artificial_family(sig, 1, roster, Node(1, (TVar(1),)), TVar(1), roster.clones[-1].name)
    found = definability_search(odd, p["bound"] + 3)
    s.add("search for an undefinable family is inconclusive", "definability",
          {"family": f"a1(x1) except x1 on {roster.clones[-1].name}", "bound": p["bound"] + 3},
          isinstance(found, Inconclusive), str(found))


def suite_iso(s: Suite):
    p = s.cfg["profinite"]
    sig = RankedAlphabet((0, 1))
    roster = _roster(s, sig)
    cc = ChurchContext(sig, 1)
    bad_lr, bad_rl, bad_theta = None, None, None
    trees = trees_up_to(sig, 1, p["iso_size"])
    for t in trees:
        u = family_of_tree(t, sig, 1, roster)
        theta = restrict(u)
        for q, v in theta.components.items():
            if not sem_equal(cc.type, q, v, denote_closed(encode(cc, t), q)):
                bad_theta = (str(t), q)
        if not lift(theta, sig, 1, roster).equal_on_roster(u):
            bad_lr = str(t)
        term_theta = restrict(family_of_tree(t, sig, 1, roster))
        term_theta.components = {q: denote_closed(encode(cc, t), q) for q in roster.endo_sizes()}
        back = restrict(lift(term_theta, sig, 1, roster))
        if not all(sem_equal(cc.type, q, back.components[q], term_theta.components[q]) for q in term_theta.components):
            bad_rl = str(t)
    inputs = {"alphabet": [0, 1], "roster": roster.describe(), "tree_size": p["iso_size"]}
    s.add("restrict gives the encoded term", "restrict", inputs, bad_theta is None, bad_theta, {"trees": len(trees)})
    s.add("lift . restrict = id", "profinite trees are profinite terms", inputs, bad_lr is None, bad_lr)
    s.add("restrict . lift = id", "profinite trees are profinite terms", inputs, bad_rl is None, bad_rl)
    bad = None
    heads = trees_up_to(sig, 1, 3)
    for h in heads:
        for a in heads:
            fam = family_subst(family_of_tree(h, sig, 1, roster), [family_of_tree(a, sig, 1, roster)], 1)
            left = restrict(fam)
            th_h, th_a = restrict(family_of_tree(h, sig, 1, roster)), restrict(family_of_tree(a, sig, 1, roster))
            for q in left.components:
                right = semantic_kleisli(q, sig, th_h.components[q], [th_a.components[q]], 1)
                if not sem_equal(cc.type, q, left.components[q], right):
                    bad = (str(h), str(a), q)
    s.add("restrict preserves substitution", "restrict is a clone morphism", {"tree_size": 3}, bad is None, bad)
    failures = []
    for c in roster.clones:
        for n in range(3):
            r = retraction_check(c, n)
            if r.verdict != "pass":
                failures.append(r.failures[0])
    s.add("appvar . cay = id", "appvar is a retraction", {"roster": roster.describe(), "n": [0, 1, 2]}, not failures,
          failures[:1] or None)


def suite_fixed_point(s: Suite):
    p = s.cfg["profinite"]
    sig = RankedAlphabet((0, 1))
    cc = ChurchContext(sig, 0)
    bad, checked = None, 0
    for t in trees_up_to(sig, 0, p["fixed_point_size"]):
        r = fixed_point_check(ParametricFamily.of_tree(cc, t), sig, p["q"], s.cfg["guard"])
        checked += 1
        if r.verdict != "pass":
            bad = (str(t), r.failures)
    s.add("equation (G) for tree families", "fixed-point equation", {"alphabet": [0, 1], "q": p["q"],
          "tree_size": p["fixed_point_size"]}, bad is None, bad, {"families": checked})
    rho = non_parametric_family(cc, Node(2, (Node(2, (Node(1),)),)), Node(2, (Node(1),)), 8)
    r = fixed_point_check(rho, sig, p["q"], s.cfg["guard"])
    s.add("equation (G) rejects a non-parametric family", "fixed-point equation", {"family": rho.label},
          r.verdict == "fail", r.failures[:1] if r.failures else "not detected")


def suite_parametricity(s: Suite):
    p = s.cfg["profinite"]
    sig = RankedAlphabet((0, 1))
    cc = ChurchContext(sig, 1)
    bad_p, bad_t, checked = None, None, 0
    trees = trees_up_to(sig, 1, p["parametric_size"])
    for t in trees:
        rho = ParametricFamily.of_tree(cc, t, (1, 2, 3), s.cfg["guard"])
        r = parametricity_check(rho, s.cfg["guard"])
        checked += sum(r.checked.values())
        if r.verdict != "pass":
            bad_p = (str(t), r.failures[:1])
        found = parametric_to_tree(rho, sig, p["parametric_size"], s.cfg["guard"])
        if found != t:
            bad_t = (str(t), str(found))
    inputs = {"alphabet": [0, 1], "roster": [1, 2, 3], "tree_size": p["parametric_size"]}
    s.add("tree families are parametric", "parametric families", inputs, bad_p is None, bad_p, {"relation checks": checked})
    s.add("parametric families are definable", "parametricity theorem", inputs, bad_t is None, bad_t, {"trees": len(trees)})
    s1 = RankedAlphabet((1,))
    mm = mismatched_family(ChurchContext(s1, 1), {2: Node(1, (TVar(1),)), 3: Node(1, (Node(1, (TVar(1),)),))})
    r = parametricity_check(mm, s.cfg["guard"])
    s.add("mismatched family is not parametric", "parametric families", {"family": "a1 x1 at 2, a1 a1 x1 at 3"},
          r.verdict == "fail", r.failures[:1] if r.failures else "not detected")
    gamma = Prod((arrows([O], O),))
    cc1 = ChurchContext(s1, 1)
    t = Node(1, (Node(1, (TVar(1),)),))
    m = encode(cc1, t)
    st = cc1.sigma_type
    split_term = Lam(st, Tup((App(m, Var(0)),)))
    rho = ParametricFamily.of_term(split_term, typecheck((), split_term), (1, 2, 3), s.cfg["guard"])
    found = parametric_to_tree(rho, s1, 4, s.cfg["guard"])
    s.add("product codomain splits into components", "parametricity theorem", {"gamma": str(gamma)},
          found == (t,), [str(x) for x in found] if isinstance(found, tuple) else str(found))


RUNNERS = {
    "clone-laws": suite_clone_laws,
    "signatures": suite_signatures,
    "church-roundtrip": suite_church,
    "substitution-lemma": suite_substitution,
    "fundamental-lemma": suite_fundamental,
    "beta-eta": suite_beta_eta,
    "naturality": suite_naturality,
    "bidefinability": suite_bidefinability,
    "iso-roundtrip": suite_iso,
    "fixed-point": suite_fixed_point,
    "parametricity": suite_parametricity,
}


# ---------------------------------------------------------------------------
# Running


@dataclass
class Report:
    verdict: str
    records: list
    settings: dict
    timings: dict

    def as_dict(self):
        return {
            "verdict": self.verdict,
            "settings": self.settings,
            "records": [r.as_dict() for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        lines.append(f"roster: {', '.join(self.settings['roster'])}   guard: {self.settings['guard']}   "
                     f"seed: {self.settings['seed']}   backend: {kernels.BACKEND}")
        for suite in sorted({r.suite for r in self.records}):
            rs = [r for r in self.records if r.suite == suite]
            lines.append(f"[{_verdict(rs)}] {suite} ({self.timings.get(suite, 0.0):.2f}s)")
            for r in rs:
                extra = "" if r.verdict == "pass" else f"  witness: {_plain(r.witness)}"
                lines.append(f"    {r.verdict:<12} {r.name}{extra}")
        return "\n".join(lines) + "\n"


def run_suites(cfg: dict, names=None, jobs: int = 1) -> Report:
    names = list(names if names is not None else cfg["suites"])

    def one(name):
        t0 = time.perf_counter()
        suite = Suite(name, cfg)
        RUNNERS[name](suite)
        return name, suite.records, time.perf_counter() - t0

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, names))
    else:
        results = [one(n) for n in names]
    records = sorted((r for _, rs, _ in results for r in rs), key=lambda r: (r.suite, r.name, json.dumps(r.inputs, sort_keys=True, default=str)))
    settings = {
        "seed": cfg["seed"],
        "guard": cfg["guard"],
        "roster": list(cfg["roster"]),
        "suites": sorted(names),
        "alphabets": cfg["alphabets"],
        "bounds": {k: cfg[k] for k in ("clone_laws", "church", "substitution", "fundamental", "profinite")},
        "mutations": cfg["mutations"],
        "roster_relative": True,
    }
    return Report(_verdict(records), records, settings, {n: t for n, _, t in results})


def run_suite(config: str | None = None, **overrides) -> Report:
    cfg = load_config(config, overrides)
    return run_suites(cfg, jobs=overrides.get("jobs") or 1)
