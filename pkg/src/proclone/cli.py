"""Command line entry point ``proclone``."""
from __future__ import annotations

import argparse
import json
import sys

from .church import ChurchContext, decode, encode
from .clones import RankedAlphabet, check_tree, parse_tree
from .errors import ProcloneError
from .finsem import DEFAULT_GUARD, denote_closed, serialize
from .profinite import (CloneRoster, Inconclusive, ParametricFamily, ProfiniteTermApprox, definability_search,
                        family_of_tree, fixed_point_check, lift, naturality_check, parametric_to_tree,
                        parametricity_check, restrict)
from .report import GROUPS, load_alphabet, load_config, make_roster, run_suites
from .stlc import parse_term, show, typecheck

EXIT = {"pass": 0, "fail": 1, "inconclusive": 3}


def _alphabet(args) -> RankedAlphabet:
    if args.alphabet:
        return RankedAlphabet(load_alphabet(args.alphabet))
    if args.arities is not None:
        text = args.arities.strip()
        return RankedAlphabet([int(a) for a in text.split(",")] if text else [])
    raise ProcloneError("give an alphabet with --alphabet FILE or --arities 0,1")


def _emit(args, payload: dict) -> int:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT.get(payload.get("verdict", "pass"), 1)


def _roster(args, sigma):
    if args.roster:
        return make_roster(args.roster.split(","), args.guard, sigma)
    return CloneRoster.standard(args.guard)


def _tree(args, sigma, n):
    t = parse_tree(args.tree)
    check_tree(sigma, n, t)
    return t


# ---------------------------------------------------------------------------
# Commands


def cmd_check(args) -> int:
    overrides = {"seed": args.seed, "guard": args.guard,
                 "roster": args.roster.split(",") if args.roster else None}
    cfg = load_config(args.config, overrides)
    if args.mutations:
        cfg["mutations"] = {"as_subjects": True}
    names = [s for s in GROUPS[args.group] if s in cfg["suites"]]
    report = run_suites(cfg, names, jobs=args.jobs)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.to_json())
    sys.stdout.write(report.to_text())
    return EXIT[report.verdict]


def cmd_church_encode(args) -> int:
    sigma = _alphabet(args)
    cc = ChurchContext(sigma, args.vars)
    m = encode(cc, _tree(args, sigma, args.vars))
    return _emit(args, {"type": str(cc.type), "term": show(m)})


def cmd_church_decode(args) -> int:
    sigma = _alphabet(args)
    cc = ChurchContext(sigma, args.vars)
    t = decode(cc, parse_term(args.term))
    return _emit(args, {"type": str(cc.type), "tree": str(t)})


def cmd_family_of_tree(args) -> int:
    sigma = _alphabet(args)
    roster = _roster(args, sigma)
    u = family_of_tree(_tree(args, sigma, args.vars), sigma, args.vars, roster)
    return _emit(args, {"roster": roster.describe(), "tables": u.digest()})


def cmd_check_natural(args) -> int:
    sigma = _alphabet(args)
    roster = CloneRoster.default(sigma, args.guard) if not args.roster else _roster(args, sigma)
    u = family_of_tree(_tree(args, sigma, args.vars), sigma, args.vars, roster)
    r = naturality_check(u, seed=args.seed)
    return _emit(args, {"roster": roster.describe(), **r.as_dict()})


def cmd_search_def(args) -> int:
    sigma = _alphabet(args)
    roster = _roster(args, sigma)
    u = family_of_tree(_tree(args, sigma, args.vars), sigma, args.vars, roster)
    found = definability_search(u, args.bound)
    if isinstance(found, Inconclusive):
        return _emit(args, {"verdict": "inconclusive", "bound": args.bound, "roster": roster.describe()})
    return _emit(args, {"verdict": "pass", "tree": str(found), "bound": args.bound, "roster": roster.describe()})


def cmd_restrict(args) -> int:
    sigma = _alphabet(args)
    roster = _roster(args, sigma)
    u = family_of_tree(_tree(args, sigma, args.vars), sigma, args.vars, roster)
    theta = restrict(u, args.bound)
    comps = {str(q): serialize(theta.ty, q, v, args.guard) for q, v in sorted(theta.components.items())}
    return _emit(args, {"type": str(theta.ty), "components": comps,
                        "term": show(theta.witness) if theta.witness is not None else None})


def _closed_church_term(args, sigma):
    cc = ChurchContext(sigma, args.vars)
    m = parse_term(args.term)
    ty = typecheck((), m)
    if ty != cc.type:
        raise ProcloneError(f"expected a term of type {cc.type}, found {ty}")
    return cc, m


def cmd_lift(args) -> int:
    sigma = _alphabet(args)
    roster = _roster(args, sigma)
    cc, m = _closed_church_term(args, sigma)
    theta = ProfiniteTermApprox(cc.type, {q: denote_closed(m, q, args.guard) for q in roster.endo_sizes()}, m,
                                args.guard)
    u = lift(theta, sigma, args.vars, roster)
    return _emit(args, {"roster": roster.describe(), "tables": u.digest()})


def _parametric(args, sigma):
    sizes = tuple(int(q) for q in args.sizes.split(","))
    if args.term:
        m = parse_term(args.term)
        return ParametricFamily.of_term(m, typecheck((), m), sizes, args.guard, show(m))
    cc = ChurchContext(sigma, args.vars)
    return ParametricFamily.of_tree(cc, _tree(args, sigma, args.vars), sizes, args.guard)


def cmd_check_parametric(args) -> int:
    sigma = _alphabet(args)
    rho = _parametric(args, sigma)
    r = parametricity_check(rho, args.guard)
    payload = r.as_dict()
    if r.verdict == "pass":
        found = parametric_to_tree(rho, sigma, args.bound, args.guard)
        payload["tree"] = str(found) if not isinstance(found, tuple) else [str(x) for x in found]
    return _emit(args, payload)


def cmd_check_fixed_point(args) -> int:
    sigma = _alphabet(args)
    args.vars = 0
    rho = _parametric(args, sigma)
    return _emit(args, fixed_point_check(rho, sigma, args.q, args.guard).as_dict())


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--guard", type=int, default=DEFAULT_GUARD)
    common.add_argument("--roster", help="comma separated: endo2,endo3,act,image")
    common.add_argument("--out", help="write the JSON report here")

    tree_args = argparse.ArgumentParser(add_help=False)
    tree_args.add_argument("--alphabet", help="JSON file holding a list of arities")
    tree_args.add_argument("--arities", help="inline arities, e.g. 0,1")
    tree_args.add_argument("--vars", type=int, default=1)

    p = argparse.ArgumentParser(prog="proclone", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", parents=[common], help="run check suites")
    check.add_argument("group", choices=sorted(GROUPS))
    check.add_argument("--config", help="TOML configuration")
    check.add_argument("--jobs", type=int, default=1)
    check.add_argument("--mutations", action="store_true", help="include mutated clones as subjects")
    check.set_defaults(func=cmd_check)

    church = sub.add_parser("church", help="Church encoding").add_subparsers(dest="action", required=True)
    enc = church.add_parser("encode", parents=[common, tree_args])
    enc.add_argument("--tree", required=True)
    enc.set_defaults(func=cmd_church_encode)
    dec = church.add_parser("decode", parents=[common, tree_args])
    dec.add_argument("--term", required=True)
    dec.set_defaults(func=cmd_church_decode)

    prof = sub.add_parser("profinite", help="profinite trees and terms").add_subparsers(dest="action", required=True)
    for name, func in (("family-of-tree", cmd_family_of_tree), ("check-natural", cmd_check_natural),
                       ("search-def", cmd_search_def), ("restrict", cmd_restrict)):
        sp = prof.add_parser(name, parents=[common, tree_args])
        sp.add_argument("--tree", required=True)
        sp.add_argument("--bound", type=int, default=6)
        sp.set_defaults(func=func)
    sp = prof.add_parser("lift", parents=[common, tree_args])
    sp.add_argument("--term", required=True)
    sp.set_defaults(func=cmd_lift)
    for name, func in (("check-parametric", cmd_check_parametric), ("check-fixed-point", cmd_check_fixed_point)):
        sp = prof.add_parser(name, parents=[common, tree_args])
        group = sp.add_mutually_exclusive_group(required=True)
        group.add_argument("--tree")
        group.add_argument("--term")
        sp.add_argument("--sizes", default="1,2,3")
        sp.add_argument("--bound", type=int, default=6)
        sp.add_argument("--q", type=int, default=2)
        sp.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ProcloneError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
