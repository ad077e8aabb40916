"""Clones, Church encodings of trees and profinite families over finite semantics."""
from .errors import (ActionLawViolation, ArityMismatch, ConfigError, GuardExceeded, MissingRosterMember,
                     NotChurchTyped, ParseError, ProcloneError, ScopeError, TypeCheckError, Unsupported)
from .stlc import (O, UNIT, App, Arrow, Base, Lam, Prod, Proj, Tup, Var, normalize, parse_term, parse_type, show,
                   typecheck)
from .finsem import FinRelation, SemDomain, denote_closed, interp_term, interp_type, rel_member, sem_equal
from .clones import (ActionClone, EndoClone, FiniteMonoid, FreeClone, FreeMorphism, MonoidAction, Node,
                     RankedAlphabet, TVar, cay, appvar, check_clone_laws, check_morphism, delta, eval_morphism,
                     parse_tree, trees_up_to)
from .signatures import Signature, PointedPair, compose_signatures, free_iteration, semidirect, setsig, sigset
from .church import ChurchContext, decode, encode, generator, kleisli_subst
from .profinite import (CloneRoster, Inconclusive, NaturalFamily, ParametricFamily, definability_search,
                        family_of_tree, fixed_point_check, lift, naturality_check, parametric_to_tree,
                        parametricity_check, restrict)
from .report import load_config, run_suite, run_suites

__version__ = "0.1.0"
