"""Repair engine for managed multi-context systems with active integrity constraints."""
from .aic import (AIC, Problem, RepairSession, RepairTree, UpdateAction, apply_update_set,
                  bounded_validity_check, build_repair_tree, enumerate_grounded_repairs,
                  is_consistent_update_set, is_grounded_repair, is_weak_repair,
                  oracle_grounded_repairs, satisfies)
from .deductive import HornRule, deductive_context
from .errors import MCSError
from .fixtures import fixture, all_fixtures
from .kernel import MCS, BeliefState, BridgeRule, ManagedContext, compute_equilibrium
from .logic import Atom
from .ontology import encode_database, encode_ontology
from .surface.parser import ParseError, parse_problem

__all__ = [
    "AIC", "Atom", "BeliefState", "BridgeRule", "HornRule", "MCS", "MCSError",
    "ManagedContext", "ParseError", "Problem", "RepairSession", "RepairTree", "UpdateAction",
    "apply_update_set", "bounded_validity_check", "build_repair_tree", "compute_equilibrium",
    "deductive_context", "encode_database", "encode_ontology", "enumerate_grounded_repairs",
    "fixture", "is_consistent_update_set", "is_grounded_repair", "is_weak_repair",
    "oracle_grounded_repairs", "all_fixtures", "parse_problem", "satisfies",
]
