"""FOND-PDDL frontend: parsing, grounding and object symmetry."""

from .grounding import expand_effect, ground, load
from .parser import (
    Atom,
    EffAnd,
    EffOneof,
    LiftedAction,
    LiftedDomain,
    LiftedProblem,
    Literal,
    PddlError,
    domain_to_pddl,
    parse,
    parse_domain,
    parse_problem,
    problem_to_pddl,
    read_sexprs,
)
from .symmetry import SymmetryPartition, remove_objects, symmetric_objects

__all__ = [
    "Atom", "EffAnd", "EffOneof", "LiftedAction", "LiftedDomain", "LiftedProblem", "Literal",
    "PddlError", "SymmetryPartition", "domain_to_pddl", "expand_effect", "ground", "load", "parse",
    "parse_domain", "parse_problem", "problem_to_pddl", "read_sexprs", "remove_objects",
    "symmetric_objects",
]
