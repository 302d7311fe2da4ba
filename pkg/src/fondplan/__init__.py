"""fondplan: a strong-cyclic FOND planner built around weak-plan search,
deadend-derived forbidden state-action pairs and a regression-based
controller graph."""

from pathlib import Path

from .model import (
    Action,
    FondTask,
    Outcome,
    PartialState,
    Variable,
    binary_task,
    make_action,
    regress,
    update,
)
from .planner import Planner, SolveConfig, SolveResult, Verdict, solve
from .solution import Policy
from .validator import oracle_solve, simulate, validate_strong_cyclic

__version__ = "0.1.0"

#: bundled micro-benchmark suite (PDDL files plus ``manifest.csv``)
BENCHMARK_DIR = Path(__file__).resolve().parent / "benchmarks"

__all__ = [
    "BENCHMARK_DIR",
    "Action",
    "FondTask",
    "Outcome",
    "PartialState",
    "Planner",
    "Policy",
    "SolveConfig",
    "SolveResult",
    "Variable",
    "Verdict",
    "binary_task",
    "make_action",
    "oracle_solve",
    "regress",
    "simulate",
    "solve",
    "update",
    "validate_strong_cyclic",
]
