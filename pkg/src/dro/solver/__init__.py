"""LP/MILP solver kernel and pluggable backends."""

from .lp import (
    EQ,
    GE,
    INFEASIBLE,
    ITERLIMIT,
    LE,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    SolveResult,
    solve_lp,
)
from .milp import MixedIntegerProgram, lp_relaxation_value, solve_milp
from .backend import Backend, ReferenceKernel, ScipyBackend, get_backend
from .dump import dump_program

__all__ = [
    "LinearProgram",
    "MixedIntegerProgram",
    "SolveResult",
    "solve_lp",
    "solve_milp",
    "lp_relaxation_value",
    "Backend",
    "ReferenceKernel",
    "ScipyBackend",
    "get_backend",
    "dump_program",
    "OPTIMAL",
    "INFEASIBLE",
    "UNBOUNDED",
    "ITERLIMIT",
    "LE",
    "EQ",
    "GE",
]
