"""Exact solvers for the four deterministic routing formulations."""

from .base import BudgetExhausted, SlotSolution, SolveReport, SolverConfig, report_to_dict
from .f1 import solve_f1, tsp_exact
from .f2 import solve_f2, solve_f2_lex
from .stations import solve_f3, solve_f4

__all__ = [
    "SolveReport",
    "SlotSolution",
    "SolverConfig",
    "BudgetExhausted",
    "report_to_dict",
    "solve_f1",
    "solve_f2",
    "solve_f2_lex",
    "solve_f3",
    "solve_f4",
    "tsp_exact",
]
