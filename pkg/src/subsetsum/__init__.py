"""
Random subset-sum approximation: problems, solvers and Monte-Carlo statistics.
"""

from .problem import SubsetSolution, SubsetSumProblem, UniformContainment
from .solvers import (
    AutoSolver,
    ExhaustiveSolver,
    GreedySolver,
    MeetInMiddleSolver,
    best_residual,
    make_solver,
    solve_exhaustive,
    solve_greedy,
    solve_mitm,
)
from .statistics import (
    CANDIDATE_VARIANCE,
    SAMPLERS,
    expected_hits,
    fit_log_law,
    min_m_for,
    pool_for_tolerance,
    success_rate,
    success_table,
)

__all__ = [
    "CANDIDATE_VARIANCE",
    "SAMPLERS",
    "AutoSolver",
    "ExhaustiveSolver",
    "GreedySolver",
    "MeetInMiddleSolver",
    "SubsetSolution",
    "SubsetSumProblem",
    "UniformContainment",
    "best_residual",
    "expected_hits",
    "fit_log_law",
    "make_solver",
    "min_m_for",
    "pool_for_tolerance",
    "solve_exhaustive",
    "solve_greedy",
    "solve_mitm",
    "success_rate",
    "success_table",
]
