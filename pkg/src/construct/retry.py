"""
Retrying a subset-sum block on fresh source capacity.
"""

import logging
from dataclasses import replace
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np

from ..core.errors import BlockFailureError, DomainError
from ..core.interfaces import ISubsetSumSolver
from ..subsetsum.problem import SubsetSolution, SubsetSumProblem
from ..subsetsum.solvers import AutoSolver

logger = logging.getLogger(__name__)

# (layer, copy, input neuron); None marks a bias or carrier block
Coordinates = Tuple[int, int, Optional[int]]
FreshCandidates = Callable[[int], Optional[np.ndarray]]


class RetryOutcome(NamedTuple):
    solution: SubsetSolution
    attempt: int


def retry_block(problem: SubsetSumProblem, fresh_candidates: FreshCandidates, attempts: int,
                solver: Optional[ISubsetSumSolver] = None,
                coordinates: Optional[Coordinates] = None) -> RetryOutcome:
    """
    Solve a block, redrawing its candidates until it succeeds.

    Args:
        problem: First attempt
        fresh_candidates: Called with the number of attempts made so far; returns
            the candidates of an untouched source row, or None when no capacity
            is left
        attempts: Total number of attempts allowed (>= 1)
        solver: Subset-sum solver; automatic selection by default
        coordinates: Block position; when given, exhaustion raises

    Returns:
        RetryOutcome with the last solution and the 1-based attempt it came from

    Raises:
        BlockFailureError: all attempts failed and ``coordinates`` was given
    """
    if attempts < 1:
        raise DomainError(f"attempts must be >= 1, got {attempts}")
    solver = solver or AutoSolver()
    solution = solver.solve(problem)
    attempt = 1
    while not solution.achieved and attempt < attempts:
        candidates = fresh_candidates(attempt)
        if candidates is None:
            logger.debug("No spare capacity left after %d attempts", attempt)
            break
        attempt += 1
        logger.debug("Retrying block %s (attempt %d, residual %.3e)", coordinates, attempt,
                     solution.residual)
        solution = solver.solve(replace(problem, candidates=candidates))
    if not solution.achieved and coordinates is not None:
        layer, copy, input_neuron = coordinates
        raise BlockFailureError(layer, copy, input_neuron, solution.residual,
                                problem.tolerance, attempt)
    return RetryOutcome(solution, attempt)
