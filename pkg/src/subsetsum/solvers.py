"""
Subset-sum approximation solvers.

All exact solvers share one contract. Among subsets within tolerance (and
within the cardinality cap) they return one of minimal cardinality, then of
smaller residual, then the lexicographically smallest index tuple. When no
subset meets the tolerance they return the minimal-residual subset with
``achieved=False`` (ties: smaller cardinality, then lexicographic).

Lexicographic ties are resolved with a bit-reversed key: index k contributes
2**(m-1-k), so among equal-size sets the lexicographically smallest tuple has
the largest key.
"""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core.config import SolverConfig
from ..core.errors import ProblemSizeError
from ..core.interfaces import ISubsetSumSolver
from .problem import SubsetSolution, SubsetSumProblem, finish

logger = logging.getLogger(__name__)

EXHAUSTIVE_MAX = 25
MITM_MAX = 44
CHUNK_BITS = 20
AUTO_EXHAUSTIVE_BELOW = 13

# (feasible flag, primary, secondary, -key); smaller is better
_Rank = Tuple[int, float, float, int]


def _enumerate(values: np.ndarray, offset: int, m: int) -> Tuple[np.ndarray, np.ndarray,
                                                                  np.ndarray]:
    """Sums, cardinalities and bit-reversed keys of all subsets of ``values``."""
    sums = np.zeros(1, dtype=np.float64)
    cards = np.zeros(1, dtype=np.int64)
    keys = np.zeros(1, dtype=np.int64)
    for position, value in enumerate(values):
        bit = np.int64(1) << np.int64(m - 1 - (offset + position))
        sums = np.concatenate([sums, sums + value])
        cards = np.concatenate([cards, cards + 1])
        keys = np.concatenate([keys, keys | bit])
    return sums, cards, keys


def _indices_of(key: int, m: int) -> Tuple[int, ...]:
    return tuple(k for k in range(m) if (key >> (m - 1 - k)) & 1)


def _rank(residuals: np.ndarray, cards: np.ndarray, keys: np.ndarray, tolerance: float,
          cap: int) -> Optional[_Rank]:
    allowed = cards <= cap
    if not allowed.any():
        return None
    feasible = allowed & (residuals <= tolerance)
    if feasible.any():
        card = cards[feasible].min()
        chosen = feasible & (cards == card)
        best = residuals[chosen].min()
        chosen &= residuals == best
        return (0, float(card), float(best), -int(keys[chosen].max()))
    best = residuals[allowed].min()
    chosen = allowed & (residuals == best)
    card = cards[chosen].min()
    chosen &= cards == card
    return (1, float(best), float(card), -int(keys[chosen].max()))


def _check_size(problem: SubsetSumProblem, limit: int, name: str) -> None:
    if problem.size > limit:
        raise ProblemSizeError(f"{name} solver handles at most {limit} candidates, "
                               f"got {problem.size}")


def solve_exhaustive(problem: SubsetSumProblem) -> SubsetSolution:
    """
    Evaluate all 2^m subsets.

    The low CHUNK_BITS candidates are enumerated once; every subset of the
    remaining ones is added as a chunk so memory stays bounded.
    """
    _check_size(problem, EXHAUSTIVE_MAX, "exhaustive")
    m = problem.size
    X = problem.candidates
    split = min(m, CHUNK_BITS)
    low_sums, low_cards, low_keys = _enumerate(X[:split], 0, m)
    high_sums, high_cards, high_keys = _enumerate(X[split:], split, m)

    best: Optional[_Rank] = None
    for h in range(high_sums.shape[0]):
        if high_cards[h] > problem.cap:
            continue
        residuals = np.abs(problem.target - (low_sums + high_sums[h]))
        rank = _rank(residuals, low_cards + high_cards[h], low_keys | high_keys[h],
                     problem.tolerance, problem.cap)
        if rank is not None and (best is None or rank < best):
            best = rank
    assert best is not None  # the empty subset is always admissible
    return finish(problem, _indices_of(-best[3], m))


def _nearest(sorted_sums: np.ndarray, sorted_keys: np.ndarray,
             wanted: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Closest entry of ``sorted_sums`` to each wanted value.

    Entries are ordered by (sum ascending, key descending), so the first entry
    of an equal-sum run carries its largest key.
    """
    n = sorted_sums.shape[0]
    right = np.searchsorted(sorted_sums, wanted, side="left")
    right_ok = right < n
    right_c = np.minimum(right, n - 1)
    left = np.maximum(right - 1, 0)
    left_ok = right > 0
    left_first = np.searchsorted(sorted_sums, sorted_sums[left], side="left")

    gap_right = np.where(right_ok, np.abs(wanted - sorted_sums[right_c]), np.inf)
    gap_left = np.where(left_ok, np.abs(wanted - sorted_sums[left_first]), np.inf)
    key_right = sorted_keys[right_c]
    key_left = sorted_keys[left_first]
    take_left = (gap_left < gap_right) | ((gap_left == gap_right) & (key_left > key_right))
    return (np.where(take_left, sorted_sums[left_first], sorted_sums[right_c]),
            np.where(take_left, key_left, key_right))


def _grouped(sums: np.ndarray, cards: np.ndarray, keys: np.ndarray,
             sort: bool) -> Dict[int, Tuple[np.ndarray, np.ndarray]]:
    groups: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
    for card in np.unique(cards):
        chosen = cards == card
        s, k = sums[chosen], keys[chosen]
        if sort:
            order = np.lexsort((-k, s))
            s, k = s[order], k[order]
        groups[int(card)] = (s, k)
    return groups


def solve_mitm(problem: SubsetSumProblem) -> SubsetSolution:
    """Meet in the middle over sorted half-sums grouped by cardinality."""
    _check_size(problem, MITM_MAX, "meet-in-the-middle")
    m = problem.size
    X = problem.candidates
    half = m // 2
    groups_a = _grouped(*_enumerate(X[:half], 0, m), sort=False)
    groups_b = _grouped(*_enumerate(X[half:], half, m), sort=True)

    by_card: Dict[int, List[Tuple[np.ndarray, np.ndarray]]] = {}
    for ca, (sums_a, keys_a) in groups_a.items():
        for cb, (sums_b, keys_b) in groups_b.items():
            if ca + cb > problem.cap:
                continue
            best_b, key_b = _nearest(sums_b, keys_b, problem.target - sums_a)
            residuals = np.abs(problem.target - (sums_a + best_b))
            by_card.setdefault(ca + cb, []).append((residuals, keys_a | key_b))

    for card in sorted(by_card):
        residuals = np.concatenate([r for r, _ in by_card[card]])
        if residuals.min() <= problem.tolerance:
            keys = np.concatenate([k for _, k in by_card[card]])
            key = int(keys[residuals == residuals.min()].max())
            return finish(problem, _indices_of(key, m))

    best: Optional[Tuple[float, int, int]] = None
    for card in sorted(by_card):
        residuals = np.concatenate([r for r, _ in by_card[card]])
        keys = np.concatenate([k for _, k in by_card[card]])
        low = float(residuals.min())
        rank = (low, card, -int(keys[residuals == low].max()))
        if best is None or rank < best:
            best = rank
    assert best is not None
    return finish(problem, _indices_of(-best[2], m))


def solve_greedy(problem: SubsetSumProblem) -> SubsetSolution:
    """Baseline: repeatedly add the candidate that most reduces the residual."""
    chosen: List[int] = []
    remaining = list(range(problem.size))
    gap = problem.target
    residual = abs(gap)
    while remaining and len(chosen) < problem.cap and residual > problem.tolerance:
        values = problem.candidates[remaining]
        position = int(np.argmin(np.abs(gap - values)))
        improved = abs(gap - float(values[position]))
        if improved >= residual:
            break
        index = remaining.pop(position)
        chosen.append(index)
        gap -= float(problem.candidates[index])
        residual = improved
    return finish(problem, chosen)


def best_residual(target: float, candidates: np.ndarray) -> float:
    """Smallest achievable |z - sum X_k| over all subsets, ignoring cardinality."""
    X = np.asarray(candidates, dtype=np.float64).reshape(-1)
    if X.shape[0] > MITM_MAX:
        raise ProblemSizeError(f"best_residual handles at most {MITM_MAX} candidates")
    half = X.shape[0] // 2
    sums_a, _, _ = _enumerate(X[:half], 0, X.shape[0])
    sums_b, _, _ = _enumerate(X[half:], half, X.shape[0])
    sums_b.sort()
    wanted = target - sums_a
    right = np.searchsorted(sums_b, wanted)
    n = sums_b.shape[0]
    gap_right = np.where(right < n, np.abs(wanted - sums_b[np.minimum(right, n - 1)]), np.inf)
    gap_left = np.where(right > 0, np.abs(wanted - sums_b[np.maximum(right - 1, 0)]), np.inf)
    return float(np.minimum(gap_left, gap_right).min())


class ExhaustiveSolver(ISubsetSumSolver):
    name = "exhaustive"
    max_size = EXHAUSTIVE_MAX

    def solve(self, problem: SubsetSumProblem) -> SubsetSolution:
        return solve_exhaustive(problem)


class MeetInMiddleSolver(ISubsetSumSolver):
    name = "mitm"
    max_size = MITM_MAX

    def solve(self, problem: SubsetSumProblem) -> SubsetSolution:
        return solve_mitm(problem)


class GreedySolver(ISubsetSumSolver):
    """Heuristic baseline; no size limit and no optimality guarantee."""

    name = "greedy"
    max_size = 1 << 30

    def solve(self, problem: SubsetSumProblem) -> SubsetSolution:
        return solve_greedy(problem)


class AutoSolver(ISubsetSumSolver):
    """Exhaustive search for tiny pools, meet in the middle above that."""

    name = "auto"

    def __init__(self, config: Optional[SolverConfig] = None):
        self.config = config or SolverConfig()
        self.max_size = min(self.config.mitm_limit, MITM_MAX)

    def solve(self, problem: SubsetSumProblem) -> SubsetSolution:
        limit = min(self.config.exhaustive_limit, AUTO_EXHAUSTIVE_BELOW - 1)
        if problem.size <= limit:
            return solve_exhaustive(problem)
        _check_size(problem, self.max_size, "auto")
        return solve_mitm(problem)


def make_solver(config: Optional[SolverConfig] = None) -> ISubsetSumSolver:
    """Solver selected by ``SOLVER.METHOD``."""
    config = config or SolverConfig()
    if config.method == "exhaustive":
        return ExhaustiveSolver()
    if config.method == "mitm":
        return MeetInMiddleSolver()
    if config.method == "greedy":
        return GreedySolver()
    logger.debug("Using automatic solver selection (exhaustive below %d candidates)",
                 AUTO_EXHAUSTIVE_BELOW)
    return AutoSolver(config)
