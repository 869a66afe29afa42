"""
Subset-sum approximation problems and their solutions.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ..core.errors import DomainError


@dataclass(frozen=True, eq=False)
class SubsetSumProblem:
    """Approximate ``target`` by a subset sum of ``candidates`` within ``tolerance``."""
    target: float
    candidates: np.ndarray
    tolerance: float
    max_subset_size: Optional[int] = None

    def __post_init__(self) -> None:
        candidates = np.array(self.candidates, dtype=np.float64, copy=True).reshape(-1)
        candidates.setflags(write=False)
        if not math.isfinite(self.target) or not np.all(np.isfinite(candidates)):
            raise DomainError("subset-sum target and candidates must be finite")
        if not self.tolerance >= 0:
            raise DomainError(f"tolerance must be non-negative, got {self.tolerance!r}")
        if self.max_subset_size is not None and self.max_subset_size < 0:
            raise DomainError(f"max_subset_size must be >= 0, got {self.max_subset_size}")
        object.__setattr__(self, "candidates", candidates)

    @property
    def size(self) -> int:
        return int(self.candidates.shape[0])

    @property
    def cap(self) -> int:
        """Effective cardinality limit."""
        if self.max_subset_size is None:
            return self.size
        return min(self.max_subset_size, self.size)

    def residual_of(self, indices: Sequence[int]) -> float:
        """Exact-summation residual |z - sum X_k| of an index set."""
        return abs(self.target - math.fsum(float(self.candidates[k]) for k in indices))


@dataclass(frozen=True)
class SubsetSolution:
    """Chosen indices, their residual and whether the tolerance was met."""
    indices: Tuple[int, ...]
    residual: float
    achieved: bool

    @property
    def cardinality(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class UniformContainment:
    """
    Distribution that contains a scaled uniform component.

    A candidate law contains U[-h, h] with weight alpha when its density is at
    least alpha / (2h) on that interval; ``bound`` caps |X|.
    """
    alpha: float
    c: float
    h: float
    bound: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if self.h <= 0:
            raise DomainError(f"h must be positive, got {self.h!r}")

    def scale(self, target_range: float = 1.0) -> float:
        """Factor multiplying the pool-size constant for targets in [-t, t]."""
        return max(1.0, target_range / self.h) / self.alpha


def finish(problem: SubsetSumProblem, indices: Sequence[int]) -> SubsetSolution:
    """Build a solution with the residual recomputed by exact summation."""
    chosen = tuple(sorted(int(k) for k in indices))
    residual = problem.residual_of(chosen)
    return SubsetSolution(chosen, residual, residual <= problem.tolerance)
