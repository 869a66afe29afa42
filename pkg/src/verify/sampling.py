"""
Quasi-random points in the input box.
"""

import numpy as np
from scipy.stats import qmc

from ..core.errors import DomainError
from ..network.network import Domain


def halton_points(domain: Domain, n: int, seed: int) -> np.ndarray:
    """
    First ``n`` points of a scrambled Halton sequence scaled to the box.

    The sequence is generated in order, so the first n points of a longer run
    are exactly these n points.
    """
    if n < 1:
        raise DomainError(f"sample count must be >= 1, got {n}")
    engine = qmc.Halton(d=domain.dim, scramble=True, seed=seed)
    unit = engine.random(n)
    return domain.low + unit * (domain.high - domain.low)


def domain_samples(domain: Domain, n: int, seed: int, corner_limit: int = 4096) -> np.ndarray:
    """Halton points plus every box corner when there are at most ``corner_limit`` of them."""
    points = halton_points(domain, n, seed)
    if 2 ** domain.dim <= corner_limit:
        points = np.vstack([points, domain.corners()])
    return points
