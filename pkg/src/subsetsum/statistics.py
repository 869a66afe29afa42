"""
Monte-Carlo statistics of random subset-sum approximation.

Trial t draws from its own stream (seed, TRIALS, t): the target first, then
the candidates. Candidate samplers are prefix-stable, so the first m draws of
a larger pool equal the smaller pool and success is monotone in m per trial.

Alongside the simulations, expected_hits counts the subsets expected to land
within a tolerance under a normal model of k-subset sums, and
pool_for_tolerance turns that count into the pool size a construction block
needs for a given failure probability.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import comb
from scipy.stats import norm

from ..core.errors import DomainError, UnattainableError
from ..core.rng import trial_stream
from .solvers import MITM_MAX, best_residual

logger = logging.getLogger(__name__)

Sampler = Callable[[np.random.Generator, int], np.ndarray]
TargetSampler = Callable[[np.random.Generator], float]

BENCH_COLUMNS = ["distribution", "m", "eps", "trials", "successes", "rate"]


def _uniform(rng: np.random.Generator, m: int) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=m)


def _product(rng: np.random.Generator, m: int) -> np.ndarray:
    # U[-1,1] * U[0,1]: one sign-split half of a two-layers-for-one pool
    u = rng.random((m, 2))
    return (2.0 * u[:, 0] - 1.0) * u[:, 1]


def _product_signed(rng: np.random.Generator, m: int) -> np.ndarray:
    u = rng.random((m, 2))
    return (2.0 * u[:, 0] - 1.0) * (2.0 * u[:, 1] - 1.0)


SAMPLERS: Dict[str, Sampler] = {
    "uniform": _uniform,
    "product": _product,
    "product_signed": _product_signed,
}

# Var(X) of one candidate under each sampler
CANDIDATE_VARIANCE: Dict[str, float] = {
    "uniform": 1.0 / 3.0,
    "product": 1.0 / 9.0,
    "product_signed": 1.0 / 9.0,
}


def sampler_for(name: str) -> Sampler:
    try:
        return SAMPLERS[name]
    except KeyError:
        raise DomainError(f"Unknown candidate distribution {name!r}; "
                          f"choose from {', '.join(SAMPLERS)}")


def uniform_target(rng: np.random.Generator) -> float:
    return float(rng.uniform(-1.0, 1.0))


def _trial_succeeds(sampler: Sampler, m: int, eps: float, z_sampler: TargetSampler,
                    seed: int, trial: int) -> bool:
    rng = trial_stream(seed, trial)
    z = z_sampler(rng)
    X = sampler(rng, m)
    return best_residual(z, X) <= eps


def success_count(dist: str, m: int, eps: float, trials: int, seed: int = 0,
                  z_sampler: Optional[TargetSampler] = None, workers: int = 1) -> int:
    """Number of trials in which some subset lands within ``eps`` of the target."""
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if m > MITM_MAX:
        raise DomainError(f"pool size {m} exceeds the solver limit {MITM_MAX}")
    sampler = sampler_for(dist)
    z_sampler = z_sampler or uniform_target

    def run(trial: int) -> bool:
        return _trial_succeeds(sampler, m, eps, z_sampler, seed, trial)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, range(trials)))
    else:
        outcomes = [run(t) for t in range(trials)]
    return int(sum(outcomes))


def success_rate(dist: str, m: int, eps: float, z_sampler: Optional[TargetSampler] = None,
                 trials: int = 10_000, seed: int = 0, workers: int = 1) -> float:
    """
    Fraction of random instances that admit a subset within ``eps``.

    Args:
        dist: Candidate distribution name (see SAMPLERS)
        m: Pool size
        eps: Tolerance
        z_sampler: Target sampler; U[-1, 1] by default
        trials: Number of independent instances
        seed: Root seed of the per-trial streams
        workers: Threads evaluating trials; the result does not depend on it

    Returns:
        Success rate in [0, 1]
    """
    return success_count(dist, m, eps, trials, seed, z_sampler, workers) / trials


def min_m_for(dist: str, eps: float, target_rate: float, seed: int = 0,
              trials: int = 10_000, cap: int = MITM_MAX,
              z_sampler: Optional[TargetSampler] = None) -> int:
    """
    Smallest pool size whose success rate reaches ``target_rate``.

    Tries m = 0, 1, 2, 4, ... up to ``cap`` and bisects the last bracket. The
    rate curve is made monotone with a running maximum.
    """
    if not 0 < target_rate < 1:
        raise DomainError(f"target_rate must lie in (0, 1), got {target_rate!r}")
    rates: Dict[int, float] = {}

    def rate(m: int) -> float:
        if m not in rates:
            rates[m] = success_rate(dist, m, eps, z_sampler, trials, seed)
            logger.debug("success rate %s m=%d eps=%g: %.4f", dist, m, eps, rates[m])
        return max(r for k, r in rates.items() if k <= m)

    if rate(0) >= target_rate:
        return 0
    low, high = 0, 1
    while rate(high) < target_rate:
        if high >= cap:
            raise UnattainableError(
                f"success rate {target_rate} not reached for eps={eps} with m <= {cap}"
            )
        low, high = high, min(2 * high, cap)
    while high - low > 1:
        mid = (low + high) // 2
        if rate(mid) >= target_rate:
            high = mid
        else:
            low = mid
    return high


def fit_log_law(eps_grid: Sequence[float], m_star: Sequence[float]) -> Tuple[float, float, float]:
    """
    Least-squares fit of m* = a + b ln(1/eps).

    Returns:
        (a, b, R^2); R^2 is 1 when m* does not vary
    """
    if len(eps_grid) != len(m_star) or len(eps_grid) < 2:
        raise DomainError("fit_log_law needs at least two matching (eps, m*) pairs")
    x = np.log(1.0 / np.asarray(eps_grid, dtype=np.float64))
    y = np.asarray(m_star, dtype=np.float64)
    b, a = np.polyfit(x, y, 1)
    fitted = a + b * x
    total = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if total == 0.0 else 1.0 - float(np.sum((y - fitted) ** 2)) / total
    return float(a), float(b), r2


def success_table(distributions: Iterable[str], m_grid: Iterable[int],
                  eps_grid: Iterable[float], trials: int, seed: int = 0,
                  workers: int = 1) -> pd.DataFrame:
    """Benchmark grid as a DataFrame with BENCH_COLUMNS."""
    rows: List[Dict[str, object]] = []
    eps_values = list(eps_grid)
    m_values = list(m_grid)
    for dist in distributions:
        for m in m_values:
            for eps in eps_values:
                successes = success_count(dist, m, eps, trials, seed, workers=workers)
                rows.append({
                    "distribution": dist,
                    "m": int(m),
                    "eps": float(eps),
                    "trials": int(trials),
                    "successes": successes,
                    "rate": successes / trials,
                })
                logger.info("%s m=%d eps=%g: %d/%d", dist, m, eps, successes, trials)
    return pd.DataFrame(rows, columns=BENCH_COLUMNS)


def expected_hits(n: int, tolerance: float, dist: str, cap: Optional[int] = None,
                  target: float = 1.0) -> float:
    """
    Expected number of nonempty subsets of ``n`` candidates within ``tolerance`` of ``target``.

    A k-subset sum is taken as N(0, k Var(X)), so the count is
    sum_k C(n, k) 2 tolerance pdf_k(target) over k <= cap. Misses are
    roughly Poisson, so a block fails with probability about exp(-hits).
    """
    if dist not in CANDIDATE_VARIANCE:
        raise DomainError(f"Unknown candidate distribution {dist!r}; "
                          f"choose from {', '.join(CANDIDATE_VARIANCE)}")
    if tolerance <= 0:
        raise DomainError(f"tolerance must be positive, got {tolerance!r}")
    top = n if cap is None else min(n, cap)
    if top < 1:
        return 0.0
    k = np.arange(1, top + 1)
    density = norm.pdf(target, scale=np.sqrt(k * CANDIDATE_VARIANCE[dist]))
    return float(np.sum(comb(n, k) * 2.0 * tolerance * density))


def pool_for_tolerance(tolerance: float, dist: str, failure: float, floor: int,
                       ceiling: int, cap: Optional[int] = None) -> int:
    """
    Smallest pool size in [floor, ceiling] whose blocks fail with probability <= ``failure``.

    Targets anywhere in [-1, 1] are covered by evaluating the edge target 1.
    Returns ``ceiling`` (or ``floor`` when that is larger) if no size in the
    range gets there.
    """
    if not 0 < failure < 1:
        raise DomainError(f"failure probability must lie in (0, 1), got {failure!r}")
    needed = math.log(1.0 / failure)
    n = max(1, floor)
    while n < ceiling and expected_hits(n, tolerance, dist, cap) < needed:
        n += 1
    hits = expected_hits(n, tolerance, dist, cap)
    if hits < needed:
        logger.warning("Pool of %d %s candidates expects %.2f hits at tolerance %.3e; "
                       "%.2f needed for failure %.1e", n, dist, hits, tolerance, needed, failure)
    return n
