"""
Width requirements of the three constructions.

All logarithms are natural; the universal constant C absorbs the base.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from ..core.errors import DomainError
from ..subsetsum.problem import UniformContainment

WIDTH_MODES = ("two_for_one", "one_for_one", "full_L_plus_1")


@dataclass
class WidthReport:
    """Required source widths and the worst-case copy count rho."""
    mode: str
    widths: List[int]
    rho: Optional[int]
    c: float
    gamma: float
    delta: float
    copy_plan: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "widths": list(self.widths),
            "rho": self.rho,
            "C": self.c,
            "gamma": self.gamma,
            "delta": self.delta,
            "copy_plan": list(self.copy_plan),
        }


def dense_param_count(arch: Sequence[int]) -> int:
    return sum(arch[i] * arch[i + 1] + arch[i + 1] for i in range(len(arch) - 1))


def rho_bound(n_params: int, min_eps: float, delta: float, C: float, gamma: float) -> int:
    """rho = C N_t^(1+gamma) ln(1 / min(min_l eps_l, delta)), ceiled."""
    return max(1, math.ceil(C * n_params ** (1.0 + gamma) * math.log(1.0 / min(min_eps, delta))))


def _ceil_width(value: float) -> int:
    return max(1, math.ceil(value))


def width_bounds(target_arch: Sequence[int], eps: float, delta: float, mode: str,
                 C: float = 1.0, gamma: float = 0.1, lipschitz: float = 1.0, M: float = 1.0,
                 eps_layers: Optional[Sequence[float]] = None, pool: Optional[int] = None,
                 n_params: Optional[int] = None,
                 containment: Optional[UniformContainment] = None) -> WidthReport:
    """
    Lower bounds on the source widths.

    Args:
        target_arch: [n0, n1, ..., nL]
        eps: Tolerance eps' of the width formulas (or global eps)
        delta: Failure probability
        mode: two_for_one (one slab per target layer), one_for_one (copy layers
            of the L+1 construction) or full_L_plus_1 (worst-case rho form)
        C, gamma: Universal constants
        lipschitz, M: T and the input scale of the formulas
        eps_layers: Per-layer tolerances; eps for every layer by default
        pool: Copies per interior neuron reported in the copy plan
        n_params: N_t; the dense count of ``target_arch`` by default
        containment: Optional uniform-containment knob scaling C

    Returns:
        WidthReport with integer-ceiled widths
    """
    if mode not in WIDTH_MODES:
        raise DomainError(f"Unknown width mode {mode!r}; choose from {', '.join(WIDTH_MODES)}")
    if C <= 0 or gamma <= 0:
        raise DomainError("C and gamma must be positive")
    if not (eps > 0 and 0 < delta < 1):
        raise DomainError("eps must be positive and delta in (0, 1)")
    arch = [int(n) for n in target_arch]
    depth = len(arch) - 1
    if depth < 1:
        raise DomainError(f"target architecture needs at least two widths, got {arch}")
    c = C * (containment.scale() if containment is not None else 1.0)
    layer_eps = list(eps_layers) if eps_layers is not None else [eps] * depth
    scale = lipschitz * M
    n_t = n_params if n_params is not None else dense_param_count(arch)
    rho = rho_bound(n_t, min(layer_eps), delta, c, gamma)
    interior = pool if pool is not None else rho
    copy_plan = [interior] * (depth - 1) + [1]

    if mode == "two_for_one":
        widths: List[int] = []
        for t in range(1, depth + 1):
            n_in, n_out = arch[t - 1], arch[t]
            worst = min(layer_eps[t - 1] / scale, delta / n_out)
            widths.append(_ceil_width(c * n_in * math.log(n_in / worst)))
            widths.append(n_out)
        return WidthReport(mode, widths, None, C, gamma, delta, [1] * depth)

    first = min(layer_eps[0] / scale, delta / (interior * arch[1]))
    widths = [_ceil_width(c * arch[0] * math.log(arch[0] / first))]
    if mode == "one_for_one":
        for t in range(1, depth):
            n_t_l = arch[t]
            nxt = arch[t + 1]
            worst = min(layer_eps[t] / scale, delta / (interior * nxt))
            widths.append(_ceil_width(c * n_t_l * math.log(n_t_l / worst)))
        widths.append(arch[-1])
        return WidthReport(mode, widths, interior, C, gamma, delta, copy_plan)

    # worst-case display form: n_{s,l+1} >= C n_{t,l} ln(1 / min(eps_{l+1}, delta / rho))
    widths = [_ceil_width(c * arch[0] * math.log(1.0 / min(layer_eps[0], delta / rho)))]
    for t in range(1, depth):
        widths.append(_ceil_width(c * arch[t] * math.log(1.0 / min(layer_eps[t], delta / rho))))
    widths.append(arch[-1])
    return WidthReport(mode, widths, rho, C, gamma, delta, [rho] * (depth - 1) + [1])
