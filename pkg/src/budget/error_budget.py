"""
Error budget of a target network.

Splits a global sup-norm budget eps into per-layer parameter tolerances

    eps_l = eps / (n_l L) * [T^(L-l+1) (1 + M_{l-1}) (1 + eps/L)
                             * prod_{k=l+1}^{L-1} (||W^(k)||_inf + eps/L)]^-1

where M_l bounds sup ||x^(l)||_1 over the domain and T is the largest
Lipschitz constant of the activations. An empty product is 1.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import BudgetUnderflowError, DomainError
from ..core.rng import BIASES, PERTURBATION, SAMPLES, WEIGHTS, stream
from ..network.activation import UNCONSTRAINED, ActivationSpec, invert_g
from ..network.network import Layer, Network, forward_layers

logger = logging.getLogger(__name__)

Interval = Tuple[np.ndarray, np.ndarray]


def interval_bounds(net: Network) -> List[Interval]:
    """
    Elementwise bounds on x^(0), ..., x^(L) over the domain box.

    Positive and negative weights pick opposite ends of the previous interval;
    activations are applied to both ends, which is sound for the monotone
    activations in the registry.
    """
    low, high = net.domain.low.copy(), net.domain.high.copy()
    bounds: List[Interval] = [(low, high)]
    for layer in net.layers:
        positive = np.maximum(layer.weights, 0.0)
        negative = np.minimum(layer.weights, 0.0)
        pre_low = positive @ low + negative @ high + layer.bias
        pre_high = positive @ high + negative @ low + layer.bias
        ends = np.stack([layer.spec(pre_low), layer.spec(pre_high)])
        low, high = ends.min(axis=0), ends.max(axis=0)
        bounds.append((low, high))
    return bounds


def _sample_box(net: Network, samples: int, seed: int) -> np.ndarray:
    rng = stream(seed, SAMPLES)
    unit = rng.random((samples, net.n_inputs))
    points = net.domain.low + unit * (net.domain.high - net.domain.low)
    if net.n_inputs <= 12:
        points = np.vstack([points, net.domain.corners()])
    return points


def layer_norms(net: Network, method: str = "interval", samples: int = 1000, seed: int = 0,
                safety: float = 1.05) -> Tuple[List[float], List[float]]:
    """
    Layer norms entering the budget.

    Returns:
        (M_0..M_L, ||W^(1)||_inf..||W^(L)||_inf). ``interval`` bounds are sound;
        ``sampled`` estimates are multiplied by ``safety`` and are not.
    """
    w_inf = [float(np.max(np.sum(np.abs(layer.weights), axis=1))) for layer in net.layers]
    if method == "interval":
        norms = [float(np.sum(np.maximum(np.abs(lo), np.abs(hi))))
                 for lo, hi in interval_bounds(net)]
    elif method == "sampled":
        outputs = forward_layers(net, _sample_box(net, samples, seed))
        norms = [safety * float(np.max(np.sum(np.abs(x), axis=1))) for x in outputs]
    else:
        raise DomainError(f"Unknown norm method {method!r}")
    return norms, w_inf


def layer_peaks(net: Network) -> List[float]:
    """Interval bound on max_i sup |x_i^(l)| for l = 0..L."""
    return [float(np.max(np.maximum(np.abs(lo), np.abs(hi)))) for lo, hi in interval_bounds(net)]


@dataclass
class ErrorBudget:
    """Per-layer tolerances derived from a global budget."""
    eps: float
    eps_layers: List[float]
    norms: List[float]
    w_inf: List[float]
    lipschitz: float
    depth: int
    widths: List[int]
    peaks: List[float]
    method: str = "interval"

    @property
    def sound(self) -> bool:
        return self.method == "interval"

    def eps_for(self, layer: int) -> float:
        """Tolerance of 1-based target ``layer``."""
        return self.eps_layers[layer - 1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eps": self.eps,
            "eps_layers": list(self.eps_layers),
            "M": list(self.norms),
            "W_inf": list(self.w_inf),
            "T": self.lipschitz,
            "L": self.depth,
            "widths": list(self.widths),
            "norm_method": self.method,
            "sound": self.sound,
        }


def budget_from_norms(eps: float, widths: Sequence[int], norms: Sequence[float],
                      w_inf: Sequence[float], lipschitz: float) -> List[float]:
    """Closed-form eps_l for l = 1..L given M_0..M_{L-1} and ||W^(k)||_inf."""
    depth = len(widths)
    eps_layers = []
    for t in range(1, depth + 1):
        product = 1.0
        for k in range(t + 1, depth):
            product *= w_inf[k - 1] + eps / depth
        bracket = (lipschitz ** (depth - t + 1) * (1.0 + norms[t - 1]) * (1.0 + eps / depth)
                   * product)
        eps_layers.append(eps / (widths[t - 1] * depth) / bracket)
    return eps_layers


def error_budget(net: Network, eps: float, method: str = "interval", samples: int = 1000,
                 seed: int = 0, safety: float = 1.05, underflow: float = 1e-12) -> ErrorBudget:
    """
    Per-layer parameter tolerances guaranteeing sup-norm error ``eps``.

    Raises:
        DomainError: eps outside (0, 1)
        BudgetUnderflowError: some eps_l below ``underflow``
    """
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")
    norms, w_inf = layer_norms(net, method, samples, seed, safety)
    if method == "sampled":
        logger.warning("Budget uses sampled layer norms; the guarantee is not sound")
    lipschitz = max(layer.spec.lipschitz for layer in net.layers)
    widths = [layer.n_out for layer in net.layers]
    eps_layers = budget_from_norms(eps, widths, norms, w_inf, lipschitz)
    smallest = min(eps_layers)
    if smallest < underflow:
        layer = eps_layers.index(smallest) + 1
        raise BudgetUnderflowError(
            f"budget underflow: eps_{layer} = {smallest:.3e} < {underflow:.1e}; "
            f"the subset-sum tolerances would be unattainable"
        )
    logger.debug("Error budget eps=%g: %s", eps, ", ".join(f"{e:.3e}" for e in eps_layers))
    return ErrorBudget(eps, eps_layers, norms, w_inf, lipschitz, net.depth, widths,
                       layer_peaks(net), method)


def sigma_eps2(spec: ActivationSpec, eps1: float, n0: int, M: float, delta1: float,
               n_t1: int, C: float = 1.0, lipschitz: Optional[float] = None
               ) -> Tuple[float, float]:
    """
    First-layer scale sigma and linearization error eps''.

    eps'' = g^-1(eps' / (C T n0 (M/|m+ + m-|) ln(n0 / min(delta'/n_t1, eps'/(T M)))))
    and sigma = min(1, a(eps'')/M); activations without a radius limit give
    sigma = 1 and an unconstrained eps''.
    """
    if not (0 < eps1 < 1 and 0 < delta1 < 1):
        raise DomainError("eps' and delta' must lie in (0, 1)")
    if n0 < 1 or n_t1 < 1 or M <= 0:
        raise DomainError(f"n0 and n_t1 must be >= 1 and M positive, got {n0}, {n_t1}, {M}")
    if not spec.bounded_radius:
        return 1.0, UNCONSTRAINED
    T = spec.lipschitz if lipschitz is None else lipschitz
    # min(...) <= delta' / n_t1 < 1 <= n0, so the log is positive
    log_term = math.log(n0 / min(delta1 / n_t1, eps1 / (T * M)))
    y = eps1 / (C * T * n0 * (M / abs(spec.slope_sum)) * log_term)
    eps2 = invert_g(spec, min(y, spec.g(1.0)))
    return min(1.0, spec.radius(eps2) / M), eps2


def perturb_within_budget(net: Network, budget: ErrorBudget, seed: int) -> Network:
    """Copy of ``net`` with every parameter of layer l moved by U[-eps_l, eps_l]."""
    layers = []
    for index, (layer, eps_l) in enumerate(zip(net.layers, budget.eps_layers), start=1):
        w_noise = stream(seed, PERTURBATION, index, WEIGHTS).uniform(
            -eps_l, eps_l, size=layer.weights.shape)
        b_noise = stream(seed, PERTURBATION, index, BIASES).uniform(
            -eps_l, eps_l, size=layer.bias.shape)
        layers.append(Layer(layer.weights + w_noise, layer.bias + b_noise, layer.activation))
    return Network(tuple(layers), net.domain, role="source")
