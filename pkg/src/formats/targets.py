"""
Synthetic target networks.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from ..core.errors import DomainError, ShapeError
from ..core.rng import BIASES, SPARSITY, TARGET, WEIGHTS, stream, uniform_rows, uniform_vector
from ..network.network import Domain, Network, build_network

logger = logging.getLogger(__name__)


def gen_target(arch: Sequence[int], activation: str = "relu", sparsity: float = 0.0,
               seed: int = 0, output_activation: Optional[str] = None,
               domain: Optional[Domain] = None) -> Network:
    """
    Random target with U[-1, 1] parameters and a fraction of them zeroed.

    Exactly round(sparsity * N) of the N parameters are set to zero, chosen
    uniformly over the whole network.

    Args:
        arch: Layer widths [n0, n1, ..., nL]
        activation: Activation tag of every layer
        sparsity: Fraction of parameters to zero, in [0, 1]
        seed: Random seed
        output_activation: Activation of the last layer (defaults to ``activation``)
        domain: Input box (defaults to [-1, 1]^n0)
    """
    if len(arch) < 2 or any(int(n) < 1 for n in arch):
        raise ShapeError(f"architecture needs at least two positive widths, got {list(arch)}")
    if not 0.0 <= sparsity <= 1.0:
        raise DomainError(f"sparsity must lie in [0, 1], got {sparsity}")
    depth = len(arch) - 1
    weights = [uniform_rows(seed, t, WEIGHTS, (int(arch[t]), int(arch[t - 1])), 1.0, TARGET)
               for t in range(1, depth + 1)]
    biases = [uniform_vector(seed, t, BIASES, int(arch[t]), 1.0, TARGET)
              for t in range(1, depth + 1)]

    flat = np.concatenate([np.concatenate([w.ravel(), b]) for w, b in zip(weights, biases)])
    n_zero = int(round(sparsity * flat.size))
    if n_zero:
        chosen = stream(seed, SPARSITY).permutation(flat.size)[:n_zero]
        flat[chosen] = 0.0
    offset = 0
    for t in range(depth):
        w_size = weights[t].size
        weights[t] = flat[offset:offset + w_size].reshape(weights[t].shape)
        offset += w_size
        biases[t] = flat[offset:offset + biases[t].size].copy()
        offset += biases[t].size

    activations = [activation] * depth
    if output_activation is not None:
        activations[-1] = output_activation
    logger.info("Generated target %s (%s), %d of %d parameters zeroed", list(arch), activation,
                n_zero, flat.size)
    return build_network(weights, biases, activations, domain, role="target")
