"""
Dense feed-forward networks.

A Network is an immutable stack of Layers over an axis-aligned input box.
Targets are the functions to approximate and keep every parameter in [-1, 1];
sources are the random networks that tickets are pruned from.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import DomainError, ShapeError
from .activation import ActivationSpec, spec_for

ROLES = ("target", "source")


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Domain:
    """Axis-aligned input box."""
    low: np.ndarray
    high: np.ndarray

    def __post_init__(self) -> None:
        low = _frozen(np.atleast_1d(self.low))
        high = _frozen(np.atleast_1d(self.high))
        if low.ndim != 1 or low.shape != high.shape:
            raise ShapeError(f"domain bounds must be vectors of equal length, got "
                             f"{low.shape} and {high.shape}")
        if np.any(low > high):
            raise ShapeError("domain lower bounds must not exceed upper bounds")
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)

    @classmethod
    def unit(cls, dim: int) -> "Domain":
        """The default box [-1, 1]^dim."""
        return cls(-np.ones(dim), np.ones(dim))

    @property
    def dim(self) -> int:
        return int(self.low.shape[0])

    def sup_abs(self) -> np.ndarray:
        """Per-coordinate bound on |x_i| over the box."""
        return np.maximum(np.abs(self.low), np.abs(self.high))

    def corners(self) -> np.ndarray:
        """All 2^dim vertices of the box, one per row."""
        bits = (np.arange(2 ** self.dim)[:, None] >> np.arange(self.dim)[None, :]) & 1
        return np.where(bits == 1, self.high[None, :], self.low[None, :])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Domain):
            return NotImplemented
        return bool(np.array_equal(self.low, other.low) and np.array_equal(self.high, other.high))

    def __hash__(self) -> int:
        return hash((self.low.tobytes(), self.high.tobytes()))


@dataclass(frozen=True)
class Layer:
    """One affine map followed by an activation: x -> phi(W x + b)."""
    weights: np.ndarray
    bias: np.ndarray
    activation: str

    def __post_init__(self) -> None:
        weights = _frozen(self.weights)
        bias = _frozen(self.bias)
        if weights.ndim != 2:
            raise ShapeError(f"weights must be a matrix, got shape {weights.shape}")
        if bias.shape != (weights.shape[0],):
            raise ShapeError(f"bias shape {bias.shape} does not match "
                             f"{weights.shape[0]} output neurons")
        if weights.shape[0] < 1 or weights.shape[1] < 1:
            raise ShapeError(f"layer widths must be >= 1, got {weights.shape}")
        spec_for(self.activation)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", bias)

    @property
    def n_in(self) -> int:
        return int(self.weights.shape[1])

    @property
    def n_out(self) -> int:
        return int(self.weights.shape[0])

    @property
    def spec(self) -> ActivationSpec:
        return spec_for(self.activation)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Layer):
            return NotImplemented
        return (self.activation == other.activation
                and np.array_equal(self.weights, other.weights)
                and np.array_equal(self.bias, other.bias))

    def __hash__(self) -> int:
        return hash((self.weights.tobytes(), self.bias.tobytes(), self.activation))


@dataclass(frozen=True)
class Network:
    """Immutable dense feed-forward network."""
    layers: Tuple[Layer, ...]
    domain: Optional[Domain] = None
    role: str = "target"

    def __post_init__(self) -> None:
        layers = tuple(self.layers)
        if len(layers) < 1:
            raise ShapeError("a network needs at least one layer")
        for index in range(1, len(layers)):
            if layers[index].n_in != layers[index - 1].n_out:
                raise ShapeError(
                    f"layer {index + 1} expects {layers[index].n_in} inputs but layer "
                    f"{index} produces {layers[index - 1].n_out}"
                )
        if self.role not in ROLES:
            raise DomainError(f"role must be one of {ROLES}, got {self.role!r}")
        domain = self.domain if self.domain is not None else Domain.unit(layers[0].n_in)
        if domain.dim != layers[0].n_in:
            raise ShapeError(f"domain has {domain.dim} coordinates, network expects "
                             f"{layers[0].n_in}")
        if self.role == "target":
            for index, layer in enumerate(layers, start=1):
                if np.any(np.abs(layer.weights) > 1.0) or np.any(np.abs(layer.bias) > 1.0):
                    raise DomainError(f"target layer {index} has parameters outside [-1, 1]")
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "domain", domain)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def arch(self) -> List[int]:
        return [self.layers[0].n_in] + [layer.n_out for layer in self.layers]

    @property
    def n_inputs(self) -> int:
        return self.layers[0].n_in

    @property
    def n_outputs(self) -> int:
        return self.layers[-1].n_out

    @property
    def activations(self) -> List[str]:
        return [layer.activation for layer in self.layers]

    def as_role(self, role: str) -> "Network":
        """Same parameters under another role tag."""
        return Network(self.layers, self.domain, role)


def _as_batch(net: Network, x: np.ndarray) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    batch = arr[None, :] if single else arr
    if batch.ndim != 2 or batch.shape[1] != net.n_inputs:
        raise ShapeError(f"input of shape {arr.shape} does not match {net.n_inputs} inputs")
    return batch, single


def forward_layers(net: Network, x: np.ndarray) -> List[np.ndarray]:
    """
    Evaluate every layer.

    Args:
        net: Network to evaluate
        x: Single input vector or a batch of row vectors

    Returns:
        [x^(0), x^(1), ..., x^(L)], each batched as rows
    """
    batch, _ = _as_batch(net, x)
    outputs = [batch]
    for layer in net.layers:
        pre = outputs[-1] @ layer.weights.T + layer.bias
        outputs.append(layer.spec(pre))
    return outputs


def forward(net: Network, x: np.ndarray) -> np.ndarray:
    """Evaluate the network on one input vector or a batch of inputs."""
    _, single = _as_batch(net, x)
    out = forward_layers(net, x)[-1]
    return out[0] if single else out


def nonzero_count(net: Network) -> int:
    """Number of nonzero weights and biases."""
    return int(sum(np.count_nonzero(layer.weights) + np.count_nonzero(layer.bias)
                   for layer in net.layers))


def build_network(weights: Sequence[np.ndarray], biases: Sequence[np.ndarray],
                  activations: Sequence[str], domain: Optional[Domain] = None,
                  role: str = "target") -> Network:
    """Assemble a network from per-layer arrays."""
    if not (len(weights) == len(biases) == len(activations)):
        raise ShapeError("weights, biases and activations must have one entry per layer")
    layers = tuple(Layer(w, b, a) for w, b, a in zip(weights, biases, activations))
    return Network(layers, domain, role)
