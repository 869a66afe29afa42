"""
Initialization plans.

A plan fixes, per layer, the uniform half-ranges of weights and biases, the
looks-linear mirroring and the activation. Together with the seed it
determines the source network completely, so tickets store the plan instead
of the source values.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from ..core.errors import DomainError, ShapeError
from ..core.rng import BIASES, WEIGHTS, uniform_rows, uniform_vector
from ..network.activation import spec_for
from ..network.network import Layer, Network

SCHEMES = ("convenient", "looks_linear", "thm1_scaled", "construction")


@dataclass(frozen=True)
class LayerInit:
    """Sampling rule of one layer; a zero bias half-range means zero biases."""
    n_in: int
    n_out: int
    weight_half_range: float
    bias_half_range: float
    activation: str
    mirror_rows: bool = False
    mirror_cols: bool = False

    def __post_init__(self) -> None:
        if self.n_in < 1 or self.n_out < 1:
            raise ShapeError(f"layer widths must be >= 1, got {self.n_out}x{self.n_in}")
        if not self.weight_half_range > 0 or self.bias_half_range < 0:
            raise DomainError("weight half-range must be positive, bias half-range >= 0")
        if self.mirror_rows and self.n_out % 2:
            raise ShapeError(f"cannot mirror an odd number of rows ({self.n_out})")
        if self.mirror_cols and self.n_in % 2:
            raise ShapeError(f"cannot mirror an odd number of columns ({self.n_in})")
        spec_for(self.activation)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_in": self.n_in,
            "n_out": self.n_out,
            "weight_half_range": self.weight_half_range,
            "bias_half_range": self.bias_half_range,
            "activation": self.activation,
            "mirror_rows": self.mirror_rows,
            "mirror_cols": self.mirror_cols,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LayerInit":
        return cls(
            n_in=int(data["n_in"]),
            n_out=int(data["n_out"]),
            weight_half_range=float(data["weight_half_range"]),
            bias_half_range=float(data["bias_half_range"]),
            activation=str(data["activation"]),
            mirror_rows=bool(data.get("mirror_rows", False)),
            mirror_cols=bool(data.get("mirror_cols", False)),
        )


@dataclass(frozen=True)
class InitPlan:
    """Complete recipe of a source network."""
    scheme: str
    seed: int
    layers: Tuple[LayerInit, ...]

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise DomainError(f"Unknown init scheme {self.scheme!r}")
        layers = tuple(self.layers)
        for index in range(1, len(layers)):
            if layers[index].n_in != layers[index - 1].n_out:
                raise ShapeError(f"init plan layers {index} and {index + 1} do not compose")
        object.__setattr__(self, "layers", layers)

    @property
    def arch(self) -> List[int]:
        return [self.layers[0].n_in] + [layer.n_out for layer in self.layers]

    def mirror_pairs(self, layer: int) -> List[Tuple[int, int]]:
        """Row pairs (k, k') of 1-based ``layer`` whose weights are exact negatives."""
        rule = self.layers[layer - 1]
        if not rule.mirror_rows:
            return []
        half = rule.n_out // 2
        return [(k, k + half) for k in range(half)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scheme": self.scheme,
            "seed": self.seed,
            "layers": [layer.to_dict() for layer in self.layers],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "InitPlan":
        return cls(
            scheme=str(data["scheme"]),
            seed=int(data["seed"]),
            layers=tuple(LayerInit.from_dict(layer) for layer in data["layers"]),
        )


def _weights(seed: int, index: int, rule: LayerInit) -> np.ndarray:
    rows = rule.n_out // 2 if rule.mirror_rows else rule.n_out
    cols = rule.n_in // 2 if rule.mirror_cols else rule.n_in
    block = uniform_rows(seed, index, WEIGHTS, (rows, cols), rule.weight_half_range)
    if rule.mirror_cols:
        block = np.hstack([block, -block])
    if rule.mirror_rows:
        block = np.vstack([block, -block])
    return block


def materialize_layer(plan: InitPlan, layer: int) -> Layer:
    """Draw 1-based ``layer`` of the planned source network."""
    rule = plan.layers[layer - 1]
    weights = _weights(plan.seed, layer, rule)
    if rule.bias_half_range > 0:
        bias = uniform_vector(plan.seed, layer, BIASES, rule.n_out, rule.bias_half_range)
    else:
        bias = np.zeros(rule.n_out)
    return Layer(weights, bias, rule.activation)


def materialize(plan: InitPlan) -> Network:
    """Draw the full source network described by ``plan``."""
    layers = tuple(materialize_layer(plan, index) for index in range(1, len(plan.layers) + 1))
    return Network(layers, role="source")


def plan_from_arch(scheme: str, arch: Sequence[int], seed: int, activations: Sequence[str],
                   weight_ranges: Sequence[float], bias_ranges: Sequence[float],
                   mirror_rows: Sequence[bool], mirror_cols: Sequence[bool]) -> InitPlan:
    """Assemble a plan from per-layer lists."""
    depth = len(arch) - 1
    if depth < 1:
        raise ShapeError(f"architecture needs at least two widths, got {list(arch)}")
    lists = (activations, weight_ranges, bias_ranges, mirror_rows, mirror_cols)
    if any(len(values) != depth for values in lists):
        raise ShapeError(f"per-layer settings must have {depth} entries")
    layers = tuple(
        LayerInit(int(arch[i]), int(arch[i + 1]), float(weight_ranges[i]), float(bias_ranges[i]),
                  activations[i], bool(mirror_rows[i]), bool(mirror_cols[i]))
        for i in range(depth)
    )
    return InitPlan(scheme, seed, layers)
