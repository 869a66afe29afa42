"""
Lottery tickets: masked views of a source network.

A Ticket never alters source values. Evaluation uses lambda_l * theta * mask,
and ``output_rows`` selects which source output neurons form the ticket's
outputs (unused spare rows of the last layer are pruned away).
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import ShapeError
from .manifest import ConstructionManifest
from .network import Layer, Network, forward


def _frozen_mask(mask: np.ndarray) -> np.ndarray:
    out = np.array(mask, dtype=bool, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Ticket:
    """Source network plus binary masks and per-layer scales."""
    source: Network
    weight_masks: Tuple[np.ndarray, ...]
    bias_masks: Tuple[np.ndarray, ...]
    scales: Tuple[float, ...] = ()
    output_rows: Tuple[int, ...] = ()
    manifest: Optional[ConstructionManifest] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        depth = self.source.depth
        weight_masks = tuple(_frozen_mask(m) for m in self.weight_masks)
        bias_masks = tuple(_frozen_mask(m) for m in self.bias_masks)
        if len(weight_masks) != depth or len(bias_masks) != depth:
            raise ShapeError(f"ticket needs {depth} weight and bias masks, got "
                             f"{len(weight_masks)} and {len(bias_masks)}")
        for index, (layer, wm, bm) in enumerate(zip(self.source.layers, weight_masks,
                                                    bias_masks), start=1):
            if wm.shape != layer.weights.shape or bm.shape != layer.bias.shape:
                raise ShapeError(f"mask shapes of layer {index} do not match the source")
        scales = tuple(float(s) for s in self.scales) if self.scales else (1.0,) * depth
        if len(scales) != depth:
            raise ShapeError(f"ticket needs {depth} scales, got {len(scales)}")
        n_out = self.source.n_outputs
        rows = tuple(int(r) for r in self.output_rows) if self.output_rows else tuple(range(n_out))
        if any(r < 0 or r >= n_out for r in rows):
            raise ShapeError(f"output rows {rows} outside the {n_out} source outputs")
        object.__setattr__(self, "weight_masks", weight_masks)
        object.__setattr__(self, "bias_masks", bias_masks)
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "output_rows", rows)

    @classmethod
    def dense(cls, source: Network) -> "Ticket":
        """Ticket keeping every parameter of ``source``."""
        return cls(
            source,
            tuple(np.ones_like(layer.weights, dtype=bool) for layer in source.layers),
            tuple(np.ones_like(layer.bias, dtype=bool) for layer in source.layers),
        )

    @cached_property
    def effective(self) -> Network:
        """Network with parameters lambda_l * theta * mask."""
        layers = []
        for layer, wm, bm, scale in zip(self.source.layers, self.weight_masks,
                                        self.bias_masks, self.scales):
            weights = np.where(wm, scale * layer.weights, 0.0)
            bias = np.where(bm, scale * layer.bias, 0.0)
            layers.append(Layer(weights, bias, layer.activation))
        return Network(tuple(layers), self.source.domain, role="source")

    @property
    def depth(self) -> int:
        return self.source.depth

    @property
    def n_outputs(self) -> int:
        return len(self.output_rows)


def forward_ticket(ticket: Ticket, x: np.ndarray) -> np.ndarray:
    """Evaluate the ticket on one input vector or a batch of inputs."""
    out = forward(ticket.effective, x)
    rows = list(ticket.output_rows)
    if rows == list(range(ticket.source.n_outputs)):
        return out
    return out[..., rows]


@dataclass
class TicketStats:
    """Size figures of a ticket."""
    param_count: int
    max_width: int
    depth: int
    layer_params: List[int]
    layer_widths: List[int]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "param_count": self.param_count,
            "max_width": self.max_width,
            "depth": self.depth,
            "layer_params": list(self.layer_params),
            "layer_widths": list(self.layer_widths),
        }


def _active_neurons(weight_masks: Sequence[np.ndarray], bias_masks: Sequence[np.ndarray],
                    output_rows: Sequence[int]) -> List[int]:
    widths = []
    depth = len(weight_masks)
    for index in range(depth):
        active = weight_masks[index].any(axis=1) | bias_masks[index]
        if index + 1 < depth:
            active = active | weight_masks[index + 1].any(axis=0)
        else:
            # an output row with nothing kept still yields phi(0)
            selected = np.zeros_like(active)
            selected[list(output_rows)] = True
            active = active & selected
        widths.append(int(np.count_nonzero(active)))
    return widths


def ticket_stats(ticket: Ticket) -> TicketStats:
    """Kept parameters, widest layer and depth of a ticket."""
    layer_params = [int(np.count_nonzero(wm) + np.count_nonzero(bm))
                    for wm, bm in zip(ticket.weight_masks, ticket.bias_masks)]
    widths = _active_neurons(ticket.weight_masks, ticket.bias_masks, ticket.output_rows)
    return TicketStats(
        param_count=sum(layer_params),
        max_width=max(widths) if widths else 0,
        depth=ticket.depth,
        layer_params=layer_params,
        layer_widths=widths,
    )
