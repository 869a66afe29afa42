"""
Source-network initializers.

Convenient initialization draws every weight and the first-layer biases from
U[-1, 1] and zeroes deeper biases. Looks-linear initialization mirrors each
even dimension so that paired neurons cancel exactly. The scaled scheme
shrinks the first layer to U[-sigma, sigma] and widens the second layer to
U[-1/(|m+ + m-| sigma), +1/(|m+ + m-| sigma)], which keeps the product
variables of a two-layers-for-one block in [-1, 1] x [-1, 1].
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import ActivationError, DomainError, ShapeError
from ..network.activation import ActivationSpec
from ..network.network import Layer, Network
from ..network.ticket import Ticket
from .plan import InitPlan, materialize, plan_from_arch

logger = logging.getLogger(__name__)


def _activations(arch: Sequence[int], activations: Optional[Sequence[str]],
                 default: str) -> List[str]:
    depth = len(arch) - 1
    if activations is None:
        return [default] * depth
    if len(activations) != depth:
        raise ShapeError(f"expected {depth} activations, got {len(activations)}")
    return list(activations)


def plan_convenient(arch: Sequence[int], seed: int,
                    activations: Optional[Sequence[str]] = None) -> InitPlan:
    depth = len(arch) - 1
    return plan_from_arch(
        "convenient", arch, seed, _activations(arch, activations, "relu"),
        weight_ranges=[1.0] * depth,
        bias_ranges=[1.0] + [0.0] * (depth - 1),
        mirror_rows=[False] * depth,
        mirror_cols=[False] * depth,
    )


def init_convenient(arch: Sequence[int], seed: int,
                    activations: Optional[Sequence[str]] = None) -> Network:
    """Weights and first-layer biases i.i.d. U[-1, 1]; deeper biases zero."""
    return materialize(plan_convenient(arch, seed, activations))


def plan_looks_linear(arch: Sequence[int], seed: int,
                      activations: Optional[Sequence[str]] = None) -> InitPlan:
    depth = len(arch) - 1
    for width in arch[1:-1]:
        if width % 2:
            raise ShapeError(f"looks-linear hidden widths must be even, got {width}")
    return plan_from_arch(
        "looks_linear", arch, seed, _activations(arch, activations, "relu"),
        weight_ranges=[1.0] * depth,
        bias_ranges=[1.0] + [0.0] * (depth - 1),
        mirror_rows=[arch[i + 1] % 2 == 0 for i in range(depth)],
        mirror_cols=[arch[i] % 2 == 0 for i in range(depth)],
    )


def init_looks_linear(arch: Sequence[int], seed: int,
                      activations: Optional[Sequence[str]] = None) -> Network:
    """
    Mirrored weights [[M, -M], [-M, M]] on every even dimension.

    Row k' = k + n/2 is the mirror of row k (see ``InitPlan.mirror_pairs``).
    """
    return materialize(plan_looks_linear(arch, seed, activations))


def second_layer_range(spec: ActivationSpec, sigma: float) -> float:
    """Half-range 1/(|m+ + m-| sigma) of the weights after a scaled first layer."""
    if spec.slope_sum == 0:
        raise ActivationError(f"{spec.tag}: slopes cancel (m_plus + m_minus = 0)")
    if not 0 < sigma <= 1:
        raise DomainError(f"sigma must lie in (0, 1], got {sigma!r}")
    return 1.0 / (abs(spec.slope_sum) * sigma)


def plan_thm1_scaled(arch: Sequence[int], spec: ActivationSpec, sigma: float, seed: int,
                     activations: Optional[Sequence[str]] = None,
                     looks_linear: bool = False) -> InitPlan:
    depth = len(arch) - 1
    if depth < 2:
        raise ShapeError("the scaled scheme needs at least two layers")
    acts = _activations(arch, activations, spec.tag)
    weight_ranges = [sigma, second_layer_range(spec, sigma)] + [1.0] * (depth - 2)
    bias_ranges = [sigma] + [0.0] * (depth - 1)
    mirror_rows = [looks_linear] + [False] * (depth - 1)
    mirror_cols = [False, looks_linear] + [False] * (depth - 2)
    return plan_from_arch("thm1_scaled", arch, seed, acts, weight_ranges, bias_ranges,
                          mirror_rows, mirror_cols)


def init_thm1_scaled(arch: Sequence[int], spec: ActivationSpec, sigma: float, seed: int,
                     activations: Optional[Sequence[str]] = None,
                     looks_linear: bool = False) -> Network:
    """Layer 1 ~ U[-sigma, sigma]; layer 2 weights ~ U[+-1/(|m+ + m-| sigma)], biases 0."""
    return materialize(plan_thm1_scaled(arch, spec, sigma, seed, activations, looks_linear))


def _require_homogeneous(net: Network) -> None:
    for index, layer in enumerate(net.layers, start=1):
        if not layer.spec.homogeneous:
            raise ActivationError(
                f"layer {index} uses {layer.activation!r}; lambda-rescaling is exact only "
                f"for homogeneous activations (relu, lrelu, linear)"
            )


def _check_sigmas(net: Network, sigmas: Sequence[float]) -> None:
    if len(sigmas) != net.depth:
        raise ShapeError(f"expected {net.depth} scales, got {len(sigmas)}")
    for index, sigma in enumerate(sigmas, start=1):
        if not sigma > 0:
            raise DomainError(f"sigma of layer {index} must be positive, got {sigma!r}")


def rescale_to_convenient(net: Network,
                          sigmas: Sequence[float]) -> Tuple[Network, List[float]]:
    """
    Divide layer l by sigma_l and return the compensating scales lambda_l = 1/sigma_l.

    The scales carry ``net`` onto the rescaled network: a dense ticket over
    ``net`` with scales ``lambdas`` evaluates like ``rescaled`` up to rounding.
    """
    _check_sigmas(net, sigmas)
    _require_homogeneous(net)
    layers = tuple(Layer(layer.weights / sigma, layer.bias / sigma, layer.activation)
                   for layer, sigma in zip(net.layers, sigmas))
    scales = [1.0 / float(sigma) for sigma in sigmas]
    return Network(layers, net.domain, role="source"), scales


def retarget_ticket(ticket: Ticket, realistic: Network, sigmas: Sequence[float],
                    rtol: float = 1e-12) -> Ticket:
    """
    Move a ticket found on a convenient source onto a realistically scaled one.

    ``realistic`` must equal the ticket's source scaled by sigma_l per layer;
    the returned ticket keeps the same masks and multiplies its scales by
    lambda_l = 1/sigma_l, so it evaluates identically.
    """
    rescaled, lambdas = rescale_to_convenient(realistic, sigmas)
    if rescaled.arch != ticket.source.arch:
        raise ShapeError(f"realistic source {rescaled.arch} does not match "
                         f"{ticket.source.arch}")
    for index, (mine, theirs) in enumerate(zip(ticket.source.layers, rescaled.layers), start=1):
        if not (np.allclose(mine.weights, theirs.weights, rtol=rtol, atol=0.0)
                and np.allclose(mine.bias, theirs.bias, rtol=rtol, atol=0.0)):
            raise DomainError(f"layer {index} of the realistic source is not the ticket "
                              f"source scaled by sigma={sigmas[index - 1]!r}")
    scales = tuple(old * lam for old, lam in zip(ticket.scales, lambdas))
    logger.debug("Retargeted ticket with scales %s", scales)
    return Ticket(realistic, ticket.weight_masks, ticket.bias_masks, scales,
                  ticket.output_rows, ticket.manifest)
