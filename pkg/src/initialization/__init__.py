"""
Source-network initialization schemes and rescaling.
"""

from .initializers import (
    init_convenient,
    init_looks_linear,
    init_thm1_scaled,
    plan_convenient,
    plan_looks_linear,
    plan_thm1_scaled,
    rescale_to_convenient,
    retarget_ticket,
    second_layer_range,
)
from .plan import InitPlan, LayerInit, materialize, materialize_layer

__all__ = [
    "InitPlan",
    "LayerInit",
    "init_convenient",
    "init_looks_linear",
    "init_thm1_scaled",
    "materialize",
    "materialize_layer",
    "plan_convenient",
    "plan_looks_linear",
    "plan_thm1_scaled",
    "rescale_to_convenient",
    "retarget_ticket",
    "second_layer_range",
]
