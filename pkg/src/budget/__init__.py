"""
Error-budget and width-requirement calculators.
"""

from .error_budget import (
    ErrorBudget,
    budget_from_norms,
    error_budget,
    interval_bounds,
    layer_norms,
    layer_peaks,
    perturb_within_budget,
    sigma_eps2,
)
from .widths import WIDTH_MODES, WidthReport, dense_param_count, rho_bound, width_bounds

__all__ = [
    "WIDTH_MODES",
    "ErrorBudget",
    "WidthReport",
    "budget_from_norms",
    "dense_param_count",
    "error_budget",
    "interval_bounds",
    "layer_norms",
    "layer_peaks",
    "perturb_within_budget",
    "rho_bound",
    "sigma_eps2",
    "width_bounds",
]
