"""
Sup-norm estimation, manifest audits and construction comparisons.
"""

from .sampling import domain_samples, halton_points
from .verifier import COMPARE_COLUMNS, VerificationReport, audit, compare_modes, sup_error

__all__ = [
    "COMPARE_COLUMNS",
    "VerificationReport",
    "audit",
    "compare_modes",
    "domain_samples",
    "halton_points",
    "sup_error",
]
