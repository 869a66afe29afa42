"""
Validation of model files.

Implements the IValidator interface in three passes:
- Structure: layer list, matrix shapes, layer composition, domain vectors
- Values: finiteness, the [-1, 1] bound of targets, domain ordering
- References: activation tags and the format version
"""

import math
from typing import Any, Dict, List, Optional

from ..core.interfaces import IValidator, ValidationResult
from ..network.activation import is_registered
from .canonical import FORMAT_VERSION


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _matrix_shape(value: Any) -> Optional[List[int]]:
    """[rows, cols] of a rectangular list of lists, None otherwise."""
    if not isinstance(value, list) or not value:
        return None
    if not all(isinstance(row, list) for row in value):
        return None
    cols = len(value[0])
    if cols == 0 or any(len(row) != cols for row in value):
        return None
    return [len(value), cols]


class ModelValidator(IValidator):
    """
    Validator for model-file documents.

    Targets must keep every parameter in [-1, 1]; sources are only checked
    for finiteness.
    """

    def __init__(self, role: str = "target"):
        self.role = role

    def validate_structure(self, document: Dict[str, Any]) -> ValidationResult:
        result = ValidationResult(is_valid=True, errors=[], warnings=[])
        if not isinstance(document, dict):
            result.add_error("document", "Model file must be a JSON object",
                             type(document).__name__)
            return result
        layers = document.get("layers")
        if not isinstance(layers, list) or not layers:
            result.add_error("layers", "Model needs a non-empty list of layers", layers)
            return result

        previous_out: Optional[int] = None
        for index, layer in enumerate(layers, start=1):
            if not isinstance(layer, dict):
                result.add_error("layers", "Layer entry must be an object", layer, layer=index)
                continue
            missing = [key for key in ("weights", "bias", "activation") if key not in layer]
            if missing:
                result.add_error("layers", f"Layer is missing {', '.join(missing)}", None,
                                 layer=index)
                continue
            shape = _matrix_shape(layer["weights"])
            if shape is None:
                result.add_error("weights", "Weights must be a non-empty rectangular matrix",
                                 None, layer=index)
                continue
            bias = layer["bias"]
            if not isinstance(bias, list) or len(bias) != shape[0]:
                result.add_error("bias", f"Bias must be a list of {shape[0]} numbers",
                                 len(bias) if isinstance(bias, list) else bias, layer=index)
            if previous_out is not None and shape[1] != previous_out:
                result.add_error(
                    "weights",
                    f"Layer expects {shape[1]} inputs but the previous layer produces "
                    f"{previous_out}",
                    shape, layer=index,
                )
            previous_out = shape[0]

        domain = document.get("domain")
        if domain is not None:
            first = _matrix_shape(layers[0].get("weights")) if isinstance(layers[0], dict) else None
            n_in = first[1] if first else None
            if not isinstance(domain, dict):
                result.add_error("domain", "Domain must be an object with low and high", domain)
            else:
                for key in ("low", "high"):
                    bound = domain.get(key)
                    if not isinstance(bound, list):
                        result.add_error(f"domain.{key}", "Domain bound must be a list", bound)
                    elif n_in is not None and len(bound) != n_in:
                        result.add_error(f"domain.{key}",
                                         f"Domain bound needs {n_in} entries", len(bound))
        return result

    def validate_values(self, document: Dict[str, Any]) -> ValidationResult:
        result = ValidationResult(is_valid=True, errors=[], warnings=[])
        for index, layer in enumerate(document["layers"], start=1):
            entries = [("weights", v) for row in layer["weights"] for v in row]
            entries += [("bias", v) for v in layer["bias"]]
            bad = [(name, v) for name, v in entries
                   if not _is_number(v) or not math.isfinite(float(v))]
            if bad:
                name, value = bad[0]
                result.add_error(name, f"{len(bad)} non-finite or non-numeric parameter(s)",
                                 value, layer=index)
                continue
            if self.role == "target":
                over = [v for _, v in entries if abs(float(v)) > 1.0]
                if over:
                    result.add_error("weights",
                                     f"{len(over)} target parameter(s) outside [-1, 1]",
                                     max(over, key=abs), layer=index)

        domain = document.get("domain")
        if isinstance(domain, dict):
            low, high = domain.get("low", []), domain.get("high", [])
            values = list(low) + list(high)
            if not all(_is_number(v) and math.isfinite(float(v)) for v in values):
                result.add_error("domain", "Domain bounds must be finite numbers", domain)
            elif any(lo > hi for lo, hi in zip(low, high)):
                result.add_error("domain", "Domain lower bounds must not exceed upper bounds",
                                 domain)
        return result

    def validate_references(self, document: Dict[str, Any]) -> ValidationResult:
        result = ValidationResult(is_valid=True, errors=[], warnings=[])
        version = document.get("format")
        if version is not None and version != FORMAT_VERSION:
            result.add_error("format", f"Unsupported format, expected {FORMAT_VERSION}", version)
        for index, layer in enumerate(document["layers"], start=1):
            tag = layer["activation"]
            if not isinstance(tag, str) or not is_registered(tag):
                result.add_error("activation", f"Unknown activation tag: {tag!r}", tag,
                                 layer=index)
        return result

    def validate(self, document: Dict[str, Any]) -> ValidationResult:
        """Run all passes; value and reference checks need a sound structure."""
        result = self.validate_structure(document)
        if not result.is_valid:
            return result
        result.merge(self.validate_values(document))
        result.merge(self.validate_references(document))
        return result
