"""
Model files: dense networks as canonical JSON.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from ..core.errors import FormatError
from ..network.network import Domain, Layer, Network
from .canonical import FORMAT_VERSION, check_format, read_document, write_document
from .validator import ModelValidator

logger = logging.getLogger(__name__)


def domain_to_dict(domain: Domain) -> Dict[str, Any]:
    return {"low": domain.low.tolist(), "high": domain.high.tolist()}


def domain_from_dict(data: Dict[str, Any]) -> Domain:
    return Domain(np.asarray(data["low"], dtype=np.float64),
                  np.asarray(data["high"], dtype=np.float64))


def network_to_dict(net: Network) -> Dict[str, Any]:
    return {
        "format": FORMAT_VERSION,
        "layers": [
            {
                "weights": layer.weights.tolist(),
                "bias": layer.bias.tolist(),
                "activation": layer.activation,
            }
            for layer in net.layers
        ],
        "domain": domain_to_dict(net.domain),
    }


def network_from_dict(document: Dict[str, Any], role: str = "target") -> Network:
    """
    Build a network from a model-file document.

    A missing ``format`` key is accepted for hand-written files.

    Raises:
        FormatError: unknown version, bad shapes, non-finite numbers or unknown tags
    """
    check_format(document, required=False)
    result = ModelValidator(role).validate(document)
    if not result.is_valid:
        raise FormatError(f"invalid model file: {result.summary()}")
    layers = tuple(
        Layer(np.asarray(layer["weights"], dtype=np.float64),
              np.asarray(layer["bias"], dtype=np.float64),
              layer["activation"])
        for layer in document["layers"]
    )
    domain = domain_from_dict(document["domain"]) if "domain" in document else None
    return Network(layers, domain, role)


def save_model(net: Network, path: Union[str, Path]) -> None:
    write_document(network_to_dict(net), path)
    logger.info("Wrote model %s to %s", net.arch, path)


def load_model(path: Union[str, Path], role: str = "target") -> Network:
    net = network_from_dict(read_document(path), role)
    logger.debug("Loaded model %s from %s", net.arch, path)
    return net
