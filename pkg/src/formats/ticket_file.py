"""
Ticket files.

Sources are stored by init plan and seed, never by value: loading a ticket
regenerates the source and applies the stored bit masks, which reproduces
the saved ticket's outputs bit for bit.
"""

import base64
import logging
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from ..core.errors import FormatError, ManifestError
from ..initialization.plan import InitPlan, materialize
from ..network.manifest import ConstructionManifest
from ..network.network import Network
from ..network.ticket import Ticket
from .canonical import FORMAT_VERSION, check_format, read_document, write_document
from .model_file import domain_from_dict, domain_to_dict

logger = logging.getLogger(__name__)


def encode_mask(mask: np.ndarray) -> Dict[str, Any]:
    """Bit-pack a boolean mask (row-major) into base64."""
    bits = np.packbits(np.asarray(mask, dtype=bool).ravel())
    return {"shape": list(mask.shape), "bits": base64.b64encode(bits.tobytes()).decode("ascii")}


def decode_mask(data: Dict[str, Any]) -> np.ndarray:
    shape = tuple(int(n) for n in data["shape"])
    size = int(np.prod(shape)) if shape else 1
    try:
        raw = np.frombuffer(base64.b64decode(data["bits"], validate=True), dtype=np.uint8)
    except (ValueError, TypeError) as e:
        raise FormatError(f"mask bits are not valid base64: {e}")
    if raw.size * 8 < size:
        raise FormatError(f"mask of shape {shape} needs {size} bits, got {raw.size * 8}")
    return np.unpackbits(raw, count=size).astype(bool).reshape(shape)


def ticket_to_dict(ticket: Ticket) -> Dict[str, Any]:
    """
    Ticket-file document of a constructed ticket.

    Raises:
        FormatError: the ticket has no manifest to regenerate its source from
    """
    manifest = ticket.manifest
    if manifest is None:
        raise FormatError("only constructed tickets (with a manifest) can be saved")
    plan = manifest.init_plan
    return {
        "format": FORMAT_VERSION,
        "source_seed": plan.seed,
        "source_arch": plan.arch,
        "init_plan": plan.to_dict(),
        "domain": domain_to_dict(ticket.source.domain),
        "masks": {
            "weights": [encode_mask(m) for m in ticket.weight_masks],
            "biases": [encode_mask(m) for m in ticket.bias_masks],
        },
        "scales": list(ticket.scales),
        "output_rows": list(ticket.output_rows),
        "manifest": manifest.to_dict(),
    }


def ticket_from_dict(document: Dict[str, Any]) -> Ticket:
    check_format(document)
    try:
        plan = InitPlan.from_dict(document["init_plan"])
        if int(document["source_seed"]) != plan.seed:
            raise FormatError("source_seed does not match the init plan seed")
        if [int(n) for n in document["source_arch"]] != plan.arch:
            raise FormatError(f"source_arch {document['source_arch']} does not match the "
                              f"init plan {plan.arch}")
        domain = domain_from_dict(document["domain"])
        regenerated = materialize(plan)
        source = Network(regenerated.layers, domain, role="source")
        weight_masks = tuple(decode_mask(m) for m in document["masks"]["weights"])
        bias_masks = tuple(decode_mask(m) for m in document["masks"]["biases"])
        manifest = ConstructionManifest.from_dict(document["manifest"])
        return Ticket(source, weight_masks, bias_masks,
                      tuple(float(s) for s in document["scales"]),
                      tuple(int(r) for r in document["output_rows"]), manifest)
    except (FormatError, ManifestError):
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"malformed ticket file: {e!r}")


def save_ticket(ticket: Ticket, path: Union[str, Path]) -> None:
    write_document(ticket_to_dict(ticket), path)
    logger.info("Wrote ticket over source %s to %s", ticket.source.arch, path)


def load_ticket(path: Union[str, Path]) -> Ticket:
    ticket = ticket_from_dict(read_document(path))
    logger.debug("Loaded ticket over source %s from %s", ticket.source.arch, path)
    return ticket
