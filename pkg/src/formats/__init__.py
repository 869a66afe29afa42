"""
Model and ticket files, canonical JSON and synthetic targets.
"""

from .canonical import (
    FORMAT_VERSION,
    canonical_dumps,
    canonical_loads,
    check_format,
    document_sha256,
    read_document,
    write_document,
)
from .model_file import load_model, network_from_dict, network_to_dict, save_model
from .targets import gen_target
from .ticket_file import (
    decode_mask,
    encode_mask,
    load_ticket,
    save_ticket,
    ticket_from_dict,
    ticket_to_dict,
)
from .validator import ModelValidator

__all__ = [
    "FORMAT_VERSION",
    "ModelValidator",
    "canonical_dumps",
    "canonical_loads",
    "check_format",
    "decode_mask",
    "document_sha256",
    "encode_mask",
    "gen_target",
    "load_model",
    "load_ticket",
    "network_from_dict",
    "network_to_dict",
    "read_document",
    "save_model",
    "save_ticket",
    "ticket_from_dict",
    "ticket_to_dict",
    "write_document",
]
