"""
Canonical JSON encoding.

Keys are sorted, floats are written with 17 significant digits and every
document ends in a newline, so equal content always yields equal bytes.
"""

import hashlib
import json
import math
from pathlib import Path
from typing import Any, Union

import numpy as np

from ..core.errors import FormatError

FORMAT_VERSION = "ticketforge/1"


def _encode(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if not math.isfinite(number):
            raise FormatError(f"non-finite number {number!r} cannot be written")
        return "%.17g" % number
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, np.ndarray):
        return _encode(value.tolist())
    if isinstance(value, dict):
        items = sorted((str(k), v) for k, v in value.items())
        return "{" + ",".join(f"{json.dumps(k)}:{_encode(v)}" for k, v in items) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_encode(v) for v in value) + "]"
    raise FormatError(f"cannot encode value of type {type(value).__name__}")


def canonical_dumps(document: Any) -> str:
    """Serialize ``document`` to canonical JSON text."""
    return _encode(document) + "\n"


def _reject_constant(name: str) -> Any:
    raise FormatError(f"non-finite number {name} in JSON document")


def canonical_loads(text: str) -> Any:
    """Parse JSON text, rejecting NaN and infinities."""
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise FormatError(f"malformed JSON: {e}")


def document_sha256(document: Any) -> str:
    return hashlib.sha256(canonical_dumps(document).encode("utf-8")).hexdigest()


def write_document(document: Any, path: Union[str, Path]) -> None:
    """Write ``document`` as canonical JSON, creating parent directories."""
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(canonical_dumps(document), encoding="utf-8")
    except OSError as e:
        raise FormatError(f"cannot write {target}: {e}")


def read_document(path: Union[str, Path]) -> Any:
    source = Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FormatError(f"file not found: {source}")
    except OSError as e:
        raise FormatError(f"cannot read {source}: {e}")
    return canonical_loads(text)


def check_format(document: Any, required: bool = True) -> None:
    """
    Check the ``format`` key of a top-level document.

    Raises:
        FormatError: not an object, unknown version, or missing key when required
    """
    if not isinstance(document, dict):
        raise FormatError("document must be a JSON object")
    version = document.get("format")
    if version is None:
        if required:
            raise FormatError(f"missing format key, expected {FORMAT_VERSION!r}")
        return
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format {version!r}, expected {FORMAT_VERSION!r}")
