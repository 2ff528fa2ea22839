"""JSON model and report documents with a canonical, byte-stable serialization."""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

from .errors import DimensionError, PhCenterError
from .lti_core import SystemModel, hermitian

SCHEMA_VERSION = "ph-center/1"


class DocumentError(PhCenterError, ValueError):
    """Malformed JSON or a document that does not follow the expected layout."""


def _canon(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise DocumentError(f"non-finite number {x} cannot be serialized")
        if x == 0.0:
            x = 0.0  # drop the sign of -0.0
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ",".join(json.dumps(str(k)) + ":" + _canon(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(_canon(v) for v in obj) + "]"
    raise DocumentError(f"cannot serialize object of type {type(obj).__name__}")


def canonical_dumps(obj) -> str:
    """Sorted keys, no whitespace, floats with 17 significant digits, trailing newline."""
    return _canon(obj) + "\n"


def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def encode_matrix(M) -> dict:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return {"re": M.real.tolist(), "im": M.imag.tolist()}


def encode_vector(v) -> dict:
    v = np.asarray(v, dtype=complex).ravel()
    return {"re": v.real.tolist(), "im": v.imag.tolist()}


def decode_matrix(obj, name="matrix") -> np.ndarray:
    if not isinstance(obj, dict) or "re" not in obj:
        raise DocumentError(f"{name} must be an object with 're' and 'im' arrays")
    try:
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj.get("im", np.zeros_like(re)), dtype=float)
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"{name} has non-numeric or ragged entries") from exc
    if re.ndim != 2 or im.ndim != 2:
        raise DimensionError(f"{name} must be a two-dimensional array")
    if re.shape != im.shape:
        raise DimensionError(f"{name}: re has shape {re.shape} but im has shape {im.shape}")
    return re + 1j * im


def parse_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from exc


def model_from_document(doc) -> tuple[SystemModel, dict]:
    """Build a model from a parsed document; returns ``(model, metadata)``."""
    if not isinstance(doc, dict):
        raise DocumentError("model document must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise DocumentError(f"schema_version must be {SCHEMA_VERSION!r}")
    missing = [k for k in ("n", "m", "A", "B", "C", "D") if k not in doc]
    if missing:
        raise DocumentError(f"missing fields: {', '.join(missing)}")
    n, m = doc["n"], doc["m"]
    if not (isinstance(n, int) and isinstance(m, int)) or isinstance(n, bool) or isinstance(m, bool):
        raise DocumentError("n and m must be integers")
    mats = {k: decode_matrix(doc[k], k) for k in "ABCD"}
    expected = {"A": (n, n), "B": (n, m), "C": (m, n), "D": (m, m)}
    for k, shape in expected.items():
        if mats[k].shape != shape:
            raise DimensionError(f"{k} has shape {mats[k].shape}, expected {shape} from n={n}, m={m}")
    model = SystemModel(mats["A"], mats["B"], mats["C"], mats["D"])
    return model, dict(doc.get("metadata", {}))


def model_to_document(model: SystemModel, metadata=None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "n": model.n,
        "m": model.m,
        "A": encode_matrix(model.A),
        "B": encode_matrix(model.B),
        "C": encode_matrix(model.C),
        "D": encode_matrix(model.D),
    }
    if metadata:
        doc["metadata"] = dict(metadata)
    return doc


def loads_model(text: str) -> tuple[SystemModel, dict]:
    return model_from_document(parse_json(text))


def dumps_model(model: SystemModel, metadata=None) -> str:
    return canonical_dumps(model_to_document(model, metadata))


def load_model(path) -> tuple[SystemModel, dict, str]:
    """Read a model file; returns ``(model, metadata, raw_text)``."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    model, meta = loads_model(text)
    return model, meta, text


def load_hermitian(path, n: int) -> np.ndarray:
    """Read a Hermitian matrix stored as ``{"re": ..., "im": ...}`` (optionally under key ``X``)."""
    with open(path, encoding="utf-8") as fh:
        obj = parse_json(fh.read())
    if isinstance(obj, dict) and "X" in obj:
        obj = obj["X"]
    X = decode_matrix(obj, "X")
    if X.shape != (n, n):
        raise DimensionError(f"X has shape {X.shape}, expected {(n, n)}")
    return hermitian(X, "X")


_MATRIX = {
    "type": "object",
    "required": ["re", "im"],
    "properties": {"re": {"type": "array"}, "im": {"type": "array"}},
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": [
        "schema_version",
        "command",
        "inputs_digest",
        "outputs",
        "tolerances",
        "wall_time_s",
    ],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"enum": ["check", "center", "radii", "generate", "scalar-demo"]},
        "inputs_digest": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        "outputs": {"type": "object"},
        "tolerances": {
            "type": "object",
            "additionalProperties": {"type": "number", "exclusiveMinimum": 0},
        },
        "wall_time_s": {"type": ["number", "null"]},
        "status": {"enum": ["ok", "fail"]},
    },
    "$defs": {"matrix": _MATRIX},
}
