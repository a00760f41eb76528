"""JSON encoding shared by instances, witnesses and reports.

Complex numbers are ``[re, im]`` pairs, matrices are row-major lists of
rows, algebra elements are lists of blocks, module elements are lists of
algebra elements.
"""

from __future__ import annotations

import hashlib
import json

import jsonschema
import numpy as np

from .errors import CStarLocError

COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
MATRIX = {"type": "array", "items": {"type": "array", "items": COMPLEX}}
ELEMENT = {"type": "array", "items": MATRIX, "minItems": 1}
MODULE_ELEMENT = {"type": "array", "items": ELEMENT, "minItems": 1}
SUBSPACE = {
    "type": "object",
    "required": ["kind", "generators"],
    "properties": {
        "kind": {"enum": ["submodule", "linear"]},
        "generators": {"type": "array", "items": MODULE_ELEMENT, "minItems": 1},
    },
}
DECOMPOSITION = {
    "type": "object",
    "required": ["weights", "densities"],
    "properties": {
        "weights": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "densities": {"type": "array", "items": ELEMENT, "minItems": 1},
    },
}
SIGMA = {
    "type": "object",
    "required": ["rule", "N"],
    "properties": {
        "rule": {
            "type": "object",
            "required": ["rule"],
            "properties": {"rule": {"enum": ["geometric", "finite"]}},
        },
        "N": {"type": "integer", "minimum": 1},
    },
}

INSTANCE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "cstarloc instance",
    "type": "object",
    "required": ["schema", "seed", "profile", "block_dims", "rank", "L", "decomposition", "x0"],
    "properties": {
        "schema": {"const": "cstarloc.instance/1"},
        "seed": {"type": "integer", "minimum": 0},
        "profile": {"type": "string"},
        "block_dims": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "rank": {"type": "integer", "minimum": 1},
        "L": SUBSPACE,
        "H": SUBSPACE,
        "K": SUBSPACE,
        "decomposition": DECOMPOSITION,
        "sigma": SIGMA,
        "x0": MODULE_ELEMENT,
        "probe_states": {"type": "array", "items": ELEMENT},
    },
}

WITNESS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "cstarloc separation witness",
    "type": "object",
    "required": ["schema", "kind", "distance", "density", "seed"],
    "properties": {
        "schema": {"const": "cstarloc.witness/1"},
        "kind": {"enum": ["faithful", "vector", "pure", "convex-of-vector", "hahn-banach"]},
        "distance": {"type": "number", "minimum": 0},
        "density": ELEMENT,
        "seed": {"type": ["integer", "null"]},
    },
}


class InputError(CStarLocError):
    """An instance or witness file failed to parse or validate."""


def encode_matrix(mat):
    mat = np.asarray(mat, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in mat]


def decode_matrix(obj):
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise InputError("matrix must be a list of rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def encode_blocks(blocks):
    return [encode_matrix(b) for b in blocks]


def decode_blocks(obj):
    return [decode_matrix(b) for b in obj]


def encode_element(a):
    return encode_blocks(a.blocks)


def encode_module_element(x):
    return [encode_element(c) for c in x.components]


def decode_element(A, obj):
    return A.element(decode_blocks(obj))


def decode_module_element(E, obj):
    return E.element(decode_element(E.algebra, c) for c in obj)


def encode_vector(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


_VALIDATORS = {}


def validate(obj, schema):
    key = id(schema)
    if key not in _VALIDATORS:
        _VALIDATORS[key] = jsonschema.Draft202012Validator(schema)
    validator = _VALIDATORS[key]
    if not validator.is_valid(obj):
        exc = jsonschema.exceptions.best_match(validator.iter_errors(obj))
        raise InputError(f"{schema.get('title', 'document')}: {exc.message}")
    return obj


def dumps(obj):
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=1, separators=(",", ": ")) + "\n"


def digest(obj):
    raw = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(raw).hexdigest()[:16]


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
