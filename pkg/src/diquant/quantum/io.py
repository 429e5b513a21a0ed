"""JSON encoding of scenarios, Bell functionals, correlations and assemblages.

Complex matrices are nested lists of ``[re, im]`` pairs. Every document has a
``"type"`` field naming the object and a ``"version"`` field.
"""

import json

import jsonschema
import numpy as np

from .bell import BellFunctional
from .objects import Assemblage, Correlation, MeasurementAssemblage, Scenario, TripartiteAssemblage

SCHEMA_VERSION = 1

_COMPLEX_MATRIX = {
    "type": "array",
    "items": {
        "type": "array",
        "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    },
}

_COUNTS = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2, "maxItems": 3}

SCHEMAS = {
    "scenario": {
        "type": "object",
        "required": ["type", "settings", "outcomes"],
        "properties": {"type": {"const": "scenario"}, "settings": _COUNTS, "outcomes": _COUNTS},
    },
    "bell_functional": {
        "type": "object",
        "required": ["type", "coefficients"],
        "properties": {
            "type": {"const": "bell_functional"},
            "coefficients": {"type": "array"},
            "local_bound": {"type": ["number", "null"]},
            "quantum_bound": {"type": ["number", "null"]},
            "name": {"type": "string"},
        },
    },
    "correlation": {
        "type": "object",
        "required": ["type", "table"],
        "properties": {"type": {"const": "correlation"}, "table": {"type": "array"}},
    },
    "assemblage": {
        "type": "object",
        "required": ["type", "elements"],
        "properties": {
            "type": {"const": "assemblage"},
            "elements": {
                "description": "elements[x][a] is the matrix rho_{a|x}",
                "type": "array",
                "items": {"type": "array", "items": _COMPLEX_MATRIX},
            },
        },
    },
    "measurements": {
        "type": "object",
        "required": ["type", "elements"],
        "properties": {
            "type": {"const": "measurements"},
            "elements": {"type": "array", "items": {"type": "array", "items": _COMPLEX_MATRIX}},
        },
    },
    "state": {
        "type": "object",
        "required": ["type", "matrix", "dims"],
        "properties": {
            "type": {"const": "state"},
            "matrix": _COMPLEX_MATRIX,
            "dims": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2, "maxItems": 2},
        },
    },
    "tripartite_assemblage": {
        "type": "object",
        "required": ["type", "elements"],
        "properties": {
            "type": {"const": "tripartite_assemblage"},
            "elements": {"description": "elements[x][y][a][b] is rho_{ab|xy}", "type": "array"},
        },
    },
}


def matrix_to_json(m):
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data):
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise jsonschema.ValidationError("matrix must be a square array of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def to_json(obj):
    """Serialisable dict for a supported object."""
    if isinstance(obj, Scenario):
        body = {"type": "scenario", "settings": list(obj.settings), "outcomes": list(obj.outcomes)}
    elif isinstance(obj, BellFunctional):
        body = {"type": "bell_functional", "coefficients": obj.coeffs.tolist(),
                "local_bound": obj.local_bound, "quantum_bound": obj.quantum_bound, "name": obj.name}
    elif isinstance(obj, Correlation):
        body = {"type": "correlation", "table": obj.table.tolist()}
    elif isinstance(obj, Assemblage):
        body = {"type": "assemblage", "elements": [[matrix_to_json(obj.rho[a, x]) for a in range(obj.n_outcomes)]
                                                   for x in range(obj.n_settings)]}
    elif isinstance(obj, MeasurementAssemblage):
        body = {"type": "measurements", "elements": [[matrix_to_json(obj.povms[a, x]) for a in range(obj.n_outcomes)]
                                                     for x in range(obj.n_settings)]}
    elif isinstance(obj, TripartiteAssemblage):
        n_a, n_b, n_x, n_y = obj.rho.shape[:4]
        body = {"type": "tripartite_assemblage", "elements": [
            [[[matrix_to_json(obj.rho[a, b, x, y]) for b in range(n_b)] for a in range(n_a)]
             for y in range(n_y)] for x in range(n_x)]}
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")
    body["version"] = SCHEMA_VERSION
    return body


def state_to_json(rho, dims):
    return {"type": "state", "matrix": matrix_to_json(rho), "dims": list(dims), "version": SCHEMA_VERSION}


def validate(data):
    """Check ``data`` against the schema named by its ``type`` field."""
    kind = data.get("type") if isinstance(data, dict) else None
    if kind not in SCHEMAS:
        raise jsonschema.ValidationError(f"unknown or missing document type {kind!r}")
    jsonschema.validate(data, SCHEMAS[kind])
    return kind


def from_json(data):
    """Inverse of :func:`to_json`; validates first.

    A ``state`` document decodes to ``(matrix, dims)``.
    """
    kind = validate(data)
    if kind == "scenario":
        return Scenario(tuple(data["settings"]), tuple(data["outcomes"]))
    if kind == "bell_functional":
        return BellFunctional(np.asarray(data["coefficients"], dtype=float), data.get("local_bound"),
                              data.get("quantum_bound"), data.get("name", ""))
    if kind == "correlation":
        return Correlation(np.asarray(data["table"], dtype=float))
    if kind in ("assemblage", "measurements"):
        el = data["elements"]
        mats = np.array([[matrix_from_json(m) for m in row] for row in el])  # [x, a]
        arr = mats.transpose(1, 0, 2, 3)
        return Assemblage(arr) if kind == "assemblage" else MeasurementAssemblage(arr)
    if kind == "state":
        return matrix_from_json(data["matrix"]), tuple(data["dims"])
    el = data["elements"]
    mats = np.array([[[[matrix_from_json(m) for m in rb] for rb in ra] for ra in ry] for ry in el])
    return TripartiteAssemblage(mats.transpose(2, 3, 0, 1, 4, 5))


def dump(obj, path):
    with open(path, "w") as fh:
        json.dump(to_json(obj), fh)


def load(path):
    with open(path) as fh:
        return from_json(json.load(fh))
