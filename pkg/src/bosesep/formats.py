"""JSON interchange formats.

Complex entries are ``[re, im]`` pairs written with Python's shortest
round-trip float repr, so ``dump(load(text)) == text`` byte for byte.

Schemas: ``bose-state-v1`` (a state), ``bose-report-v1`` (a classification
report, optionally with a certificate) and ``hunt-v1`` (one search record
per JSONL line).
"""

import json
import math

import numpy as np

from .errors import ParseError, ShapeError
from .linalg import SystemShape
from .states import BASES, Certificate, StateRecord

STATE_SCHEMA = "bose-state-v1"
REPORT_SCHEMA = "bose-report-v1"
HUNT_SCHEMA = "hunt-v1"


def _pair(z) -> list:
    return [float(z.real), float(z.imag)]


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[_pair(z) for z in row] for row in m]


def encode_vector(v) -> list:
    return [_pair(z) for z in np.asarray(v, dtype=complex).ravel()]


def _number(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"{what}: expected a number, got {x!r}")
    if not math.isfinite(x):
        raise ParseError(f"{what}: non-finite value")
    return float(x)


def _decode_pairs(seq, what):
    out = []
    for i, pair in enumerate(seq):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ParseError(f"{what}[{i}]: expected a [re, im] pair")
        out.append(complex(_number(pair[0], what), _number(pair[1], what)))
    return out


def decode_matrix(rows) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise ParseError("matrix must be a non-empty list of rows")
    decoded = [_decode_pairs(row, f"matrix row {i}") if isinstance(row, list) else None
               for i, row in enumerate(rows)]
    if any(r is None for r in decoded) or len({len(r) for r in decoded}) != 1:
        raise ParseError("matrix rows must be lists of equal length")
    return np.array(decoded, dtype=complex)


def decode_vector(seq) -> np.ndarray:
    if not isinstance(seq, list):
        raise ParseError("vector must be a list of [re, im] pairs")
    return np.array(_decode_pairs(seq, "vector"), dtype=complex)


def state_to_dict(state: StateRecord) -> dict:
    return {
        "schema": STATE_SCHEMA,
        "n": state.shape.n,
        "k": state.shape.k,
        "basis": state.basis,
        "matrix": encode_matrix(state.matrix),
        "provenance": state.provenance,
    }


def _int_field(data, key):
    value = data.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"field {key!r} must be an integer")
    return value


def state_from_dict(data) -> StateRecord:
    """Parse a state object; only the schema and dimensions are checked."""
    if not isinstance(data, dict):
        raise ParseError("state must be a JSON object")
    if data.get("schema") != STATE_SCHEMA:
        raise ParseError(f"unsupported state schema {data.get('schema')!r}")
    n, k = _int_field(data, "n"), _int_field(data, "k")
    basis = data.get("basis")
    if basis not in BASES:
        raise ParseError(f"basis must be one of {BASES}")
    provenance = data.get("provenance", "")
    if not isinstance(provenance, str):
        raise ParseError("provenance must be a string")
    try:
        shape = SystemShape(n, k)
        return StateRecord(shape, basis, decode_matrix(data.get("matrix")), provenance)
    except ShapeError as exc:
        raise ParseError(str(exc)) from exc


def dumps(obj) -> str:
    return json.dumps(obj, allow_nan=False)


def dump_state(state: StateRecord) -> str:
    return dumps(state_to_dict(state)) + "\n"


def load_state(text: str) -> StateRecord:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return state_from_dict(data)


def certificate_to_dict(cert: Certificate) -> dict:
    return {
        "n": cert.shape.n,
        "k": cert.shape.k,
        "terms": [
            {"weight": float(p), "vector": encode_vector(f)}
            for p, f in zip(cert.weights, cert.vectors)
        ],
        "trace_distance": None if cert.trace_distance is None else float(cert.trace_distance),
    }


def certificate_from_dict(data) -> Certificate:
    if not isinstance(data, dict) or not isinstance(data.get("terms"), list):
        raise ParseError("certificate must be an object with a 'terms' list")
    shape = SystemShape(_int_field(data, "n"), _int_field(data, "k"))
    weights = [_number(t.get("weight"), "weight") for t in data["terms"]]
    vectors = [decode_vector(t.get("vector")) for t in data["terms"]]
    if any(v.size != shape.n for v in vectors):
        raise ParseError("certificate vector length does not match n")
    td = data.get("trace_distance")
    return Certificate(
        shape, weights, np.array(vectors).reshape(-1, shape.n),
        None if td is None else _number(td, "trace_distance"),
    )


def report_to_dict(report, certificate=None, window=None) -> dict:
    window = window if window is not None else report.window
    return {
        "schema": REPORT_SCHEMA,
        "n": report.shape.n,
        "k": report.shape.k,
        "report": report.to_dict(),
        "window": None if window is None else window.to_dict(),
        "certificate": None if certificate is None else certificate_to_dict(certificate),
    }
