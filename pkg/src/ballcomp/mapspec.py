"""JSON map-spec files: ``{"n": N, "A": [[...]], "B": [...], "C": [...], "d": [re, im]}``.

Complex numbers are two-element arrays ``[re, im]`` and matrices are
row-major.  :func:`dumps` writes every real with 17 significant digits so
that a canonical file survives a parse/serialize round trip bit for bit.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import BallCompError, ParseError
from .lfm import LinearFractionalMap, make_lfm

__all__ = ["loads", "dumps", "load", "dump", "complex_to_json", "array_to_json"]


def _num(x: float) -> str:
    return format(float(x), ".17g")


def _c(z) -> str:
    z = complex(z)
    return f"[{_num(z.real)}, {_num(z.imag)}]"


def complex_to_json(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def array_to_json(a) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return complex_to_json(a)
    return [array_to_json(x) for x in a]


def dumps(phi: LinearFractionalMap) -> str:
    rows = ",\n    ".join("[" + ", ".join(_c(v) for v in row) + "]" for row in phi.A)
    return (
        "{\n"
        f'  "n": {phi.n},\n'
        f'  "A": [\n    {rows}\n  ],\n'
        f'  "B": [{", ".join(_c(v) for v in phi.B)}],\n'
        f'  "C": [{", ".join(_c(v) for v in phi.C)}],\n'
        f'  "d": {_c(phi.d)}\n'
        "}\n"
    )


def _complex(value, where):
    if isinstance(value, bool):
        raise ParseError("expected a number or [re, im]", where)
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(value[0], value[1])
    raise ParseError("expected a number or [re, im]", where)


def _vector(value, n, where):
    if not isinstance(value, list) or len(value) != n:
        raise ParseError(f"expected a list of {n} complex numbers", where)
    return np.array([_complex(v, f"{where}[{i}]") for i, v in enumerate(value)])


def loads(text: str, source: str = "<string>") -> LinearFractionalMap:
    """Parse a map spec; errors carry the line/column or the offending field."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"{source}: line {exc.lineno}, column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", source)
    missing = [k for k in ("n", "A", "B", "C", "d") if k not in doc]
    if missing:
        raise ParseError(f"missing field(s) {', '.join(missing)}", source)
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ParseError("n must be a positive integer", f"{source}: field n")
    A = doc["A"]
    if not isinstance(A, list) or len(A) != n:
        raise ParseError(f"expected {n} rows", f"{source}: field A")
    A = np.array([_vector(row, n, f"{source}: field A[{i}]") for i, row in enumerate(A)])
    B = _vector(doc["B"], n, f"{source}: field B")
    C = _vector(doc["C"], n, f"{source}: field C")
    d = _complex(doc["d"], f"{source}: field d")
    try:
        return make_lfm(A, B, C, d)
    except BallCompError as exc:
        raise ParseError(str(exc), source) from exc


def load(path) -> LinearFractionalMap:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", str(path)) from None
    return loads(text, str(path))


def dump(phi: LinearFractionalMap, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(phi))
