"""JSON encodings of fields, complexes, chain maps and cubes."""

from __future__ import annotations

from typing import Any

from .chain import ChainComplex, ChainComplexError, ChainMap, ChainMapError
from .cube import Cube, CubeError, subset_key
from .exactalg import Field, Matrix


class SchemaError(ValueError):
    """Invalid input; ``path`` points at the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


def field_to_json(F: Field):
    return "Q" if F.p is None else {"Fp": F.p}


def field_from_json(v, path: str = "field") -> Field:
    if v == "Q":
        return Field()
    if isinstance(v, dict) and set(v) == {"Fp"} and isinstance(v["Fp"], int):
        try:
            return Field(v["Fp"])
        except ValueError as e:
            raise SchemaError(f"{path}.Fp", str(e)) from None
    raise SchemaError(path, 'expected "Q" or {"Fp": p}')


def matrix_to_json(m: Matrix) -> list[list[str]]:
    return [[m.field.format(x) for x in row] for row in m.tolist()]


def matrix_from_json(F: Field, rows, shape: tuple[int, int], path: str) -> Matrix:
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        raise SchemaError(path, "expected a list of rows")
    if shape[0] == 0 or shape[1] == 0:
        if any(len(r) for r in rows) or (rows and len(rows) != shape[0]):
            raise SchemaError(path, f"expected an empty matrix of shape {shape}")
        return Matrix.zero(F, *shape)
    if len(rows) != shape[0] or any(len(r) != shape[1] for r in rows):
        raise SchemaError(path, f"expected shape {shape[0]}x{shape[1]}")
    try:
        return Matrix.from_rows(F, [[F.parse(x) for x in r] for r in rows])
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise SchemaError(path, f"bad scalar: {e}") from None


def complex_to_json(c: ChainComplex) -> dict:
    return {
        "field": field_to_json(c.field),
        "degrees": [{"d": d, "dim": n} for d, n in c.dims.items()],
        "differentials": [{"d": d, "matrix": matrix_to_json(c.diff(d))}
                          for d in c.degrees if c.dim(d - 1) and not c.diff(d).is_zero()],
    }


def complex_from_json(v: Any, path: str = "complex") -> ChainComplex:
    if not isinstance(v, dict):
        raise SchemaError(path, "expected an object")
    F = field_from_json(v.get("field"), f"{path}.field")
    dims = {}
    for i, e in enumerate(v.get("degrees", [])):
        if not isinstance(e, dict) or not isinstance(e.get("d"), int) or not isinstance(e.get("dim"), int) \
                or e["dim"] < 0:
            raise SchemaError(f"{path}.degrees[{i}]", "expected {d: int, dim: int >= 0}")
        dims[e["d"]] = e["dim"]
    diffs = {}
    for i, e in enumerate(v.get("differentials", [])):
        if not isinstance(e, dict) or not isinstance(e.get("d"), int):
            raise SchemaError(f"{path}.differentials[{i}]", "expected {d: int, matrix: [[...]]}")
        d = e["d"]
        diffs[d] = matrix_from_json(F, e.get("matrix"), (dims.get(d - 1, 0), dims.get(d, 0)),
                                    f"{path}.differentials[{i}].matrix")
    try:
        return ChainComplex(F, dims, diffs)
    except ChainComplexError as e:
        raise SchemaError(path, str(e)) from None


def blocks_to_json(f: ChainMap) -> list[dict]:
    return [{"d": d, "matrix": matrix_to_json(m)} for d, m in sorted(f.blocks.items())]


def map_from_json(v: Any, source: ChainComplex, target: ChainComplex, path: str = "map") -> ChainMap:
    if not isinstance(v, list):
        raise SchemaError(path, "expected a list of blocks")
    blocks = {}
    for i, e in enumerate(v):
        if not isinstance(e, dict) or not isinstance(e.get("d"), int):
            raise SchemaError(f"{path}[{i}]", "expected {d: int, matrix: [[...]]}")
        d = e["d"]
        blocks[d] = matrix_from_json(source.field, e.get("matrix"), (target.dim(d), source.dim(d)),
                                     f"{path}[{i}].matrix")
    try:
        return ChainMap(source, target, blocks)
    except ChainMapError as e:
        raise SchemaError(path, str(e)) from None


def cube_to_json(c: Cube) -> dict:
    idx = [str(s) for s in c.index]
    verts = {subset_key([str(s) for s in c.labels(m)], idx): complex_to_json(c.vertices[m])
             for m in range(1 << c.dim)}
    edges = []
    for (m, i), e in sorted(c.edges.items()):
        edges.append({"from": subset_key([str(s) for s in c.labels(m)], idx),
                      "to": subset_key([str(s) for s in c.labels(m | 1 << i)], idx),
                      "map": blocks_to_json(e)})
    return {"index_set": idx, "vertices": verts, "edges": edges}


def _parse_subset(key: str, index: list[str], path: str) -> int:
    if not isinstance(key, str) or not (key.startswith("{") and key.endswith("}")):
        raise SchemaError(path, f"subset {key!r} must look like '{{a,b}}'")
    body = key[1:-1].strip()
    labels = [s.strip() for s in body.split(",")] if body else []
    m = 0
    for s in labels:
        if s not in index:
            raise SchemaError(path, f"unknown label {s!r}")
        m |= 1 << index.index(s)
    return m


def cube_from_json(v: Any, path: str = "cube") -> Cube:
    if not isinstance(v, dict):
        raise SchemaError(path, "expected an object")
    index = v.get("index_set")
    if not isinstance(index, list) or any(not isinstance(s, str) for s in index) or len(set(index)) != len(index):
        raise SchemaError(f"{path}.index_set", "expected a list of distinct strings")
    n = len(index)
    raw = v.get("vertices")
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}.vertices", "expected an object keyed by subsets")
    verts: list = [None] * (1 << n)
    for key, cv in raw.items():
        m = _parse_subset(key, index, f"{path}.vertices")
        verts[m] = complex_from_json(cv, f"{path}.vertices[{key}]")
    for m, vx in enumerate(verts):
        if vx is None:
            raise SchemaError(f"{path}.vertices", f"missing vertex {subset_key([index[i] for i in range(n) if m >> i & 1], index)}")
    edges = {}
    for k, e in enumerate(v.get("edges", [])):
        ep = f"{path}.edges[{k}]"
        if not isinstance(e, dict):
            raise SchemaError(ep, "expected an object")
        a = _parse_subset(e.get("from"), index, f"{ep}.from")
        b = _parse_subset(e.get("to"), index, f"{ep}.to")
        diff = b & ~a
        if a & ~b or diff == 0 or diff & (diff - 1):
            raise SchemaError(ep, "edge must add exactly one label")
        i = diff.bit_length() - 1
        edges[(a, i)] = map_from_json(e.get("map"), verts[a], verts[b], f"{ep}.map")
    try:
        return Cube(index, verts, edges)
    except CubeError as e:
        raise SchemaError(path, str(e)) from None
