"""File ingestion and deterministic emission (JSON, CSV, atomic writes)."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from .dimension import CoverFamily, CoverLevel
from .errors import InputError
from .metric_core import FiniteMetricSpace, WeightedGraph
from .quasimetric import QuasimetricSpace, validate_quasimetric
from .round_tree import Cell, RoundTreeComplex
from .tree_boundary import RootedTree


def _number(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InputError(f"{where}: expected a number, got {text!r}") from None
    return int(value) if value.is_integer() and "." not in text and "e" not in text.lower() else value


def read_edge_list(path) -> WeightedGraph:
    """Lines "u v [length]"; blank lines and # comments are skipped."""
    edges, seen = [], {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise InputError(f"{path}:{lineno}: expected 'u v [length]', got {line!r}")
            length = _number(parts[2], f"{path}:{lineno}:3") if len(parts) == 3 else 1
            edges.append((parts[0], parts[1], length))
            seen.setdefault(parts[0], None)
            seen.setdefault(parts[1], None)
    if not edges:
        raise InputError(f"{path}: no edges")
    return WeightedGraph(tuple(seen), tuple(edges))


def read_graph_json(path) -> WeightedGraph:
    data = _load_json(path)
    try:
        verts = [str(v) for v in data["vertices"]]
        edges = []
        for i, e in enumerate(data["edges"]):
            if len(e) not in (2, 3):
                raise InputError(f"{path}: edge {i} must be [u, v] or [u, v, length]")
            edges.append((str(e[0]), str(e[1]), e[2] if len(e) == 3 else 1))
    except (KeyError, TypeError) as exc:
        raise InputError(f"{path}: graph JSON needs 'vertices' and 'edges' ({exc})") from None
    return WeightedGraph(tuple(verts), tuple(edges))


def read_graph(path) -> WeightedGraph:
    return read_graph_json(path) if str(path).endswith(".json") else read_edge_list(path)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def read_matrix_csv(path) -> tuple[list[str], np.ndarray]:
    """Square matrix with a header row of ids; an optional leading id column is allowed."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if not rows:
        raise InputError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    if header and header[0] == "":
        header = header[1:]
    n = len(header)
    M = np.zeros((n, n))
    if len(rows) - 1 != n:
        raise InputError(f"{path}: expected {n} data rows, found {len(rows) - 1}")
    for i, row in enumerate(rows[1:]):
        cells = [c.strip() for c in row]
        if len(cells) == n + 1:
            if cells[0] != header[i]:
                raise InputError(f"{path}:{i + 2}:1: row id {cells[0]!r} does not match column {header[i]!r}")
            cells = cells[1:]
        if len(cells) != n:
            raise InputError(f"{path}:{i + 2}: expected {n} entries, found {len(cells)}")
        for j, c in enumerate(cells):
            M[i, j] = float(_number(c, f"{path}:{i + 2}:{j + 1}"))
    return header, M


def read_metric_csv(path) -> FiniteMetricSpace:
    ids, M = read_matrix_csv(path)
    return FiniteMetricSpace(ids, M)


def read_quasimetric_csv(path) -> QuasimetricSpace:
    ids, M = read_matrix_csv(path)
    return validate_quasimetric(ids, M)


def read_pairing_csv(path) -> dict:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    out = {}
    for lineno, r in enumerate(rows, 1):
        if len(r) != 2:
            raise InputError(f"{path}:{lineno}: expected 'domain_id,codomain_id'")
        a, b = r[0].strip(), r[1].strip()
        if lineno == 1 and (a, b) == ("domain", "codomain"):
            continue
        if a in out:
            raise InputError(f"{path}:{lineno}: {a!r} paired twice")
        out[a] = b
    return out


def _address(text: str) -> tuple:
    return tuple(int(x) for x in text.split(".")) if text else ()


def tree_from_spec(data: dict) -> RootedTree:
    """{"root_degree", "branching", "depth"} or {"depth", "default", "children": {address: count}}.

    Addresses in the children map are dot-separated child indices, "" for the root.
    """
    try:
        depth = int(data["depth"])
        if "children" in data:
            children = {_address(k): int(v) for k, v in data["children"].items()}
            default = int(data.get("default", data.get("branching", 1)))
            root = children.pop((), int(data.get("root_degree", default)))
            return RootedTree(root, default, depth, children)
        return RootedTree(int(data["root_degree"]), int(data["branching"]), depth)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad tree spec: {exc}") from None


def read_tree_spec(path) -> RootedTree:
    return tree_from_spec(_load_json(path))


def read_cover(path) -> CoverFamily:
    """CSV rows (epsilon, count, common_diameter) or JSON {"levels": [{"scale", "diameters"}]}."""
    if str(path).endswith(".json"):
        data = _load_json(path)
        try:
            levels = [CoverLevel(float(lv["scale"]), diameters=tuple(float(d) for d in lv["diameters"])) for lv in data["levels"]]
        except (KeyError, TypeError) as exc:
            raise InputError(f"{path}: bad cover JSON ({exc})") from None
        return CoverFamily(tuple(levels))
    levels = []
    with open(path, newline="") as fh:
        for lineno, r in enumerate(csv.reader(fh), 1):
            if not r or not any(c.strip() for c in r):
                continue
            if lineno == 1 and r[0].strip() == "epsilon":
                continue
            if len(r) != 3:
                raise InputError(f"{path}:{lineno}: expected epsilon,count,common_diameter")
            e, n, d = (_number(c.strip(), f"{path}:{lineno}:{j + 1}") for j, c in enumerate(r))
            levels.append(CoverLevel(float(e), int(n), float(d)))
    return CoverFamily(tuple(levels))


def read_complex_json(path) -> RoundTreeComplex:
    data = _load_json(path)
    cells = data["cells"] if isinstance(data, dict) else data
    out = []
    for i, c in enumerate(cells):
        try:
            out.append(
                Cell(
                    str(c["id"]),
                    int(c["step"]),
                    tuple(int(s) for s in c["page_address"]),
                    tuple(str(n) for n in c["neighbors"]),
                    bool(c.get("base", False)),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}: cell {i} is malformed ({exc})") from None
    return RoundTreeComplex(tuple(out))


def complex_to_json(c: RoundTreeComplex) -> dict:
    return {
        "cells": [
            {"id": x.id, "step": x.step, "page_address": list(x.page_address), "neighbors": list(x.neighbors), "base": x.base}
            for x in c.cells
        ]
    }


def jsonable(obj):
    """Convert results to plain JSON types; non-finite floats become strings."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_atomic(path, text: str) -> None:
    """Write to a temporary file beside ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def metric_to_csv(ids, D) -> str:
    return rows_to_csv(list(map(str, ids)), [[repr(float(x)) for x in row] for row in np.asarray(D)])
