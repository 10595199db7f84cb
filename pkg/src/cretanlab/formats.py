"""JSON and CSV readers/writers for designs, Cretan matrices and search results.

Exact matrices are written as a level table (canonical exact strings plus a
float convenience value) and a grid of level indices, so reading a file back
gives an object equal to the one written.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .cretan import CretanMatrix
from .designs import DesignParams, IncidenceMatrix
from .errors import ParseError
from .qfield import parse_quad

__all__ = [
    "design_to_json",
    "design_from_json",
    "cretan_to_json",
    "cretan_from_json",
    "bundle_to_json",
    "matrix_to_csv",
    "read_document",
    "write_json",
]


def _params_json(p: DesignParams | None):
    return None if p is None else p.as_dict()


def _params_from(d) -> DesignParams | None:
    if d is None:
        return None
    return DesignParams(int(d["v"]), int(d["k"]), int(d["lambda"]))


def design_to_json(B: IncidenceMatrix) -> dict:
    return {
        "kind": "incidence-matrix",
        "params": _params_json(B.params),
        "structure_tag": B.structure_tag,
        "source": B.source,
        "cells": B.cells.tolist(),
    }


def design_from_json(d: dict) -> IncidenceMatrix:
    return IncidenceMatrix(
        _params_from(d["params"]), np.array(d["cells"]), d.get("structure_tag", "general"), d.get("source", "")
    )


def cretan_to_json(cm: CretanMatrix) -> dict:
    return {
        "kind": "cretan-matrix",
        "order": cm.order,
        "params": _params_json(cm.params),
        "levels": [{"exact": str(x), "float": float(x)} for x in cm.levels],
        "entries": [list(row) for row in cm.index],
        "omega": {"exact": str(cm.weight), "float": float(cm.weight)},
        "det_float": cm.det_float,
        "provenance": {
            "source": cm.source,
            "branch": cm.branch,
            "classification": cm.classification,
        },
    }


def cretan_from_json(d: dict) -> CretanMatrix:
    try:
        levels = tuple(parse_quad(lv["exact"]) for lv in d["levels"])
        index = tuple(tuple(int(t) for t in row) for row in d["entries"])
        weight = parse_quad(d["omega"]["exact"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed Cretan matrix document: {exc}") from exc
    if len(index) != d.get("order", len(index)) or any(len(row) != len(index) for row in index):
        raise ParseError("entries grid is not square or does not match order")
    if any(not 0 <= t < len(levels) for row in index for t in row):
        raise ParseError("entry refers to a missing level")
    prov = d.get("provenance") or {}
    return CretanMatrix(
        len(index),
        levels,
        index,
        weight,
        params=_params_from(d.get("params")),
        source=prov.get("source"),
        branch=prov.get("branch"),
        classification=prov.get("classification"),
    )


def bundle_to_json(design: IncidenceMatrix | None, matrices: list[CretanMatrix]) -> dict:
    return {
        "kind": "cretan-bundle",
        "design": None if design is None else design_to_json(design),
        "classification": matrices[0].classification if matrices else None,
        "matrices": [cretan_to_json(m) for m in matrices],
    }


def write_json(obj: dict, path: str | Path | None) -> str:
    text = json.dumps(obj, indent=1) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def matrix_to_csv(M) -> str:
    """Rows of comma-separated values; floats use their shortest exact repr."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(M).tolist():
        writer.writerow([repr(x) if isinstance(x, float) else str(x) for x in row])
    return buf.getvalue()


def _read_csv(text: str) -> np.ndarray:
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), 1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        try:
            rows.append([float(x) for x in row])
        except ValueError as exc:
            raise ParseError(f"non-numeric CSV cell: {exc}", lineno) from exc
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ParseError("CSV matrix must be square and non-empty")
    return np.array(rows)


def _from_json_obj(d) -> list:
    if isinstance(d, list):
        return [np.array(d, dtype=float)]
    kind = d.get("kind")
    if kind == "incidence-matrix" or (kind is None and "cells" in d):
        return [design_from_json(d)]
    if kind == "cretan-matrix" or (kind is None and "levels" in d and "entries" in d):
        if all(lv.get("exact") is not None for lv in d["levels"]):
            return [cretan_from_json(d)]
        table = np.array([lv["float"] for lv in d["levels"]])
        return [table[np.array(d["entries"], dtype=np.int64)]]
    if kind == "cretan-bundle":
        return [cretan_from_json(m) for m in d["matrices"]]
    if "matrix" in d:
        return [np.array(d["matrix"], dtype=float)]
    raise ParseError(f"unrecognised document kind {kind!r}")


def read_document(path: str | Path) -> list:
    """Parse a matrix file into IncidenceMatrix, CretanMatrix or float ndarray items."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if path.suffix.lower() == ".csv":
        return [_read_csv(text)]
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from exc
    try:
        items = _from_json_obj(d)
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed document: {exc}") from exc
    for item in items:
        if isinstance(item, np.ndarray) and (item.ndim != 2 or item.shape[0] != item.shape[1]):
            raise ParseError("matrix must be square")
    return items
