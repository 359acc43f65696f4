"""Curve CSV, snapshot CSV and JSON-lines persistence.

Curve files hold one ``x,y`` block per component with blank lines between
blocks; the outer component is found by containment, so block order and
orientation in the file are free.  Snapshot files add ``kappa`` and ``v``
columns.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .curve import Boundary, CurveError, boundary_from_polygons

CURVE_COLUMNS = ("x", "y")
SNAPSHOT_COLUMNS = ("x", "y", "kappa", "v")


def _blocks(text: str) -> list[list[str]]:
    blocks, cur = [], []
    for line in text.splitlines():
        if line.strip():
            cur.append(line)
        elif cur:
            blocks.append(cur)
            cur = []
    if cur:
        blocks.append(cur)
    return blocks


def read_table(path) -> list[dict[str, np.ndarray]]:
    """Parse a blank-line separated CSV into one column dict per block.

    A header row is required at the top of the file; blocks after the
    first may repeat it or omit it.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CurveError(f"cannot read {path}: {exc}") from exc
    blocks = _blocks(text)
    if not blocks:
        raise CurveError(f"{path}: empty file")
    header = [h.strip() for h in next(csv.reader([blocks[0][0]]))]
    if header[:2] != list(CURVE_COLUMNS):
        raise CurveError(f"{path}: header must start with 'x,y', got {header}")
    out = []
    for k, block in enumerate(blocks):
        rows = list(csv.reader(block))
        if [h.strip() for h in rows[0]] == header:
            rows = rows[1:]
        try:
            data = np.array([[float(v) for v in r] for r in rows], dtype=float)
        except ValueError as exc:
            raise CurveError(f"{path}: block {k}: {exc}") from exc
        if data.ndim != 2 or data.shape[1] != len(header):
            raise CurveError(f"{path}: block {k} must have {len(header)} columns")
        if len(data) < 3:
            raise CurveError(f"{path}: block {k} has fewer than 3 nodes")
        if not np.all(np.isfinite(data)):
            raise CurveError(f"{path}: block {k} has non-finite values")
        out.append({name: data[:, i] for i, name in enumerate(header)})
    return out


def read_curve_csv(path) -> Boundary:
    """Boundary from a curve or snapshot CSV; holes inferred by containment."""
    blocks = read_table(path)
    return boundary_from_polygons([np.column_stack([b["x"], b["y"]]) for b in blocks])


def _write_blocks(path, header, columns_per_block) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    for k, cols in enumerate(columns_per_block):
        if k:
            buf.write("\n")
        buf.write(",".join(header) + "\n")
        for row in np.column_stack(cols):
            buf.write(",".join(repr(float(v)) for v in row) + "\n")
    path.write_text(buf.getvalue())
    return path


def write_curve_csv(path, boundary: Boundary) -> Path:
    """Write every component as an ``x,y`` block, outer first."""
    return _write_blocks(path, CURVE_COLUMNS, [(c.nodes[:, 0], c.nodes[:, 1]) for c in boundary.components])


def write_snapshot_csv(path, boundary: Boundary, kappa, v) -> Path:
    """Write ``x, y, kappa, v`` blocks, one per component."""
    ks, vs = boundary.split(np.asarray(kappa)), boundary.split(np.asarray(v))
    return _write_blocks(path, SNAPSHOT_COLUMNS,
                         [(c.nodes[:, 0], c.nodes[:, 1], k, u)
                          for c, k, u in zip(boundary.components, ks, vs)])


def read_snapshot_csv(path) -> tuple[Boundary, list[dict[str, np.ndarray]]]:
    """Boundary plus the raw per-block columns of a snapshot file."""
    blocks = read_table(path)
    return boundary_from_polygons([np.column_stack([b["x"], b["y"]]) for b in blocks]), blocks


def jsonable(obj):
    """Recursively replace numpy scalars/arrays and non-finite floats."""
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
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def dumps(obj, **kw) -> str:
    return json.dumps(jsonable(obj), allow_nan=False, **kw)


class JsonlWriter:
    """Append one JSON object per line, flushing after each write."""

    def __init__(self, path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w")

    def write(self, obj) -> None:
        self._fh.write(dumps(obj, sort_keys=True) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_jsonl(path) -> list[dict]:
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]
