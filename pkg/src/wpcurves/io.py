"""JSON/CSV encodings for grid functions, Beltrami fields and reports."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .grid import GridFunction, make_grid

SCHEMA_VERSION = "wpcurves.v1"


def complex_pairs(values) -> list[list[float]]:
    arr = np.asarray(values, dtype=complex).ravel()
    return [[float(v.real), float(v.imag)] for v in arr]


def from_pairs(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def gridfunction_to_dict(f: GridFunction) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "domain": f.domain,
        "n": f.n,
        "offset": f.grid.offset,
        "values": complex_pairs(f.values),
    }


def gridfunction_from_dict(data: dict) -> GridFunction:
    try:
        domain = data["domain"]
        n = int(data["n"])
        values = from_pairs(data["values"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed grid function: {exc}") from exc
    if not data.get("offset", True):
        raise ValueError("only half-offset grids are supported")
    return GridFunction(make_grid(n), values, domain)


def gridfunction_to_csv(f: GridFunction) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["node", "re", "im"])
    for j, v in enumerate(f.values):
        writer.writerow([j, repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()


def gridfunction_from_csv(text: str, domain: str = "circle") -> GridFunction:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or set(rows[0]) != {"node", "re", "im"}:
        raise ValueError("CSV must have columns node,re,im")
    rows.sort(key=lambda r: int(r["node"]))
    if [int(r["node"]) for r in rows] != list(range(len(rows))):
        raise ValueError("CSV node column must enumerate 0..n-1")
    values = np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])
    return GridFunction(make_grid(len(values)), values, domain)


def load_gridfunction(path, domain: str = "circle") -> GridFunction:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".csv":
        return gridfunction_from_csv(text, domain)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    return gridfunction_from_dict(data)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def dumps(payload) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
