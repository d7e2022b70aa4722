"""Deterministic CSV / JSON writers.

Every CSV starts with one ``#`` line carrying the package version and the
configuration hash; numbers are written with ``%.17g`` so that files are
byte-identical across reruns and round-trip exactly.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np

from . import __version__


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "nan" if math.isnan(v) else "%.17g" % v


def write_csv(path: str | os.PathLike, columns: list[str], rows, config_hash: str | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# frbe_fields {__version__} config_sha256={config_hash or 'none'}", ",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_csv(path: str | os.PathLike) -> tuple[list[str], list[list[str]]]:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path: str | os.PathLike, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_gnuplot(path: str | os.PathLike, csv_name: str, kind: str) -> Path:
    """Small gnuplot script for a field (``kind="field"``) or slice file."""
    path = Path(path)
    head = ["set datafile separator ','", "set datafile commentschars '#'", "set key autotitle columnhead"]
    if kind == "field":
        body = ["set xlabel 'x'", "set ylabel 't'", "set view map", "set pm3d at b",
                f"splot '{csv_name}' using 2:1:3 with pm3d notitle"]
    elif kind == "surface":
        body = ["set xlabel \"x'\"", "set ylabel \"t'\"", "set pm3d",
                f"splot '{csv_name}' using 2:1:3 with pm3d notitle"]
    else:
        body = ["set xlabel 'argument'", "set ylabel 'covariance'",
                f"plot for [s in system(\"tail -n +3 {csv_name} | cut -d, -f3 | sort -u | tr '\\n' ' '\")] "
                f"'{csv_name}' using 1:(strcol(3) eq s ? $2 : NaN) with lines title s"]
    path.write_text("\n".join(head + body) + "\n", encoding="utf-8")
    return path
