"""Bit-stable CSV/JSON emission.

CSV: comma separated, LF line endings, UTF-8, mandatory header, floats
written with 17 significant digits so they re-parse to the same double.
JSON: sorted keys, two-space indent, trailing newline.  Non-finite floats
are written as the strings "nan", "inf", "-inf" in both formats.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

FLOAT_FMT = ".17g"


def format_value(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, FLOAT_FMT)
    return str(x)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.write_bytes(csv_text(header, rows).encode("utf-8"))
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    return rows[0], rows[1:]


def parse_float(text: str) -> float:
    return float(text)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return format_value(x)
        return x
    if isinstance(x, complex):
        raise TypeError("split complex values into _re/_im fields before emitting")
    return x


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_bytes(json_text(obj).encode("utf-8"))
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def trajectory_rows(traj, T: float):
    """Rows ``s, re_0, im_0, ..., frame, T`` for a trajectory."""
    d = traj.states.shape[1]
    header = ["s"]
    for j in range(d):
        header += [f"re_{j}", f"im_{j}"]
    header += ["frame", "T"]
    rows = []
    for s, psi in zip(traj.grid, traj.states):
        row = [float(s)]
        for z in psi:
            row += [float(z.real), float(z.imag)]
        row += [traj.frame_tag, float(T)]
        rows.append(row)
    return header, rows


def read_trajectory_csv(path) -> tuple[np.ndarray, np.ndarray, list[str], np.ndarray]:
    header, rows = read_csv(path)
    d = (len(header) - 3) // 2
    s = np.array([float(r[0]) for r in rows])
    states = np.array([[complex(float(r[1 + 2 * j]), float(r[2 + 2 * j])) for j in range(d)] for r in rows])
    frames = [r[-2] for r in rows]
    ts = np.array([float(r[-1]) for r in rows])
    return s, states, frames, ts
