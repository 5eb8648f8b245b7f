"""CSV / JSON writers shared by the library and the command line."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

FIELD_HEADER = ("re_alpha", "im_alpha", "value")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
    return path


def write_field_csv(path, field) -> Path:
    """Write a sampled field as ``re_alpha,im_alpha,value`` rows (row-major over the grid)."""
    return write_csv(path, FIELD_HEADER, field.rows())


def read_field_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, default=_default, sort_keys=True, indent=1)


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj) + "\n")
    return path


def write_shot_log(path, n_sampled: np.ndarray, clicks: np.ndarray) -> Path:
    """Audit log of a click simulation: ``shot,n_sampled,clicks_bitmask``."""
    rows = zip(range(len(n_sampled)), n_sampled.tolist(), clicks.tolist())
    return write_csv(path, ("shot", "n_sampled", "clicks_bitmask"), rows)
