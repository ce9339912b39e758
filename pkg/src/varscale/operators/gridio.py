"""CSV input and output of grid functions."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

__all__ = ["write_grid_function", "read_grid_function"]


def write_grid_function(path, x) -> None:
    """Write ``index,value`` (real) or ``index,re,im`` (complex) rows."""
    arr = np.asarray(x)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        if np.iscomplexobj(arr):
            w.writerow(["index", "re", "im"])
            for i, v in enumerate(arr):
                w.writerow([i, format(v.real, ".16e"), format(v.imag, ".16e")])
        else:
            w.writerow(["index", "value"])
            for i, v in enumerate(arr):
                w.writerow([i, format(float(v), ".16e")])


def read_grid_function(path) -> np.ndarray:
    """Read a file written by :func:`write_grid_function`."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError("empty grid-function file")
    header, body = rows[0], rows[1:]
    idx = [int(r[0]) for r in body]
    if idx != list(range(len(body))):
        raise ValueError("indices must run 0..N-1 in order")
    if header == ["index", "value"]:
        return np.array([float(r[1]) for r in body])
    if header == ["index", "re", "im"]:
        return np.array([complex(float(r[1]), float(r[2])) for r in body])
    raise ValueError(f"unrecognised header {header!r}")
