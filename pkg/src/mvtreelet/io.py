"""Matrix CSV and PGM heatmap files."""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import DimensionError, InputNotFoundError, MatrixParseError, NonFiniteError


def read_matrix(path) -> np.ndarray:
    """Parse a header-less comma-separated matrix, one row per line."""
    path = Path(path)
    if not path.is_file():
        raise InputNotFoundError(f"no such file: {path}")
    rows = []
    width = None
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split(",")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise MatrixParseError(
                f"{path}:{lineno}: expected {width} fields, got {len(fields)}", lineno, None)
        row = []
        for col, tok in enumerate(fields, start=1):
            try:
                v = float(tok)
            except ValueError:
                raise MatrixParseError(
                    f"{path}:{lineno}:{col}: not a number: {tok.strip()!r}", lineno, col) from None
            if not math.isfinite(v):
                raise NonFiniteError(f"{path}:{lineno}:{col}: non-finite value {tok.strip()!r}")
            row.append(v)
        rows.append(row)
    if not rows:
        raise MatrixParseError(f"{path}: empty matrix")
    return np.array(rows, dtype=np.float64)


def write_matrix(path, m) -> None:
    """Write with ``repr`` floats, which round-trip exactly."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise DimensionError(f"cannot write a matrix of shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteError("matrix contains NaN or Inf")
    lines = [",".join(repr(float(v)) for v in row) for row in m]
    Path(path).write_text("\n".join(lines) + "\n")


def heatmap_bytes(m) -> bytes:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise DimensionError(f"cannot render a matrix of shape {m.shape}")
    lo, hi = float(m.min()), float(m.max())
    if hi == lo:
        px = np.full(m.shape, 128, dtype=np.uint8)
    else:
        px = np.rint((m - lo) / (hi - lo) * 255.0).astype(np.uint8)
    header = f"P5\n{m.shape[1]} {m.shape[0]}\n255\n".encode("ascii")
    return header + px.tobytes()


def write_heatmap(path, m) -> None:
    """Binary PGM (P5), min-max scaled to 0..255; constant input is mid-gray."""
    Path(path).write_bytes(heatmap_bytes(m))
