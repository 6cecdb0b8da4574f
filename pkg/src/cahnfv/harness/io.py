"""Atomic writers for snapshots, step series and run summaries."""

from __future__ import annotations

import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from ..diagnostics import SERIES_COLUMNS
from ..grid import PhaseField


def atomic_write_text(path, text: str) -> Path:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _csv(header, columns) -> str:
    buf = io.StringIO()
    np.savetxt(buf, np.column_stack(columns), fmt="%.17g", delimiter=",", header=",".join(header), comments="")
    return buf.getvalue()


def snapshot_csv(field: PhaseField) -> str:
    """``x,phi`` (1D) or ``x,y,phi`` (2D, row-major: x varies fastest)."""
    g = field.grid
    if g.dim == 1:
        return _csv(("x", "phi"), (g.x, field.values))
    xx, yy = g.centers()
    return _csv(("x", "y", "phi"), (xx.ravel(), yy.ravel(), field.values.ravel()))


def series_csv(reports) -> str:
    rows = np.array([r.row() for r in reports], dtype=float).reshape(-1, len(SERIES_COLUMNS))
    return _csv(SERIES_COLUMNS, rows.T)


def write_snapshot(path, field: PhaseField) -> Path:
    return atomic_write_text(path, snapshot_csv(field))


def write_series(path, reports) -> Path:
    return atomic_write_text(path, series_csv(reports))


def write_summary(path, summary: dict) -> Path:
    return atomic_write_text(path, json.dumps(summary, indent=2, sort_keys=True) + "\n")


def read_snapshot(path):
    """Inverse of :func:`snapshot_csv`: columns as a 2D array (one row per cell)."""
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
