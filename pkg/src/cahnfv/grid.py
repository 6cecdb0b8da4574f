"""Uniform cell-centred grids and phase fields in one and two dimensions.

2D values are stored row-major as ``values[j, i]``: ``j`` indexes ``y`` (rows),
``i`` indexes ``x`` (columns).  Lines are copied out and written back
explicitly, so the same line solver serves rows and columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    dim: int
    nx: int
    ny: int
    dx: float
    dy: float
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("cell counts must be positive")
        if self.dim == 1 and self.ny != 1:
            raise ValueError("1D grids have ny == 1")
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError("cell sizes must be positive")

    @classmethod
    def line(cls, length: float, n: int, origin: float = 0.0) -> "Grid":
        return cls(1, n, 1, length / n, 1.0, (origin, 0.0))

    @classmethod
    def rect(cls, lx: float, ly: float, nx: int, ny: int, origin=(0.0, 0.0)) -> "Grid":
        return cls(2, nx, ny, lx / nx, ly / ny, tuple(origin))

    @property
    def shape(self):
        return (self.nx,) if self.dim == 1 else (self.ny, self.nx)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def x(self) -> np.ndarray:
        return self.origin[0] + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def y(self) -> np.ndarray:
        return self.origin[1] + (np.arange(self.ny) + 0.5) * self.dy

    def centers(self):
        """Cell-centre coordinates broadcast to the field shape."""
        if self.dim == 1:
            return (self.x,)
        xx, yy = np.meshgrid(self.x, self.y)
        return xx, yy

    @property
    def cell_volume(self) -> float:
        return self.dx if self.dim == 1 else self.dx * self.dy


@dataclass
class PhaseField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("phase field contains non-finite values")

    @classmethod
    def sample(cls, grid: Grid, fn) -> "PhaseField":
        return cls(grid, np.asarray(fn(*grid.centers()), dtype=float))

    def copy(self) -> "PhaseField":
        return PhaseField(self.grid, self.values.copy())


def laplacian_1d(line, i: int, dx: float) -> float:
    """Three-point Laplacian at cell ``i`` (0-based) with no-flux ends.

    At the ends the missing face is dropped, which is the interior stencil
    with a mirror ghost cell.
    """
    line = np.asarray(line, dtype=float)
    n = line.size
    if not 0 <= i < n:
        raise IndexError(i)
    s = 0.0
    if i > 0:
        s += line[i - 1] - line[i]
    if i < n - 1:
        s += line[i + 1] - line[i]
    return s / dx**2


def laplacian_line(line: np.ndarray, dx: float) -> np.ndarray:
    """Vectorised :func:`laplacian_1d` over the whole line."""
    out = np.zeros_like(line, dtype=float)
    d = np.diff(line)
    out[:-1] += d
    out[1:] -= d
    return out / dx**2


def total_mass(field) -> float:
    """Unweighted sum of cell averages."""
    values = field.values if isinstance(field, PhaseField) else np.asarray(field)
    return float(np.sum(values))


def _axis_view(field: PhaseField, axis: str) -> np.ndarray:
    if field.grid.dim == 1:
        if axis != "x":
            raise ValueError("1D fields only have an x axis")
        return field.values[np.newaxis, :]
    if axis == "x":
        return field.values
    if axis == "y":
        return field.values.T
    raise ValueError(f"unknown axis {axis!r}")


def extract_line(field: PhaseField, axis: str, index: int) -> np.ndarray:
    """Copy of row ``index`` (``axis='x'``) or column ``index`` (``axis='y'``)."""
    view = _axis_view(field, axis)
    if not 0 <= index < view.shape[0]:
        raise IndexError(f"line index {index} out of range")
    return view[index].copy()


def write_line(field: PhaseField, axis: str, index: int, line) -> None:
    view = _axis_view(field, axis)
    if not 0 <= index < view.shape[0]:
        raise IndexError(f"line index {index} out of range")
    line = np.asarray(line, dtype=float)
    if line.shape != view[index].shape:
        raise ValueError("line length mismatch")
    view[index] = line
