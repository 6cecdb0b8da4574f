"""Dimensional-splitting 2D step built from 1D line solves.

A step sweeps every row (x-direction lines) and then every column
(y-direction lines).  While a line is solved its neighbours are frozen at
their latest values: in the implicit Laplacian the transverse part couples
the new centre value to those frozen neighbours, and a missing transverse
neighbour at a wall simply drops that face.  Each sweep is a 1D problem
for :mod:`cahnfv.scheme1d` with a :class:`~cahnfv.scheme1d.TransverseContext`.

Rows and columns are numbered from 1 in :func:`sweep_row` and
:func:`sweep_col`, matching the usual cell labelling ``i, j = 1..N``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .diagnostics import free_energy
from .grid import PhaseField
from .model import ModelParams
from .nlsolve import NonConvergence, SingularJacobian, SolverControls
from .scheme1d import LineStepProblem, TransverseContext, step_line


@dataclass(frozen=True)
class Sequential:
    """Reference order: rows ``1..Ny`` then columns ``1..Nx``."""

    name = "seq"


@dataclass(frozen=True)
class OddEvenParallel:
    """All odd lines at once, then all even lines, for rows and then columns.

    Lines of one parity never neighbour each other, so each batch reads a
    frozen snapshot and writes disjoint lines; the result does not depend
    on ``workers``.
    """

    workers: int = 4
    name = "oddeven"

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


SweepSchedule = Union[Sequential, OddEvenParallel]


@dataclass
class Step2DReport:
    row_energies: list = field(default_factory=list)
    col_energies: list = field(default_factory=list)
    newton_iters: int = 0
    worst_residual: float = 0.0

    @property
    def sweep_energies(self) -> list:
        return self.row_energies + self.col_energies


def _orientation(axis: str, grid, model: ModelParams):
    if axis == "x":
        return grid.dx, grid.dy, (model.wets("left"), model.wets("right")), (model.wets("bottom"), model.wets("top"))
    if axis == "y":
        return grid.dy, grid.dx, (model.wets("bottom"), model.wets("top")), (model.wets("left"), model.wets("right"))
    raise ValueError(f"unknown axis {axis!r}")


def line_problem(values: np.ndarray, axis: str, k: int, grid, model: ModelParams, dt: float) -> LineStepProblem:
    """Line problem for row ``k`` (``axis='x'``) or column ``k`` (``axis='y'``), 0-based."""
    view = values if axis == "x" else values.T
    h, ht, ends, sides = _orientation(axis, grid, model)
    n_lines, n = view.shape
    kappa = np.zeros(n)
    nbsum = np.zeros(n)
    if k > 0:
        kappa += 1.0 / ht**2
        nbsum += view[k - 1] / ht**2
    if k < n_lines - 1:
        kappa += 1.0 / ht**2
        nbsum += view[k + 1] / ht**2
    wall = np.zeros(n)
    if k == 0 and sides[0]:
        wall += 1.0 / ht
    if k == n_lines - 1 and sides[1]:
        wall += 1.0 / ht
    return LineStepProblem(view[k].copy(), model, dt, h, ends, TransverseContext(kappa, nbsum, wall))


def _solve_line(values, axis, k, grid, model, controls, dt):
    problem = line_problem(values, axis, k, grid, model, dt)
    try:
        return step_line(problem, controls)
    except (NonConvergence, SingularJacobian) as exc:
        kind = "row" if axis == "x" else "column"
        err = NonConvergence(
            f"{kind} {k + 1}: {exc}",
            getattr(exc, "iterations", None),
            getattr(exc, "residual_norm", None),
        )
        err.location = (kind, k + 1)
        raise err from exc


def _write(values, axis, k, line):
    if axis == "x":
        values[k, :] = line
    else:
        values[:, k] = line


def _sweep(field: PhaseField, axis: str, idx: int, model, controls, dt) -> PhaseField:
    if field.grid.dim != 2:
        raise ValueError("sweeps need a 2D field")
    n_lines = field.grid.ny if axis == "x" else field.grid.nx
    if not 1 <= idx <= n_lines:
        raise IndexError(f"line index {idx} outside 1..{n_lines}")
    values = field.values.copy()
    sol = _solve_line(values, axis, idx - 1, field.grid, model, controls, dt)
    _write(values, axis, idx - 1, sol.phi_new)
    return PhaseField(field.grid, values)


def sweep_row(field: PhaseField, r: int, model: ModelParams, controls: SolverControls, dt: float) -> PhaseField:
    """Update row ``r`` (1-based, fixed ``y_r``); every other cell is left untouched."""
    return _sweep(field, "x", r, model, controls, dt)


def sweep_col(field: PhaseField, c: int, model: ModelParams, controls: SolverControls, dt: float) -> PhaseField:
    """Update column ``c`` (1-based, fixed ``x_c``); mirror image of :func:`sweep_row`."""
    return _sweep(field, "y", c, model, controls, dt)


def _batches(n_lines: int, schedule: SweepSchedule):
    if isinstance(schedule, OddEvenParallel):
        # 1-based odd lines are 0-based even indices
        return [list(range(0, n_lines, 2)), list(range(1, n_lines, 2))]
    return [[k] for k in range(n_lines)]


def step_2d(
    field: PhaseField,
    model: ModelParams,
    controls: SolverControls = SolverControls(),
    dt: float = 1e-3,
    schedule: SweepSchedule = Sequential(),
    track_energy: bool = True,
):
    """Advance a 2D field by one split step.

    Returns ``(new_field, report)``.  With ``track_energy`` the discrete
    free energy is recorded after every row and column (sequential mode) or
    after every batch (odd/even mode).

    Raises
    ------
    NonConvergence
        From the first line that fails, with ``location = (kind, index)``.
    """
    grid = field.grid
    if grid.dim != 2:
        raise ValueError("step_2d needs a 2D field")
    values = field.values.copy()
    report = Step2DReport()
    parallel = isinstance(schedule, OddEvenParallel)
    pool = ThreadPoolExecutor(max_workers=schedule.workers) if parallel and schedule.workers > 1 else None
    try:
        for axis, energies in (("x", report.row_energies), ("y", report.col_energies)):
            n_lines = grid.ny if axis == "x" else grid.nx
            for batch in _batches(n_lines, schedule):
                if pool is not None and len(batch) > 1:
                    snap = values.copy()
                    sols = list(
                        pool.map(lambda k: _solve_line(snap, axis, k, grid, model, controls, dt), batch)
                    )
                else:
                    sols = []
                    snap = values.copy() if parallel else values
                    for k in batch:
                        sols.append(_solve_line(snap, axis, k, grid, model, controls, dt))
                for k, sol in zip(batch, sols):
                    _write(values, axis, k, sol.phi_new)
                    report.newton_iters += sol.newton_iters
                    report.worst_residual = max(report.worst_residual, sol.residual_norm)
                if track_energy:
                    energies.append(free_energy(PhaseField(grid, values), model).total)
    finally:
        if pool is not None:
            pool.shutdown()
    return PhaseField(grid, values), report
