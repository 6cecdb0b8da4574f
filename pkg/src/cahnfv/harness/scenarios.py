"""Preset scenarios, initial data and the deterministic random source."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..grid import Grid, PhaseField
from ..model import (
    ConstantMobility,
    DegenerateMobility,
    DoubleWell,
    Logarithmic,
    ModelParams,
    WettingParams,
)
from ..scheme2d import OddEvenParallel, Sequential


class UnknownScenario(KeyError):
    pass


INITIAL_KINDS = ("cosine-bump", "random", "ramp", "droplet", "two-droplets")
SWEEP_KEYS = ("cells", "beta", "mobility")


@dataclass(frozen=True)
class Scenario:
    """One simulation, or a family of them when ``sweep_key`` is set.

    ``domain`` is ``(x0, x1)`` in 1D and ``(x0, x1, y0, y1)`` in 2D;
    ``cells`` is ``(n,)`` or ``(nx, ny)``.  ``sweep_key`` names one of
    ``cells``, ``beta`` or ``mobility`` and ``sweep_values`` lists the
    values run one after another.
    """

    name: str
    dim: int
    domain: tuple
    cells: tuple
    model: ModelParams
    dt: float
    t_end: float
    initial: str
    init_params: tuple = ()
    snapshot_times: tuple = ()
    seed: int = 0
    schedule: object = Sequential()
    strict: bool = False
    sweep_key: Optional[str] = None
    sweep_values: tuple = ()

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if len(self.domain) != 2 * self.dim:
            raise ValueError(f"domain needs {2 * self.dim} numbers for dim={self.dim}")
        for a, b in zip(self.domain[::2], self.domain[1::2]):
            if not b > a:
                raise ValueError("domain extents must be increasing")
        if len(self.cells) != self.dim or any(int(n) < 2 for n in self.cells):
            raise ValueError(f"cells needs {self.dim} counts >= 2")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if 0 < self.t_end < self.dt:
            raise ValueError("t_end must be >= dt")
        if any(not 0 <= t <= self.t_end for t in self.snapshot_times):
            raise ValueError("snapshot times must lie in [0, t_end]")
        if self.initial not in INITIAL_KINDS:
            raise ValueError(f"unknown initial condition {self.initial!r}")
        if self.initial == "ramp" and self.dim != 1:
            raise ValueError("the ramp initial condition is one-dimensional")
        if self.initial in ("droplet", "two-droplets") and self.dim != 2:
            raise ValueError("droplet initial conditions are two-dimensional")
        if self.sweep_key is not None:
            if self.sweep_key not in SWEEP_KEYS:
                raise ValueError(f"cannot sweep over {self.sweep_key!r}")
            if not self.sweep_values:
                raise ValueError("a sweep needs at least one value")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def grid(self) -> Grid:
        if self.dim == 1:
            x0, x1 = self.domain
            return Grid.line(x1 - x0, int(self.cells[0]), x0)
        x0, x1, y0, y1 = self.domain
        return Grid.rect(x1 - x0, y1 - y0, int(self.cells[0]), int(self.cells[1]), (x0, y0))

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_end / self.dt - 1e-9)) if self.t_end > 0 else 0


def mobility_from_name(name: str, m0: float = 1.0):
    if name == "constant":
        return ConstantMobility(m0)
    if name == "degenerate":
        return DegenerateMobility(m0)
    raise ValueError(f"unknown mobility {name!r}")


def mobility_name(m) -> str:
    return "degenerate" if m.degenerate else "constant"


def expand(sc: Scenario) -> list:
    """``[(label, scenario)]`` with the sweep resolved into single runs."""
    if sc.sweep_key is None:
        return [("run", sc)]
    out = []
    for v in sc.sweep_values:
        if sc.sweep_key == "cells":
            cells = (int(v),) * sc.dim
            out.append((f"cells-{int(v)}", replace(sc, cells=cells, sweep_key=None, sweep_values=())))
        elif sc.sweep_key == "beta":
            model = replace(sc.model, wetting=replace(sc.model.wetting, beta=float(v)))
            out.append((f"beta-{float(v):.6f}", replace(sc, model=model, sweep_key=None, sweep_values=())))
        else:
            model = replace(sc.model, mobility=mobility_from_name(v, sc.model.mobility.m0))
            out.append((f"mobility-{v}", replace(sc, model=model, sweep_key=None, sweep_values=())))
    return out


# --------------------------------------------------------------------------
# initial data
# --------------------------------------------------------------------------


def uniform_draws(seed: int, n: int) -> np.ndarray:
    """``n`` uniforms on ``[0, 1)`` from a counter-based stream keyed by ``seed``.

    Draw ``k`` depends only on ``(seed, k)``: asking for more cells only
    appends values.
    """
    return np.random.Generator(np.random.Philox(key=seed)).random(n)


def cosine_bump(x, eps):
    s = np.asarray(x, dtype=float) - 0.5
    return np.where(np.abs(s) <= math.pi * eps / 2.0, np.cos(s / eps) - 1.0, -1.0)


def ramp(x):
    x = np.asarray(x, dtype=float)
    out = np.full_like(x, -1.0)
    out = np.where(np.abs(x - 41.0 / 50.0) <= 1.0 / 20.0, -20.0 * np.abs(x - 41.0 / 50.0), out)
    out = np.where(np.abs(x - 1.0 / 3.0) <= 1.0 / 20.0, 20.0 * (1.0 / 3.0 - x), out)
    out = np.where((x >= 0.0) & (x <= 1.0 / 3.0 - 1.0 / 20.0), 1.0, out)
    return out


def droplets(x, y, centres, radius, level=0.97):
    inside = np.zeros(np.shape(x), dtype=bool)
    for cx in centres:
        inside |= (x - cx) ** 2 + y**2 < radius**2
    return np.where(inside, level, -level)


def build_initial(sc: Scenario) -> PhaseField:
    """Cell-centre samples of the scenario's initial condition."""
    if sc.initial not in INITIAL_KINDS:
        raise UnknownScenario(sc.initial)
    grid = sc.grid()
    centres = grid.centers()
    p = dict(sc.init_params)
    if sc.initial == "cosine-bump":
        values = cosine_bump(centres[0], sc.model.epsilon)
    elif sc.initial == "random":
        r = uniform_draws(sc.seed, grid.n_cells).reshape(grid.shape)
        values = p.get("mean", 0.0) + p.get("amplitude", 0.5) * (2.0 * r - 1.0)
    elif sc.initial == "ramp":
        values = ramp(centres[0])
    elif sc.initial == "droplet":
        values = droplets(*centres, (0.0,), 0.25)
    else:
        values = droplets(*centres, (-0.35, 0.35), 0.3)
    return PhaseField(grid, values)


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------

DEEP_QUENCH = Logarithmic(theta=0.0, theta_c=1.0)
LOG_03 = Logarithmic(theta=0.3, theta_c=1.0)
BOTTOM_WALL = ("bottom",)


def _convergence(dim: int) -> Scenario:
    model = ModelParams(DEEP_QUENCH, DegenerateMobility(), 0.1)
    if dim == 1:
        return Scenario("convergence-1d", 1, (0.0, 1.0), (200,), model, 1e-4, 0.1, "cosine-bump",
                        sweep_key="cells", sweep_values=(25, 50, 100, 200))
    return Scenario("convergence-2d", 2, (0.0, 1.0, 0.0, 1.0), (80, 80), model, 1e-4, 0.1, "cosine-bump",
                    sweep_key="cells", sweep_values=(10, 20, 40, 80))


def _separation(potential, name) -> Scenario:
    model = ModelParams(potential, DegenerateMobility(), 1.0)
    return Scenario(name, 1, (-40.0, 40.0), (200,), model, 0.01, 30.0, "random",
                    init_params=(("mean", 0.0), ("amplitude", 0.5)))


def _coarsening(mobility, name, desk) -> Scenario:
    n = 64 if desk else 256
    model = ModelParams(DoubleWell(), mobility, 0.18)
    return Scenario(name, 2, (-0.5, 0.5, -0.5, 0.5), (n, n), model, 0.0016, 1.0, "random",
                    init_params=(("mean", -0.4), ("amplitude", 0.25)))


DROPLET_BETAS = tuple(k * math.pi / 12.0 for k in (4, 5, 6, 7, 8))


def _droplet_angle(desk) -> Scenario:
    n, eps = (128, 0.01) if desk else (256, 0.005)
    model = ModelParams(DoubleWell(), DegenerateMobility(), eps, WettingParams(math.pi / 2, True, BOTTOM_WALL))
    return Scenario("droplet-angle", 2, (-0.5, 0.5, 0.0, 0.4), (n, n), model, 1e-3, 0.1, "droplet",
                    sweep_key="beta", sweep_values=DROPLET_BETAS)


def _droplets_merge(desk) -> Scenario:
    if desk:
        cells, eps, dt, t_end = (128, 32), 0.024, 1e-3, 0.2
    else:
        cells, eps, dt, t_end = (256, 64), 0.012, 5e-4, 15.0
    model = ModelParams(DoubleWell(), DegenerateMobility(), eps, WettingParams(math.pi / 4, True, BOTTOM_WALL))
    return Scenario("droplets-merge", 2, (-1.0, 1.0, 0.0, 0.5), cells, model, dt, t_end, "two-droplets",
                    sweep_key="beta", sweep_values=(math.pi / 4, 3 * math.pi / 4))


def _mobility_compare() -> Scenario:
    model = ModelParams(LOG_03, ConstantMobility(), math.sqrt(1e-3))
    return Scenario("mobility-compare-1d", 1, (0.0, 1.0), (80,), model, 0.01, 0.1, "ramp",
                    sweep_key="mobility", sweep_values=("constant", "degenerate"))


_PRESETS = {
    "convergence-1d": lambda desk: _convergence(1),
    "convergence-2d": lambda desk: _convergence(2),
    "separation-1d-dw": lambda desk: _separation(DoubleWell(), "separation-1d-dw"),
    "separation-1d-log": lambda desk: _separation(LOG_03, "separation-1d-log"),
    "mobility-compare-1d": lambda desk: _mobility_compare(),
    "coarsening-2d-const": lambda desk: _coarsening(ConstantMobility(), "coarsening-2d-const", desk),
    "coarsening-2d-degen": lambda desk: _coarsening(DegenerateMobility(), "coarsening-2d-degen", desk),
    "droplet-angle": _droplet_angle,
    "droplets-merge": _droplets_merge,
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str, desk: bool = False) -> Scenario:
    """Named preset at full resolution, or its reduced desk-scale variant."""
    try:
        return _PRESETS[name](desk)
    except KeyError:
        raise UnknownScenario(name) from None


def schedule_from_name(name: str, workers: int = 4):
    if name == "seq":
        return Sequential()
    if name == "oddeven":
        return OddEvenParallel(workers)
    raise ValueError(f"unknown schedule {name!r} (use seq or oddeven)")
