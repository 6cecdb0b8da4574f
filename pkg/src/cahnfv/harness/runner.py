"""Time loop, per-step certification and result summaries."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..diagnostics import (
    EnergyViolation,
    FitDegenerate,
    InvariantViolation,
    NoInterface,
    check_step,
    convergence_order,
    explicit_steady_state,
    l1_error,
    make_report,
    measure_contact_angle,
)
from ..grid import PhaseField
from ..nlsolve import NonConvergence, SolverControls
from ..scheme1d import make_line_problem, step_line
from ..scheme2d import step_2d
from . import io as rio
from .scenarios import Scenario, build_initial, expand, mobility_name

log = logging.getLogger(__name__)


class RunFailure(RuntimeError):
    """The nonlinear solve failed; carries the step index and time."""

    def __init__(self, message, step, t):
        super().__init__(message)
        self.step = step
        self.t = t


@dataclass
class Simulation:
    scenario: Scenario
    initial: PhaseField
    final: PhaseField
    reports: list
    snapshots: list  # (step, t, field)
    max_mass_drift: float = 0.0
    max_abs_phi: float = 0.0
    max_step_rise: float = -math.inf
    max_sweep_rise: float = -math.inf
    failures: dict = field(default_factory=lambda: {"mass": 0, "bound": 0, "energy": 0, "sweep_energy": 0})
    bounded: bool = False


def _snapshot_steps(sc: Scenario) -> set:
    n = sc.n_steps
    steps = {0, n}
    for t in sc.snapshot_times:
        steps.add(min(n, int(round(t / sc.dt))))
    return steps


def advance(phi: PhaseField, sc: Scenario, controls: SolverControls, dt: float, track_energy=True):
    """One time step; returns ``(field, newton_iters, residual, sweep_energies)``."""
    if sc.dim == 1:
        sol = step_line(make_line_problem(phi.values, sc.model, dt, phi.grid.dx), controls)
        return PhaseField(phi.grid, sol.phi_new), sol.newton_iters, sol.residual_norm, []
    new, rep = step_2d(phi, sc.model, controls, dt, sc.schedule, track_energy)
    return new, rep.newton_iters, rep.worst_residual, rep.sweep_energies


def simulate(sc: Scenario, controls: SolverControls = SolverControls(), keep_steps=None) -> Simulation:
    """Run a single (non-swept) scenario in memory.

    Every accepted step is certified with :func:`check_step`; in 2D the
    energy after each row and column sweep is checked as well.  With
    ``sc.strict`` the first violation is raised, otherwise violations are
    counted in ``Simulation.failures``.

    Raises
    ------
    RunFailure
        A line solve did not converge.
    InvariantViolation
        Strict mode only; ``.step`` holds the step index.
    """
    if sc.sweep_key is not None:
        raise ValueError("simulate() runs a single scenario; use expand() first")
    phi = build_initial(sc)
    model = sc.model
    n_cells = phi.grid.n_cells
    slack = 10.0 * controls.tol * n_cells
    bounded = bool(model.mobility.degenerate and np.max(np.abs(phi.values)) <= 1.0)
    reports = [make_report(phi, model, 0.0)]
    keep = _snapshot_steps(sc) if keep_steps is None else set(keep_steps)
    sim = Simulation(sc, phi, phi, reports, [], bounded=bounded)
    sim.max_abs_phi = float(np.max(np.abs(phi.values)))
    if 0 in keep:
        sim.snapshots.append((0, 0.0, phi))
    t = 0.0
    for n in range(1, sc.n_steps + 1):
        h = min(sc.dt, sc.t_end - t)
        try:
            phi, iters, res, sweeps = advance(phi, sc, controls, h)
        except NonConvergence as exc:
            raise RunFailure(f"step {n} (t={t + h:.6g}): {exc}", n, t + h) from exc
        t = n * sc.dt if n < sc.n_steps else sc.t_end
        rep = make_report(phi, model, t, iters, res)
        prev = reports[-1]
        try:
            e = prev.energy.total
            for e_next in sweeps:
                rise = e_next - e
                sim.max_sweep_rise = max(sim.max_sweep_rise, rise)
                if rise > slack:
                    sim.failures["sweep_energy"] += 1
                    if sc.strict:
                        raise EnergyViolation(rise, f"energy rose by {rise:.3e} within a sweep")
                e = e_next
            verdict = check_step(prev, rep, controls, n_cells=n_cells, bounded=bounded, strict=sc.strict)
        except InvariantViolation as exc:
            exc.step = n
            raise
        for kind, ok in (("mass", verdict.mass_ok), ("bound", verdict.bounds_ok), ("energy", verdict.energy_ok)):
            sim.failures[kind] += not ok
        sim.max_step_rise = max(sim.max_step_rise, verdict.energy_increase)
        sim.max_mass_drift = max(sim.max_mass_drift, abs(rep.mass - reports[0].mass))
        sim.max_abs_phi = max(sim.max_abs_phi, abs(rep.phi_min), abs(rep.phi_max))
        reports.append(rep)
        if n in keep:
            sim.snapshots.append((n, t, phi))
    sim.final = phi
    return sim


# --------------------------------------------------------------------------
# scenario-specific measurements
# --------------------------------------------------------------------------


def measurements(sim: Simulation) -> dict:
    sc = sim.scenario
    phi = sim.final
    eps = sc.model.epsilon
    out = {}
    if sc.initial == "cosine-bump":
        ref = (lambda x: explicit_steady_state(x, eps)) if sc.dim == 1 else (lambda x, y: explicit_steady_state(x, eps))
        out["l1_error"] = l1_error(phi, ref)
        out["h"] = phi.grid.dx
    elif sc.initial == "droplet":
        try:
            angle = measure_contact_angle(phi, eps)
            out["angle"] = angle
            out["beta_ratio"] = sc.model.wetting.beta / angle
        except (NoInterface, FitDegenerate) as exc:
            out["angle"] = None
            out["angle_error"] = str(exc)
        out["beta"] = sc.model.wetting.beta
    elif sc.initial == "ramp":
        x = phi.grid.x
        out["bump_max"] = float(np.max(phi.values[x > 0.6]))
        if len(sim.reports) > 1:
            out["last_energy_change"] = abs(sim.reports[-1].energy.total - sim.reports[-2].energy.total)
    elif sc.initial == "random" and sc.dim == 1:
        out["fraction_near_pure"] = float(np.mean(np.abs(np.abs(phi.values) - 1.0) <= 1e-2))
    if sc.initial == "two-droplets":
        out["beta"] = sc.model.wetting.beta
    return out


def summarize(sim: Simulation) -> dict:
    sc = sim.scenario
    first, last = sim.reports[0], sim.reports[-1]
    return {
        "cells": list(sc.cells),
        "dt": sc.dt,
        "steps": len(sim.reports) - 1,
        "t_final": last.t,
        "mobility": mobility_name(sc.model.mobility),
        "energy_initial": first.energy.total,
        "energy_final": last.energy.total,
        "mass_initial": first.mass,
        "max_mass_drift": sim.max_mass_drift,
        "max_abs_phi": sim.max_abs_phi,
        "max_step_energy_rise": None if len(sim.reports) == 1 else sim.max_step_rise,
        "max_sweep_energy_rise": None if sim.max_sweep_rise == -math.inf else sim.max_sweep_rise,
        "bounds_checked": sim.bounded,
        "violations": dict(sim.failures),
        "newton_iters": int(sum(r.newton_iters for r in sim.reports)),
        "measurements": measurements(sim),
    }


# --------------------------------------------------------------------------
# run with files
# --------------------------------------------------------------------------


@dataclass
class RunOutput:
    out_dir: Path
    snapshots: list
    series: list
    summary: dict
    summary_path: Path


def _fmt_time(t: float) -> str:
    return f"{t:.6f}".rstrip("0").rstrip(".") or "0"


def run(sc: Scenario, out_dir, controls: SolverControls = SolverControls()) -> RunOutput:
    """Run every variant of ``sc`` and write its outputs under ``out_dir``.

    Layout: ``<label>/series.csv`` with one row per step,
    ``<label>/phi_t<time>.csv`` snapshots, and ``summary.json`` at the top.
    Convergence families also report orders between successive resolutions.
    """
    out_dir = Path(out_dir)
    summary = {"scenario": sc.name, "variants": {}}
    snaps, series = [], []
    for label, single in expand(sc):
        log.info("running %s / %s", sc.name, label)
        sim = simulate(single, controls)
        vdir = out_dir / label
        for _, t, phi in sim.snapshots:
            snaps.append(rio.write_snapshot(vdir / f"phi_t{_fmt_time(t)}.csv", phi))
        series.append(rio.write_series(vdir / "series.csv", sim.reports))
        summary["variants"][label] = summarize(sim)
    if sc.sweep_key == "cells":
        pairs = [(v["measurements"]["h"], v["measurements"]["l1_error"]) for v in summary["variants"].values()]
        pairs.sort(key=lambda p: -p[0])
        summary["convergence"] = {
            "h": [p[0] for p in pairs],
            "l1_error": [p[1] for p in pairs],
            "order": convergence_order(pairs),
        }
    path = rio.write_summary(out_dir / "summary.json", summary)
    return RunOutput(out_dir, snaps, series, summary, path)
