"""Discrete free energy, per-step property checks, errors and contact angles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .grid import PhaseField, total_mass
from .model import ModelParams, wall_energy
from .nlsolve import SolverControls

#: distance from +-1 used when a singular potential meets |phi| >= 1
ENERGY_CLAMP = 1e-13


@dataclass(frozen=True)
class EnergyBreakdown:
    bulk_convex: float
    bulk_concave: float
    gradient_x: float
    gradient_y: float
    wall: float
    clamped_cells: int = 0

    @property
    def bulk(self) -> float:
        return self.bulk_convex - self.bulk_concave

    @property
    def gradient(self) -> float:
        return self.gradient_x + self.gradient_y

    @property
    def total(self) -> float:
        return self.bulk + self.gradient + self.wall


def free_energy(field: PhaseField, model: ModelParams) -> EnergyBreakdown:
    """Discrete free energy of ``field``.

    Bulk ``sum (H_c - H_e)`` and the squared face gradients are weighted by
    the cell volume.  Wall energy enters at the boundary cells of every
    wetting wall: in 1D with weight 1, in 2D with the length of the wall
    face (``dy`` on the left/right walls, ``dx`` on the bottom/top walls).

    A logarithmic potential is evaluated at ``+-(1 - 1e-13)`` for cells
    with ``|phi| >= 1``; the number of such cells is reported as
    ``clamped_cells``.
    """
    g = field.grid
    phi = field.values
    pot = model.potential
    clamped = 0
    if pot.singular:
        lim = 1.0 - ENERGY_CLAMP
        over = np.abs(phi) > lim
        clamped = int(np.count_nonzero(np.abs(phi) >= 1.0))
        if np.any(over):
            phi = np.clip(phi, -lim, lim)
    vol = g.cell_volume
    hc = vol * float(np.sum(pot.convex(phi)))
    he = vol * float(np.sum(pot.concave(phi)))
    half_eps2 = 0.5 * model.epsilon**2
    if g.dim == 1:
        gx = vol * half_eps2 * float(np.sum((np.diff(phi) / g.dx) ** 2))
        gy = 0.0
        wall = 0.0
        if model.wets("left"):
            wall += float(wall_energy(model.wetting, model.epsilon, phi[0]))
        if model.wets("right"):
            wall += float(wall_energy(model.wetting, model.epsilon, phi[-1]))
    else:
        gx = vol * half_eps2 * float(np.sum((np.diff(phi, axis=1) / g.dx) ** 2))
        gy = vol * half_eps2 * float(np.sum((np.diff(phi, axis=0) / g.dy) ** 2))
        wall = 0.0
        for name, cells, length in (
            ("left", phi[:, 0], g.dy),
            ("right", phi[:, -1], g.dy),
            ("bottom", phi[0, :], g.dx),
            ("top", phi[-1, :], g.dx),
        ):
            if model.wets(name):
                wall += length * float(np.sum(wall_energy(model.wetting, model.epsilon, cells)))
    return EnergyBreakdown(hc, he, gx, gy, wall, clamped)


# --------------------------------------------------------------------------
# per-step certification
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StepReport:
    t: float
    mass: float
    phi_min: float
    phi_max: float
    energy: EnergyBreakdown
    newton_iters: int = 0
    residual_norm: float = 0.0

    def __post_init__(self):
        vals = (self.t, self.mass, self.phi_min, self.phi_max, self.energy.total, self.residual_norm)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("step report contains non-finite values")

    def row(self) -> list:
        """Values in the order of :data:`SERIES_COLUMNS`."""
        e = self.energy
        return [
            self.t,
            self.mass,
            self.phi_min,
            self.phi_max,
            e.total,
            e.bulk,
            e.gradient,
            e.wall,
            self.newton_iters,
            self.residual_norm,
        ]


SERIES_COLUMNS = (
    "t",
    "mass",
    "phi_min",
    "phi_max",
    "energy_total",
    "energy_bulk",
    "energy_grad",
    "energy_wall",
    "newton_iters",
    "residual",
)


def make_report(field: PhaseField, model: ModelParams, t: float, newton_iters: int = 0, residual_norm: float = 0.0):
    return StepReport(
        t,
        total_mass(field),
        float(np.min(field.values)),
        float(np.max(field.values)),
        free_energy(field, model),
        newton_iters,
        residual_norm,
    )


class InvariantViolation(RuntimeError):
    kind = "invariant"

    def __init__(self, magnitude: float, message: Optional[str] = None):
        super().__init__(message or f"{self.kind} violation of size {magnitude:.3e}")
        self.magnitude = magnitude


class MassViolation(InvariantViolation):
    kind = "mass"


class BoundViolation(InvariantViolation):
    kind = "bound"


class EnergyViolation(InvariantViolation):
    kind = "energy"


@dataclass(frozen=True)
class PropertyVerdict:
    mass_drift: float
    bound_excess: float
    energy_increase: float
    mass_ok: bool
    bounds_ok: bool
    energy_ok: bool

    @property
    def ok(self) -> bool:
        return self.mass_ok and self.bounds_ok and self.energy_ok

    def raise_first(self) -> None:
        if not self.mass_ok:
            raise MassViolation(self.mass_drift)
        if not self.bounds_ok:
            raise BoundViolation(self.bound_excess)
        if not self.energy_ok:
            raise EnergyViolation(self.energy_increase)


def check_step(
    prev: StepReport,
    next: StepReport,
    controls: SolverControls = SolverControls(),
    *,
    n_cells: int,
    bounded: bool = False,
    strict: bool = False,
) -> PropertyVerdict:
    """Certify mass, bounds (only when ``bounded``) and energy decay.

    Thresholds are tied to the nonlinear tolerance: ``10 tol N`` for mass
    and energy, ``1 + 10 tol`` for ``max |phi|``.  With ``strict`` the first
    failed property is raised as an :class:`InvariantViolation` subclass.
    """
    slack = 10.0 * controls.tol * n_cells
    drift = abs(next.mass - prev.mass)
    excess = max(abs(next.phi_min), abs(next.phi_max)) - 1.0
    rise = next.energy.total - prev.energy.total
    verdict = PropertyVerdict(
        drift,
        excess,
        rise,
        drift <= slack,
        (not bounded) or excess <= 10.0 * controls.tol,
        rise <= slack,
    )
    if strict:
        verdict.raise_first()
    return verdict


# --------------------------------------------------------------------------
# errors against the explicit steady state
# --------------------------------------------------------------------------


def explicit_steady_state(x, eps: float):
    """Steady state reached from the centred cosine bump on ``[0, 1]``."""
    x = np.asarray(x, dtype=float)
    s = x - 0.5
    inside = np.abs(s) <= math.pi * eps
    out = np.where(inside, (1.0 + np.cos(s / eps)) / math.pi - 1.0, -1.0)
    return out[()]


def l1_error(field: PhaseField, reference: Callable) -> float:
    """``sum |phi - ref| * cell volume`` with ``ref`` sampled at cell centres."""
    ref = np.asarray(reference(*field.grid.centers()), dtype=float)
    return float(np.sum(np.abs(field.values - ref)) * field.grid.cell_volume)


def convergence_order(errors: Sequence) -> list:
    """``log2(E_{k-1} / E_k)`` for successive ``(h, E)`` pairs.

    Entries whose errors are not both positive are reported as ``None``.
    """
    out = []
    for (_, e0), (_, e1) in zip(errors[:-1], errors[1:]):
        out.append(math.log2(e0 / e1) if e0 > 0 and e1 > 0 else None)
    return out


# --------------------------------------------------------------------------
# contact angle
# --------------------------------------------------------------------------


class NoInterface(ValueError):
    pass


class FitDegenerate(ValueError):
    pass


def zero_contour(field: PhaseField) -> np.ndarray:
    """Points of the ``phi = 0`` level set, interpolated linearly on grid edges."""
    g = field.grid
    if g.dim != 2:
        raise ValueError("contour extraction needs a 2D field")
    phi = field.values
    xx, yy = g.centers()
    pts = []
    for a, b, xa, xb, ya, yb in (
        (phi[:, :-1], phi[:, 1:], xx[:, :-1], xx[:, 1:], yy[:, :-1], yy[:, 1:]),
        (phi[:-1, :], phi[1:, :], xx[:-1, :], xx[1:, :], yy[:-1, :], yy[1:, :]),
    ):
        cross = (a * b < 0) | ((a == 0) & (b != 0))
        s = a[cross] / (a[cross] - b[cross])
        pts.append(np.column_stack([xa[cross] + s * (xb[cross] - xa[cross]), ya[cross] + s * (yb[cross] - ya[cross])]))
    return np.vstack(pts)


def fit_circle(points: np.ndarray):
    """Algebraic least-squares circle ``(xc, yc, R)`` through ``points``."""
    x, y = points[:, 0], points[:, 1]
    A = np.column_stack([x, y, np.ones_like(x)])
    rhs = -(x**2 + y**2)
    sol, _, rank, _ = np.linalg.lstsq(A, rhs, rcond=None)
    if rank < 3:
        raise FitDegenerate("contour points do not determine a circle")
    d, e, f = sol
    xc, yc = -d / 2.0, -e / 2.0
    r2 = xc**2 + yc**2 - f
    if not (np.isfinite(r2) and r2 > 0):
        raise FitDegenerate("circle fit produced a non-positive radius")
    return float(xc), float(yc), float(math.sqrt(r2))


def measure_contact_angle(field: PhaseField, epsilon: float, substrate: str = "bottom") -> float:
    """Contact angle (radians) of a ``phi > 0`` droplet sitting on the bottom wall.

    Zero-level points more than ``2 epsilon`` above the wall are fitted with
    a circle; the angle is measured inside the droplet where the circle
    meets the wall, so ``cos(angle) = -(yc - y_wall) / R``.
    """
    if substrate != "bottom":
        raise ValueError("only the bottom substrate is supported")
    y_wall = field.grid.origin[1]
    pts = zero_contour(field)
    pts = pts[pts[:, 1] - y_wall > 2.0 * epsilon]
    if len(pts) < 3:
        raise NoInterface("fewer than three interface points above the wall layer")
    _, yc, r = fit_circle(pts)
    c = -(yc - y_wall) / r
    if not -1.0 < c < 1.0:
        raise FitDegenerate("fitted circle does not cross the substrate")
    return math.acos(c)
