"""Semi-implicit upwind finite-volume update for one line of cells.

One implicit step solves, for the unknown line ``phi``::

    phi_i - old_i + dt/h (F_{i+1/2} - F_{i-1/2}) = 0
    F_{i+1/2} = u^+ M(phi_i, phi_{i+1}) + u^- M(phi_{i+1}, phi_i)
    u_{i+1/2} = -(xi_{i+1} - xi_i) / h
    xi_i = H_c'(phi_i) - H_e'(old_i) - eps^2/2 [Lap(old)_i + Lap(phi)_i] + wall terms

with zero flux through both ends.  Inside a 2D sweep the line also carries
a frozen transverse context (neighbour lines from the previous sub-step)
that enters both Laplacians; the explicit Laplacian uses the old centre and
the implicit one the new centre.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .grid import laplacian_line
from .model import DomainError, ModelParams, wall_d2_convex, wall_split
from .nlsolve import NonConvergence, SingularJacobian, SolverControls, solve_banded_newton

BANDS = (2, 2)
STALL_OUTER = 6
CONTINUATION_SPLITS = 6


@dataclass
class TransverseContext:
    """Frozen data from the neighbouring lines of a 2D sweep.

    ``kappa[i]`` is the number of transverse neighbours of cell ``i``
    divided by ``h_t**2`` and ``nbsum[i]`` the sum of their values divided
    by ``h_t**2``, so the transverse Laplacian with centre value ``c`` is
    ``nbsum - kappa * c``.  ``wall_weight[i]`` multiplies the wall term of a
    transverse wall (``1/h_t`` on a wetting wall line, else 0).
    """

    kappa: np.ndarray
    nbsum: np.ndarray
    wall_weight: np.ndarray


@dataclass
class LineStepProblem:
    phi_old: np.ndarray
    model: ModelParams
    dt: float
    dx: float
    wet_ends: tuple = (False, False)
    transverse: Optional[TransverseContext] = None
    _explicit: np.ndarray = field(init=False, repr=False)
    _weight: np.ndarray = field(init=False, repr=False)
    _kappa: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.phi_old = np.asarray(self.phi_old, dtype=float)
        n = self.phi_old.size
        if n < 2:
            raise ValueError("a line needs at least two cells")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        m = self.model
        eps2 = m.epsilon**2
        weight = np.zeros(n)
        if self.wet_ends[0]:
            weight[0] += 1.0 / self.dx
        if self.wet_ends[-1]:
            weight[-1] += 1.0 / self.dx
        kappa = np.zeros(n)
        nbsum = np.zeros(n)
        if self.transverse is not None:
            t = self.transverse
            kappa = np.asarray(t.kappa, dtype=float)
            nbsum = np.asarray(t.nbsum, dtype=float)
            weight = weight + np.asarray(t.wall_weight, dtype=float)
        if not m.wetting.enabled:
            weight[:] = 0.0
        old = self.phi_old
        lap_old = laplacian_line(old, self.dx) + nbsum - kappa * old
        explicit = -m.potential.d_concave(old) - 0.5 * eps2 * (lap_old + nbsum)
        if np.any(weight):
            explicit = explicit - weight * wall_split(m.wetting, m.epsilon, old)[3]
        self._explicit = explicit
        self._weight = weight
        self._kappa = kappa

    @property
    def n(self) -> int:
        return self.phi_old.size


def make_line_problem(phi_old, model: ModelParams, dt: float, dx: float) -> LineStepProblem:
    """Pure 1D problem; wall energy acts at the ``left``/``right`` ends."""
    return LineStepProblem(
        np.asarray(phi_old, dtype=float), model, dt, dx, (model.wets("left"), model.wets("right"))
    )


def _check_domain(problem: LineStepProblem, phi: np.ndarray) -> None:
    if problem.model.potential.singular and np.any(np.abs(phi) >= 1.0):
        raise DomainError("logarithmic potential requires |phi| < 1")


def chemical_potential(problem: LineStepProblem, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    m = problem.model
    eps2 = m.epsilon**2
    xi = m.potential.d_convex(phi) - 0.5 * eps2 * (laplacian_line(phi, problem.dx) - problem._kappa * phi)
    if np.any(problem._weight):
        xi = xi + problem._weight * wall_split(m.wetting, m.epsilon, phi)[2]
    return xi + problem._explicit


def _velocities(problem: LineStepProblem, xi: np.ndarray) -> np.ndarray:
    return -np.diff(xi) / problem.dx


def _interior_fluxes(problem, phi, u, upwind=None):
    mob = problem.model.mobility
    left, right = phi[:-1], phi[1:]
    m_fwd = mob.face(left, right)
    m_bwd = mob.face(right, left)
    if upwind is None:
        return np.maximum(u, 0.0) * m_fwd + np.minimum(u, 0.0) * m_bwd
    return u * np.where(upwind, m_fwd, m_bwd)


def face_fluxes(problem: LineStepProblem, phi) -> np.ndarray:
    """All ``n + 1`` face fluxes; the two end fluxes are exactly zero."""
    phi = np.asarray(phi, dtype=float)
    u = _velocities(problem, chemical_potential(problem, phi))
    out = np.zeros(phi.size + 1)
    out[1:-1] = _interior_fluxes(problem, phi, u)
    return out


def _residual(problem, phi, upwind=None):
    u = _velocities(problem, chemical_potential(problem, phi))
    flux = _interior_fluxes(problem, phi, u, upwind)
    div = np.zeros_like(phi)
    div[:-1] += flux
    div[1:] -= flux
    return phi - problem.phi_old + (problem.dt / problem.dx) * div


def residual(problem: LineStepProblem, phi) -> np.ndarray:
    """Residual of the implicit line update at candidate ``phi``.

    Raises :class:`DomainError` for logarithmic potentials when any
    ``|phi| >= 1``.
    """
    phi = np.asarray(phi, dtype=float)
    _check_domain(problem, phi)
    return _residual(problem, phi)


def upwind_pattern(problem: LineStepProblem, phi) -> np.ndarray:
    """``True`` where the face velocity is non-negative (left cell is upwind)."""
    return _velocities(problem, chemical_potential(problem, phi)) >= 0.0


def jacobian_banded(problem: LineStepProblem, phi, upwind=None) -> np.ndarray:
    """Jacobian of the residual in ``solve_banded`` layout, bands ``(2, 2)``.

    Upwind directions are frozen to ``upwind`` (default: the pattern at
    ``phi``); clamped mobility factors contribute zero derivative.
    """
    phi = np.asarray(phi, dtype=float)
    n = phi.size
    m = problem.model
    dx = problem.dx
    xi = chemical_potential(problem, phi)
    u = _velocities(problem, xi)
    if upwind is None:
        upwind = u >= 0.0

    c = 0.5 * m.epsilon**2 / dx**2
    nnb = np.full(n, 2.0)
    nnb[0] = nnb[-1] = 1.0
    diag = m.potential.d2_convex(phi) + c * nnb + 0.5 * m.epsilon**2 * problem._kappa
    if np.any(problem._weight):
        diag = diag + problem._weight * wall_d2_convex(m.wetting, m.epsilon, phi)

    mob = m.mobility
    left, right = phi[:-1], phi[1:]
    m_fwd = mob.face(left, right)
    m_bwd = mob.face(right, left)
    dfwd_l, dfwd_r = mob.face_derivatives(left, right)
    dbwd_r, dbwd_l = mob.face_derivatives(right, left)
    mf = np.where(upwind, m_fwd, m_bwd)
    dm_l = np.where(upwind, dfwd_l, dbwd_l)
    dm_r = np.where(upwind, dfwd_r, dbwd_r)

    # face rows: offsets -1..2 relative to the face's left cell
    jf = np.empty((4, n - 1))
    jf[0] = -mf * c / dx
    jf[1] = mf * (diag[:-1] + c) / dx + u * dm_l
    jf[2] = -mf * (diag[1:] + c) / dx + u * dm_r
    jf[3] = mf * c / dx

    k = problem.dt / dx
    rows = np.zeros((5, n))  # rows[o + 2, i] = J[i, i + o]
    rows[2] += 1.0
    rows[1:5, :-1] += k * jf  # right face of cell i
    rows[0:4, 1:] -= k * jf  # left face of cell i + 1

    ab = np.zeros((5, n))
    for o in range(-2, 3):
        lo, hi = max(0, -o), n - max(0, o)
        ab[2 - o, lo + o : hi + o] = rows[o + 2, lo:hi]
    return ab


@dataclass
class LineStepSolution:
    phi_new: np.ndarray
    xi_new: np.ndarray
    fluxes: np.ndarray
    newton_iters: int
    residual_norm: float


def _projector(problem: LineStepProblem, controls: SolverControls):
    if not problem.model.potential.singular:
        return None
    lim = 1.0 - controls.clamp_margin
    return lambda x: np.clip(x, -lim, lim)


def _barrier(problem: LineStepProblem):
    # keep iterates strictly inside (-1, 1) when the root is known to lie
    # there: a logarithmic term with theta > 0 repels from +-1, and the
    # degenerate mobility preserves the bound (beyond it cells freeze)
    m = problem.model
    if m.mobility.degenerate and np.all(np.abs(problem.phi_old) < 1.0):
        return 1.0
    pot = m.potential
    return 1.0 if pot.singular and pot.theta > 0 else None


def _solve_semismooth(problem, controls, x):
    # Newton on the true residual; the Jacobian takes the upwind directions
    # at the current iterate, so each step re-freezes the pattern.
    return solve_banded_newton(
        lambda y: _residual(problem, y),
        lambda y: jacobian_banded(problem, y),
        x,
        controls,
        BANDS,
        max_iters=controls.max_outer,
        project=_projector(problem, controls),
        raise_on_failure=False,
        bound=_barrier(problem),
    )


def _solve_frozen(problem, controls, x, project, iters=0):
    rn = float(np.max(np.abs(_residual(problem, x))))
    outer = 0
    best, since_best = rn, 0
    while rn > controls.tol:
        if outer >= controls.max_outer:
            raise NonConvergence(
                f"line solve did not converge in {outer} outer iterations (residual {rn:.3e})",
                iters,
                rn,
            )
        outer += 1
        pattern = upwind_pattern(problem, x)
        inner = solve_banded_newton(
            lambda y: _residual(problem, y, pattern),
            lambda y: jacobian_banded(problem, y, pattern),
            x,
            controls,
            BANDS,
            max_iters=controls.max_inner,
            project=project,
            raise_on_failure=False,
            bound=_barrier(problem),
        )
        iters += inner.iterations
        x = inner.solution
        rn_new = float(np.max(np.abs(_residual(problem, x))))
        if inner.iterations == 0 or (
            np.array_equal(pattern, upwind_pattern(problem, x)) and rn_new >= rn
        ):
            raise NonConvergence(
                f"line solve stalled after {iters} Newton iterations (residual {rn_new:.3e})",
                iters,
                rn_new,
            )
        rn = rn_new
        # upwind patterns can cycle without progress; give up early so the
        # caller can fall back to continuation
        if rn < 0.999 * best:
            best, since_best = rn, 0
        else:
            since_best += 1
            if since_best >= STALL_OUTER:
                raise NonConvergence(
                    f"line solve cycling after {iters} Newton iterations (residual {rn:.3e})",
                    iters,
                    rn,
                )
    return x, iters, rn


def rounding_floor(problem: LineStepProblem) -> float:
    """Estimated rounding error of the residual near a solution.

    A running-error bound: every term of the chemical potential is bounded
    using ``max(1, |phi_old|)``, pushed through the velocity and flux and
    scaled by ``dt / dx``.  For very large ``dt / dx`` this exceeds
    ``tol`` and no iterate can do better.
    """
    m = problem.model
    h = problem.dx
    a = max(1.0, float(np.max(np.abs(problem.phi_old))))
    pot = m.potential
    xi = abs(float(pot.d_convex(0.999 if pot.singular else a))) + abs(float(pot.d_concave(a)))
    xi += m.epsilon**2 * (4.0 * a / h**2 + 2.0 * a * float(np.max(problem._kappa, initial=0.0)))
    xi += float(np.max(problem._weight, initial=0.0)) * m.epsilon * 3.0 * a * a
    mob = float(m.mobility.face(a, -a))
    flux = mob * 2.0 * xi / h
    return float(np.finfo(float).eps) * (2.0 * a + problem.dt / h * 2.0 * flux)


def _solve(problem, controls, x0):
    project = _projector(problem, controls)
    x = problem.phi_old.copy() if x0 is None else np.array(x0, dtype=float)
    if project is not None:
        x = project(x)
    first = _solve_semismooth(problem, controls, x)
    # a stalled iterate already at the rounding floor is as good as it gets
    if first.converged or first.residual_norm <= rounding_floor(problem):
        return first.solution, first.iterations, first.residual_norm
    return _solve_frozen(problem, controls, first.solution, project, first.iterations)


def _continuation(problem, controls):
    # Solve the same implicit system for a much smaller time step, where
    # phi_old is a good initial guess, and walk back up to the requested
    # step, warm-starting each rung.  A rung that fails is split
    # geometrically a few times before giving up.
    dt = problem.dt / 4.0**controls.continuation_levels
    x, iters, rn = _solve(replace(problem, dt=dt), controls, None)
    while dt < problem.dt:
        target = min(problem.dt, 2.0 * dt)
        for _ in range(CONTINUATION_SPLITS):
            try:
                x_new, it, rn = _solve(replace(problem, dt=target), controls, x)
                iters += it
                break
            except (NonConvergence, SingularJacobian):
                target = math.sqrt(dt * target)
        else:
            raise NonConvergence(f"continuation stalled at dt={dt:.3g}", iters, rn)
        x, dt = x_new, target
    return x, iters, rn


def step_line(problem: LineStepProblem, controls: SolverControls = SolverControls(), x0=None) -> LineStepSolution:
    """Advance one line by solving the implicit update.

    The residual is only piecewise smooth because of the upwind splits.
    First attempt: damped Newton on the true residual with the Jacobian
    taken at the current upwind pattern.  If that stalls, an outer loop
    freezes the pattern, runs damped Newton on the frozen smooth system
    and refreezes until the true residual converges.  If both fail from
    ``x0`` (default ``phi_old``), the same system is re-solved by
    continuation in ``dt``, starting at ``dt / 4**continuation_levels`` and
    doubling back up with warm starts.  Convergence is judged on the true
    residual; a stalled iterate is accepted only if its residual is below
    :func:`rounding_floor`, the precision the residual can be evaluated to.

    Raises
    ------
    NonConvergence
        When neither the direct solve nor the continuation converges.
    """
    try:
        x, iters, rn = _solve(problem, controls, x0)
    except (NonConvergence, SingularJacobian) as exc:
        if controls.continuation_levels == 0:
            raise
        try:
            x, iters, rn = _continuation(problem, controls)
        except (NonConvergence, SingularJacobian) as exc2:
            raise NonConvergence(
                f"{exc}; continuation in dt failed too: {exc2}",
                getattr(exc, "iterations", None),
                getattr(exc, "residual_norm", None),
            ) from exc
    xi = chemical_potential(problem, x)
    return LineStepSolution(x, xi, face_fluxes(problem, x), iters, rn)
