"""Damped Newton iteration over banded systems, plus a dense test oracle.

The banded solver is scheme-agnostic: callers hand in a residual, a
Jacobian in ``scipy.linalg.solve_banded`` layout and the band widths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import LinAlgError, solve_banded


class NonConvergence(RuntimeError):
    def __init__(self, message, iterations=None, residual_norm=None, outcome=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual_norm = residual_norm
        self.outcome = outcome


class SingularJacobian(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverControls:
    """Nonlinear-solve settings shared by every line solve."""

    tol: float = 1e-10
    max_outer: int = 200
    max_inner: int = 50
    max_halvings: int = 30
    clamp_margin: float = 1e-13
    max_step: float = 0.5
    continuation_levels: int = 12

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_outer < 1 or self.max_inner < 1 or self.max_halvings < 1:
            raise ValueError("iteration caps must be >= 1")
        if not 0 < self.clamp_margin < 1e-6:
            raise ValueError("clamp_margin must lie in (0, 1e-6)")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")

    @property
    def damping_min(self) -> float:
        return 0.5**self.max_halvings


@dataclass
class SolveOutcome:
    solution: np.ndarray
    iterations: int
    residual_norm: float
    converged: bool


#: share of the distance to a bound that one Newton step may use
FRACTION_TO_BOUNDARY = 0.99


def _norm(r: np.ndarray) -> float:
    return float(np.max(np.abs(r))) if r.size else 0.0


def solve_banded_newton(
    residual_fn: Callable[[np.ndarray], np.ndarray],
    jacobian_fn: Callable[[np.ndarray], np.ndarray],
    x0,
    controls: SolverControls = SolverControls(),
    bands: tuple = (2, 2),
    max_iters: Optional[int] = None,
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    raise_on_failure: bool = True,
    bound: Optional[float] = None,
) -> SolveOutcome:
    """Damped Newton iteration ``x <- x - lam J^{-1} r`` with step halving.

    Full Newton steps longer than ``controls.max_step`` (max-norm) are
    scaled back before the halving search starts.  With ``bound`` each
    component of a trial point moves at most ``FRACTION_TO_BOUNDARY`` of its
    distance to ``+-bound``, so iterates approach a singular boundary
    geometrically instead of landing on it.

    The step is halved until the max-norm residual decreases; after
    ``controls.max_halvings`` failed halvings the iteration stops and the
    best iterate is reported.  ``project`` (e.g. a clamp into the domain of
    a singular potential) is applied to every trial point.

    Raises
    ------
    NonConvergence
        If ``raise_on_failure`` and the tolerance is not met.
    SingularJacobian
        If the banded factorisation hits a zero pivot or produces
        non-finite values.
    """
    max_iters = controls.max_inner * controls.max_outer if max_iters is None else max_iters
    x = np.array(x0, dtype=float)
    if project is not None:
        x = project(x)
    r = residual_fn(x)
    rn = _norm(r)
    it = 0
    while rn > controls.tol and it < max_iters:
        it += 1
        ab = jacobian_fn(x)
        try:
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                dx = solve_banded(bands, ab, r, check_finite=False)
        except (LinAlgError, ValueError) as exc:
            raise SingularJacobian(f"banded Jacobian is singular: {exc}") from exc
        if not np.all(np.isfinite(dx)):
            raise SingularJacobian("banded solve produced non-finite update")
        size = float(np.max(np.abs(dx)))
        lam = min(1.0, controls.max_step / size) if size > 0 else 1.0
        if bound is not None:
            lo = x - FRACTION_TO_BOUNDARY * np.maximum(x + bound, 0.0)
            hi = x + FRACTION_TO_BOUNDARY * np.maximum(bound - x, 0.0)
        accepted = False
        for _ in range(controls.max_halvings + 1):
            xt = x - lam * dx
            if bound is not None:
                xt = np.clip(xt, lo, hi)
            if project is not None:
                xt = project(xt)
            rt = residual_fn(xt)
            rtn = _norm(rt)
            if rtn < rn:
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            break
        x, r, rn = xt, rt, rtn
    outcome = SolveOutcome(x, it, rn, rn <= controls.tol)
    if raise_on_failure and not outcome.converged:
        raise NonConvergence(
            f"Newton stalled after {it} iterations (residual {rn:.3e})", it, rn, outcome
        )
    return outcome


def oracle_root(residual_fn, x0, tol: float = 1e-12, max_iters: int = 200, fd_step: float = 1e-7):
    """Brute-force root finder for tests.

    Newton with a dense forward-difference Jacobian, no structure and no
    frozen upwind information, plus step halving on the residual norm.
    """
    x = np.array(x0, dtype=float)
    r = np.asarray(residual_fn(x), dtype=float)
    rn = _norm(r)
    for _ in range(max_iters):
        if rn <= tol:
            return x
        n = x.size
        J = np.empty((n, n))
        for k in range(n):
            h = fd_step * max(1.0, abs(x[k]))
            xp = x.copy()
            xp[k] += h
            J[:, k] = (np.asarray(residual_fn(xp)) - r) / h
        try:
            dx = np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(J, r, rcond=None)[0]
        lam = 1.0
        for _ in range(40):
            xt = x - lam * dx
            try:
                rt = np.asarray(residual_fn(xt), dtype=float)
            except ValueError:
                rt = None
            if rt is not None and np.all(np.isfinite(rt)) and _norm(rt) < rn:
                break
            lam *= 0.5
        else:
            break
        x, r, rn = xt, rt, _norm(rt)
    if rn <= tol:
        return x
    raise NonConvergence(f"oracle root search failed (residual {rn:.3e})", None, rn)
