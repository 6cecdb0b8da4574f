"""Continuous model ingredients: bulk potentials, mobility laws and wall energy.

Every potential and wall energy is stored together with a convex splitting
``f = f_c - f_e`` (both parts convex on ``[-1, 1]``).  Evaluations accept
scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.special import xlogy

ArrayLike = Union[float, np.ndarray]

WALLS = ("left", "right", "bottom", "top")


class DomainError(ValueError):
    """Raised when a potential is evaluated outside its domain."""


# --------------------------------------------------------------------------
# bulk potentials
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DoubleWell:
    """Ginzburg-Landau potential ``(phi^2 - 1)^2 / 4``."""

    singular = False

    def convex(self, phi):
        return (phi**4 + 1.0) / 4.0

    def concave(self, phi):
        return phi**2 / 2.0

    def d_convex(self, phi):
        return phi**3

    def d_concave(self, phi):
        return 1.0 * phi

    def d2_convex(self, phi):
        return 3.0 * phi**2

    def value(self, phi):
        return (phi**2 - 1.0) ** 2 / 4.0


@dataclass(frozen=True)
class Logarithmic:
    """Flory-Huggins potential with temperature ``theta`` and critical ``theta_c``.

    ``theta = 0`` is the deep-quench limit; the logarithmic part then
    vanishes identically.
    """

    theta: float
    theta_c: float
    singular = True

    def __post_init__(self):
        if not (0.0 <= self.theta < self.theta_c):
            raise ValueError(
                f"logarithmic potential needs 0 <= theta < theta_c, got {self.theta}, {self.theta_c}"
            )

    def convex(self, phi):
        p = 1.0 + phi
        m = 1.0 - phi
        return 0.5 * self.theta * (xlogy(p, p / 2.0) + xlogy(m, m / 2.0))

    def concave(self, phi):
        return -0.5 * self.theta_c * (1.0 - phi**2)

    def d_convex(self, phi):
        if self.theta == 0.0:
            return np.zeros_like(np.asarray(phi, dtype=float))[()]
        return 0.5 * self.theta * np.log((1.0 + phi) / (1.0 - phi))

    def d_concave(self, phi):
        return self.theta_c * phi

    def d2_convex(self, phi):
        if self.theta == 0.0:
            return np.zeros_like(np.asarray(phi, dtype=float))[()]
        return self.theta / (1.0 - phi**2)

    def value(self, phi):
        return self.convex(phi) - self.concave(phi)


Potential = Union[DoubleWell, Logarithmic]


def potential_split(p: Potential, phi: ArrayLike):
    """Return ``(H_c, H_e, dH_c, dH_e)`` at ``phi``.

    Raises :class:`DomainError` for a logarithmic potential when any
    ``|phi| >= 1``.
    """
    phi = np.asarray(phi, dtype=float)
    if p.singular and np.any(np.abs(phi) >= 1.0):
        raise DomainError("logarithmic potential requires |phi| < 1")
    out = (p.convex(phi), p.concave(phi), p.d_convex(phi), p.d_concave(phi))
    return tuple(np.asarray(v, dtype=float)[()] for v in out)


# --------------------------------------------------------------------------
# mobility
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantMobility:
    m0: float = 1.0
    degenerate = False

    def __post_init__(self):
        if not self.m0 > 0:
            raise ValueError("mobility scale m0 must be positive")

    def face(self, up, down):
        return self.m0 + 0.0 * np.asarray(up) * np.asarray(down)

    def face_derivatives(self, up, down):
        z = np.zeros(np.broadcast(np.asarray(up), np.asarray(down)).shape)
        return z, z


@dataclass(frozen=True)
class DegenerateMobility:
    """Upwinded ``M0 (1 + up)^+ (1 - down)^+``; vanishes at the pure phases."""

    m0: float = 1.0
    degenerate = True

    def __post_init__(self):
        if not self.m0 > 0:
            raise ValueError("mobility scale m0 must be positive")

    def face(self, up, down):
        return self.m0 * np.maximum(1.0 + np.asarray(up), 0.0) * np.maximum(1.0 - np.asarray(down), 0.0)

    def face_derivatives(self, up, down):
        """Partial derivatives w.r.t. ``up`` and ``down`` (zero on clamped parts)."""
        a = 1.0 + np.asarray(up, dtype=float)
        b = 1.0 - np.asarray(down, dtype=float)
        ap = np.maximum(a, 0.0)
        bp = np.maximum(b, 0.0)
        return self.m0 * (a > 0) * bp, -self.m0 * ap * (b > 0)


Mobility = Union[ConstantMobility, DegenerateMobility]


def mobility_face(m: Mobility, phi_upwind: ArrayLike, phi_downwind: ArrayLike):
    """Discrete face mobility with upwind/downwind arguments; always ``>= 0``."""
    return np.asarray(m.face(phi_upwind, phi_downwind), dtype=float)[()]


# --------------------------------------------------------------------------
# wall free energy
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WettingParams:
    """Cubic wall energy with equilibrium contact angle ``beta`` (radians).

    ``walls`` lists which domain walls carry the wall energy; 1D lines use
    ``left``/``right``.
    """

    beta: float = math.pi / 2
    enabled: bool = True
    walls: tuple = WALLS

    def __post_init__(self):
        if self.enabled and not (0.0 < self.beta < math.pi):
            raise ValueError(f"contact angle must satisfy 0 < beta < pi, got {self.beta}")
        bad = set(self.walls) - set(WALLS)
        if bad:
            raise ValueError(f"unknown walls {sorted(bad)}")

    def wets(self, wall: str) -> bool:
        return self.enabled and wall in self.walls


def _wall_coeff(w: WettingParams, eps: float) -> float:
    return eps * math.sqrt(2.0) / 2.0 * math.cos(w.beta)


def wall_energy(w: WettingParams, eps: float, phi):
    """``f_w(phi) = (eps sqrt2 / 2) cos(beta) (phi^3/3 - phi)``."""
    c = _wall_coeff(w, eps)
    return c * (phi**3 / 3.0 - phi)


def wall_split(w: WettingParams, eps: float, phi):
    """Return ``(f_cw, f_ew, df_cw, df_ew)``; the split depends on the sign of cos(beta)."""
    c = _wall_coeff(w, eps)
    phi = np.asarray(phi, dtype=float)
    if c >= 0.0:
        f_c = c * (phi**3 / 3.0 - phi + phi**2)
        df_c = c * (phi**2 - 1.0 + 2.0 * phi)
        f_e = c * phi**2
        df_e = 2.0 * c * phi
    else:
        f_c = -c * phi**2
        df_c = -2.0 * c * phi
        f_e = -c * (phi**2 + phi**3 / 3.0 - phi)
        df_e = -c * (2.0 * phi + phi**2 - 1.0)
    return tuple(np.asarray(v, dtype=float)[()] for v in (f_c, f_e, df_c, df_e))


def wall_d2_convex(w: WettingParams, eps: float, phi):
    c = _wall_coeff(w, eps)
    if c >= 0.0:
        return c * (2.0 * phi + 2.0)
    return -2.0 * c + 0.0 * phi


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelParams:
    potential: Potential = field(default_factory=DoubleWell)
    mobility: Mobility = field(default_factory=ConstantMobility)
    epsilon: float = 0.1
    wetting: WettingParams = field(default_factory=lambda: WettingParams(enabled=False))

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("interface width epsilon must be positive")

    def wets(self, wall: str) -> bool:
        return self.wetting.wets(wall)
