"""Closed-form kinematics of a single energy-state dipolar oscillator.

Plane b carries the phase Phi_b = omega t + alpha(x, y) + gamma_b. The
phase point moves on a circle of radius q0 = 2 m0 c^2 l0 / (sqrt(3) E) at
speed c / sqrt(3), so the six-space speed is always c.
"""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import DomainError
from .geometry6 import NATURAL, Constants, Field, PlaneVector, constant_field

SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True)
class Oscillator:
    """One energy state's dipole.

    ``alpha`` is the real phase field alpha(x, y); it defaults to zero for
    standalone kinematics.
    """

    energy: float
    gamma: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    alpha: Field = field(default_factory=lambda: constant_field(0.0))
    label: str = ""
    consts: Constants = NATURAL

    def __post_init__(self):
        if not (np.isfinite(self.energy) and self.energy > 0):
            raise DomainError(f"oscillator energy must be positive, got {self.energy!r}")
        g = tuple(float(v) for v in self.gamma)
        if len(g) != 3:
            raise DomainError("gamma must hold three phase constants")
        object.__setattr__(self, "gamma", g)

    @property
    def omega(self):
        return self.energy / self.consts.hbar

    @property
    def amplitude(self):
        """q0 = 2 m0 c^2 l0 / (sqrt(3) E)."""
        k = self.consts
        return 2.0 * k.m0 * k.c ** 2 * k.l0 / (SQRT3 * self.energy)

    @property
    def mass(self):
        return self.energy / self.consts.c ** 2

    @property
    def mass_moment(self):
        """M q0 = 2 m0 l0 / sqrt(3), the same for every state."""
        return self.mass * self.amplitude

    def half_phase(self, p, t):
        """phi/2 = omega t + alpha(x, y)."""
        return self.omega * np.asarray(t, dtype=float) + self.alpha(p)

    def check_harmonic(self, p, h=None):
        """Laplacian of alpha on each plane; zero for an admissible phase field."""
        hx, hy = self.alpha.hess_diag(p, h)
        return hx + hy


@dataclass(frozen=True)
class PhaseState:
    """Per-plane total phases Phi_b = phi/2 + gamma_b, stacked on axis 0."""

    total: np.ndarray

    def difference(self, a, b):
        return self.total[a - 1] - self.total[b - 1]


def phase_state(osc, p, t):
    half = osc.half_phase(p, t)
    return PhaseState(np.stack([half + g for g in osc.gamma]))


def _planes(a, b):
    return tuple(PlaneVector(k + 1, a[k], b[k]) for k in range(3))


def position(osc, p, t):
    """q: q0 (cos Phi_b, sin Phi_b) on each plane."""
    ph = phase_state(osc, p, t).total
    q0 = osc.amplitude
    return _planes(q0 * np.cos(ph), q0 * np.sin(ph))


def position_bar(osc, p, t):
    """q-bar, the monopole separation vector: q0 (cos Phi_b, -sin Phi_b)."""
    ph = phase_state(osc, p, t).total
    q0 = osc.amplitude
    return _planes(q0 * np.cos(ph), -q0 * np.sin(ph))


def velocity(osc, p, t):
    """dq/dt = -(c/sqrt 3)(sin Phi_b, -cos Phi_b)."""
    ph = phase_state(osc, p, t).total
    s = osc.consts.c / SQRT3
    return _planes(-s * np.sin(ph), s * np.cos(ph))


def velocity_bar(osc, p, t):
    """d(q-bar)/dt = -(c/sqrt 3)(sin Phi_b, cos Phi_b)."""
    ph = phase_state(osc, p, t).total
    s = osc.consts.c / SQRT3
    return _planes(-s * np.sin(ph), -s * np.cos(ph))


def acceleration(osc, p, t):
    """Analytic d2q/dt2 (equal to -omega^2 q)."""
    ph = phase_state(osc, p, t).total
    k = osc.amplitude * osc.omega ** 2
    return _planes(-k * np.cos(ph), -k * np.sin(ph))


def circle_residual(planes, q0):
    """q+^2 + q-^2 - q0^2 for each PlaneVector, stacked on axis 0."""
    return np.stack([v.norm2() - q0 ** 2 for v in planes])


def orbit_residual(osc, p, t):
    """Circle residual of the position on every plane."""
    return circle_residual(position(osc, p, t), osc.amplitude)


def scaled_coords(osc, p, t):
    """X_b = q+_b / q0 and Y_b = q-_b / q0 (energy scaled away)."""
    ph = phase_state(osc, p, t).total
    return np.cos(ph), np.sin(ph)


@dataclass(frozen=True)
class MonopolePlane:
    coeffs: np.ndarray
    degenerate: bool


DEGENERATE_TOL = 1e-12


def monopole_plane_coeffs(gamma):
    """Normal (sin(g3-g2), sin(g1-g3), sin(g2-g1)) of the plane holding X (and Y)."""
    g1, g2, g3 = (float(v) for v in gamma)
    return np.array([np.sin(g3 - g2), np.sin(g1 - g3), np.sin(g2 - g1)])


def monopole_plane(gamma):
    """Plane normal plus a flag for the all-sines-vanish case, where every X satisfies the relation."""
    n = monopole_plane_coeffs(gamma)
    return MonopolePlane(n, bool(np.max(np.abs(n)) <= DEGENERATE_TOL))


def monopole_plane_residual(gamma, coords):
    """coeffs . X for X (or Y) stacked on axis 0."""
    n = monopole_plane_coeffs(gamma)
    return np.tensordot(n, np.asarray(coords), axes=1)


def ellipse_residuals(pair, gamma_pair):
    """X_a^2 + X_b^2 - 2 X_a X_b cos(g_a - g_b) - sin^2(g_a - g_b)."""
    xa, xb = (np.asarray(v) for v in pair)
    d = float(gamma_pair[0]) - float(gamma_pair[1])
    return xa ** 2 + xb ** 2 - 2.0 * xa * xb * np.cos(d) - np.sin(d) ** 2


ELLIPSE_PAIRS = ((1, 2), (1, 3), (2, 3))


def all_ellipse_residuals(osc, p, t):
    """The three X projections followed by the three Y projections."""
    X, Y = scaled_coords(osc, p, t)
    g = osc.gamma
    out = []
    for coords in (X, Y):
        for a, b in ELLIPSE_PAIRS:
            out.append(ellipse_residuals((coords[a - 1], coords[b - 1]), (g[a - 1], g[b - 1])))
    return np.stack(out)


def plane_speeds(vel):
    return np.stack([v.norm() for v in vel])


def phase_gradient(osc, p, h=None):
    """Spatial gradient of phi/2 (that of alpha)."""
    return osc.alpha.grad(p, h)

