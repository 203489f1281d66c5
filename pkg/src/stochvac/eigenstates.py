"""Analytically continued eigenfunctions and grid/stencil utilities.

A :class:`ContinuedEigenstate` is a product over axes of an entire function
of z_a times exp(-i E t / hbar). Its modulus and phase over (x, y) supply the
occurrence-frequency field n_c and the phase field phi/2 of an assembly
state: value = n_c exp(-i phi/2).
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from . import numdiff
from .errors import ConfigError, DomainError, NodalRegionError, RangeError
from .geometry6 import NATURAL, Constants, E6Point, Field

NODAL_EPS = 1e-10
MAX_HERMITE = 12


def hermite(n, u):
    """Physicists' H_n(u) and H_{n-1}(u) by the three-term recurrence.

    H_{-1} is returned as 0. Works for complex ``u``.
    """
    u = np.asarray(u)
    prev = np.zeros_like(u, dtype=complex)
    cur = np.ones_like(u, dtype=complex)
    for k in range(n):
        prev, cur = cur, 2.0 * u * cur - 2.0 * k * prev
    return cur, prev


@dataclass(frozen=True)
class ContinuedEigenstate:
    """Separable continued eigenstate.

    ``family`` is "ho" (quantum numbers in ``quantum``, angular frequency
    ``omega``) or "free" (wavevector in ``quantum``).
    """

    family: str
    quantum: Tuple
    energy: float
    omega: float = 1.0
    consts: Constants = NATURAL

    # per-axis factor f_a(z_a) with first and second derivatives
    def _factors(self, z):
        z = np.asarray(z, dtype=complex)
        fs, d1, d2 = [], [], []
        if self.family == "ho":
            s = np.sqrt(self.consts.m0 * self.omega / self.consts.hbar)
            for a in range(3):
                n = self.quantum[a]
                u = s * z[a]
                g = np.exp(-u * u / 2.0)
                hn, hm = hermite(n, u)
                f = hn * g
                fs.append(f)
                d1.append(s * (2.0 * n * hm - u * hn) * g)
                d2.append(s * s * (u * u - (2 * n + 1)) * f)
        else:
            for a in range(3):
                k = self.quantum[a]
                f = np.exp(1j * k * z[a])
                fs.append(f)
                d1.append(1j * k * f)
                d2.append(-k * k * f)
        return np.stack(fs), np.stack(d1), np.stack(d2)

    def spatial(self, z):
        f, _, _ = self._factors(z)
        return np.prod(f, axis=0)

    def _product_with(self, z, which):
        f, d1, d2 = self._factors(z)
        d = d1 if which == 1 else d2
        out = []
        for a in range(3):
            parts = [d[b] if b == a else f[b] for b in range(3)]
            out.append(parts[0] * parts[1] * parts[2])
        return np.stack(out)

    def spatial_dz(self, z):
        """d f / d z_a for each axis, stacked on axis 0."""
        return self._product_with(z, 1)

    def spatial_d2z(self, z):
        return self._product_with(z, 2)

    def log_derivs(self, z):
        """g_a = d ln f / d z_a and dg_a / dz_a per axis."""
        f, d1, d2 = self._factors(z)
        g = d1 / f
        return g, d2 / f - g * g

    def time_factor(self, t):
        return np.exp(-1j * self.energy * np.asarray(t, dtype=float) / self.consts.hbar)

    def value(self, p, t):
        return self.spatial(p.z) * self.time_factor(t)

    def dz(self, p, t):
        return self.spatial_dz(p.z) * self.time_factor(t)

    def d2z(self, p, t):
        return self.spatial_d2z(p.z) * self.time_factor(t)

    def dt(self, p, t):
        return -1j * self.energy / self.consts.hbar * self.value(p, t)

    def modulus_field(self):
        """n_c(x, y) = |f(z)|, with analytic gradient and diagonal Hessian."""

        def func(p):
            return np.abs(self.spatial(p.z))

        def grad(p):
            n = func(p)
            g, _ = self.log_derivs(p.z)
            return n * g.real, -n * g.imag

        def hess(p):
            n = func(p)
            g, dg = self.log_derivs(p.z)
            lx, ly = g.real, -g.imag
            return n * (lx * lx + dg.real), n * (ly * ly - dg.real)

        return Field(func, grad, hess, name=f"|{self.label}|")

    def phase_field(self):
        """alpha(x, y) = -arg f(z), so that f = n_c exp(-i alpha)."""

        def func(p):
            return -np.angle(self.spatial(p.z))

        def grad(p):
            g, _ = self.log_derivs(p.z)
            return -g.imag, -g.real

        def hess(p):
            _, dg = self.log_derivs(p.z)
            return -dg.imag, dg.imag

        return Field(func, grad, hess, periodic=True, name=f"arg {self.label}")

    @property
    def label(self):
        if self.family == "ho":
            return "ho" + "".join(str(n) for n in self.quantum)
        return "free(" + ",".join(f"{k:g}" for k in self.quantum) + ")"


def ho_state(nvec, omega=1.0, consts=NATURAL, rest_energy=0.0):
    """Continued harmonic-oscillator state prod_a H_n(s z_a) exp(-s^2 z_a^2 / 2), s = sqrt(m0 omega / hbar)."""
    nvec = tuple(int(n) for n in nvec)
    if len(nvec) != 3 or any(n < 0 for n in nvec):
        raise DomainError(f"quantum numbers must be three nonnegative integers, got {nvec}")
    if max(nvec) > MAX_HERMITE:
        raise DomainError(f"quantum numbers above {MAX_HERMITE} are not supported")
    if not omega > 0:
        raise DomainError("omega must be positive")
    energy = consts.hbar * omega * (sum(nvec) + 1.5) + rest_energy
    return ContinuedEigenstate("ho", nvec, energy, float(omega), consts)


def free_state(kvec, consts=NATURAL, rest_energy=0.0):
    """Plane wave exp(i k.z - i E t / hbar) with E = hbar^2 |k|^2 / 2 m0."""
    k = tuple(float(v) for v in kvec)
    if len(k) != 3 or not all(np.isfinite(k)):
        raise DomainError(f"wavevector must be a finite real 3-vector, got {kvec}")
    energy = consts.hbar ** 2 * sum(v * v for v in k) / (2.0 * consts.m0) + rest_energy
    return ContinuedEigenstate("free", k, energy, 1.0, consts)


@dataclass(frozen=True)
class Superposition:
    """Psi(z, t) = sum_k w_k psi_k(z, t) for real weights w_k."""

    terms: Tuple[Tuple[float, ContinuedEigenstate], ...]

    def _sum(self, attr, p, t):
        return sum(w * getattr(s, attr)(p, t) for w, s in self.terms)

    def value(self, p, t):
        return self._sum("value", p, t)

    def dz(self, p, t):
        return self._sum("dz", p, t)

    def d2z(self, p, t):
        return self._sum("d2z", p, t)

    def dt(self, p, t):
        return self._sum("dt", p, t)


def decompose(state, p, t, eps=NODAL_EPS):
    """Split a state value into (n_c, phi/2) with value = n_c exp(-i phi/2).

    phi/2 is the principal branch; use :func:`unwrap_phase` along grid rows
    for a continuous phase.
    """
    v = np.asarray(state.value(p, t))
    mod = np.abs(v)
    if np.any(mod <= eps):
        raise NodalRegionError(f"|value| <= {eps:g} at {int(np.sum(mod <= eps))} point(s)")
    return mod, -np.angle(v)


def unwrap_phase(phase, axis=-1):
    """Remove 2 pi jumps along ``axis`` (a numerical convention only)."""
    return np.unwrap(phase, axis=axis)


def harmonic_residual(field, plane, p, h=None):
    """d2f/dx_a^2 + d2f/dy_a^2; analytic when the field provides a Hessian and ``h`` is None."""
    hx, hy = field.hess_diag(p, h)
    return hx[plane - 1] + hy[plane - 1]


def mixed_second(field, plane, p, h=numdiff.SECOND_STEP, grid=None):
    """d2f / dx_a dy_a by the four-corner central stencil.

    Passing ``grid`` enforces that the whole stencil lies inside the grid box.
    """
    if grid is not None:
        grid.require_inside(p, plane, h)
    return numdiff.mixed(field, p, numdiff.x_axis(plane), numdiff.y_axis(plane), h)


def d2_dz2(state, plane, p, t):
    return state.d2z(p, t)[plane - 1]


AXIS_NAMES = ("x1", "x2", "x3", "y1", "y2", "y3")
MIN_COUNT = 5


@dataclass(frozen=True)
class GridAxis:
    name: str
    lo: float
    hi: float
    count: int

    @property
    def index(self):
        return AXIS_NAMES.index(self.name)

    @property
    def step(self):
        return (self.hi - self.lo) / (self.count - 1)

    def samples(self):
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class FieldGrid:
    """Uniform sub-grid over chosen six-space axes; the rest sit at ``base``."""

    axes: Tuple[GridAxis, ...]
    base: Tuple[float, ...] = (0.0,) * 6

    def __post_init__(self):
        names = [a.name for a in self.axes]
        if not names:
            raise ConfigError("grid.axes", "at least one active axis is required")
        for a in self.axes:
            if a.name not in AXIS_NAMES:
                raise ConfigError("grid.axes", f"unknown axis {a.name!r}")
            if a.count < MIN_COUNT:
                raise ConfigError("grid.count", f"axis {a.name} has {a.count} points, need >= {MIN_COUNT}")
            if not a.hi > a.lo:
                raise ConfigError("grid.axes", f"axis {a.name} needs hi > lo")
        if len(set(names)) != len(names):
            raise ConfigError("grid.axes", "duplicate axis names")
        if len(self.base) != 6:
            raise ConfigError("grid.base", "base point needs six coordinates")

    @classmethod
    def square(cls, names=("x1", "y1"), lo=-3.0, hi=3.0, count=41, base=(0.0,) * 6):
        return cls(tuple(GridAxis(n, lo, hi, count) for n in names), tuple(base))

    @property
    def shape(self):
        return tuple(a.count for a in self.axes)

    @property
    def h(self):
        return min(a.step for a in self.axes)

    def axis(self, name):
        for a in self.axes:
            if a.name == name:
                return a
        return None

    def _coords(self, trim):
        axes = [a.samples()[trim:len(a.samples()) - trim] for a in self.axes]
        mesh = np.meshgrid(*axes, indexing="ij")
        shape = mesh[0].shape
        c = np.empty((6,) + shape)
        for i in range(6):
            c[i] = self.base[i]
        for a, m in zip(self.axes, mesh):
            c[a.index] = m
        return c

    def points(self):
        return E6Point.from_coords(self._coords(0))

    def interior_points(self):
        return E6Point.from_coords(self._coords(1))

    def refined(self):
        """Same box with every spacing halved."""
        return FieldGrid(tuple(GridAxis(a.name, a.lo, a.hi, 2 * a.count - 1) for a in self.axes), self.base)

    def with_count(self, count):
        return FieldGrid(tuple(GridAxis(a.name, a.lo, a.hi, count) for a in self.axes), self.base)

    def sample(self, func):
        return np.asarray(func(self.points()))

    def require_inside(self, p, plane, h):
        for name in (f"x{plane}", f"y{plane}"):
            a = self.axis(name)
            if a is None:
                continue
            c = p.coords()[a.index]
            if np.any(c - h < a.lo - 1e-12) or np.any(c + h > a.hi + 1e-12):
                raise RangeError(f"stencil at {name} +/- {h:g} leaves the grid [{a.lo}, {a.hi}]")

    def mixed_second_samples(self, values, plane):
        """Four-corner stencil over stored samples, on the interior of the (x_a, y_a) sheet."""
        ax, ay = self.axis(f"x{plane}"), self.axis(f"y{plane}")
        if ax is None or ay is None:
            raise RangeError(f"plane {plane} is not spanned by the grid's active axes")
        i = [a.name for a in self.axes].index(ax.name)
        j = [a.name for a in self.axes].index(ay.name)
        v = np.asarray(values)

        def sl(ai, aj):
            idx = [slice(None)] * v.ndim
            idx[i] = slice(1 + ai, v.shape[i] - 1 + ai)
            idx[j] = slice(1 + aj, v.shape[j] - 1 + aj)
            return v[tuple(idx)]

        return (sl(1, 1) - sl(1, -1) - sl(-1, 1) + sl(-1, -1)) / (4.0 * ax.step * ay.step)


def states_from_spec(specs: Sequence, consts=NATURAL, omega=1.0):
    """Build eigenstates from (family, numbers) pairs as used by scenario configs."""
    out = []
    for fam, q in specs:
        if fam == "ho":
            out.append(ho_state(q, omega, consts))
        elif fam == "free":
            out.append(free_state(q, consts))
        else:
            raise ConfigError("states.family", f"unknown family {fam!r}")
    return out
