"""Points, plane vectors and the per-plane wedge algebra of the six-space.

The six-space is the pair (x, y) of real 3-vectors obtained by continuing
each coordinate x_a into z_a = x_a + i y_a. Each continuation plane a is
spanned by the orthonormal pair (e_a, e_a'); the wedge e_a ^ e_a' is the
unit k_a, which is only ever carried as a labelled coefficient.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import numdiff
from .errors import DomainError, NumericError

PLANES = (1, 2, 3)


def _check_plane(plane):
    if plane not in PLANES:
        raise DomainError(f"plane index must be 1, 2 or 3, got {plane!r}")


@dataclass(frozen=True)
class Constants:
    """Physical constants. Defaults are natural units hbar = m0 = c = 1.

    ``l0`` defaults to hbar / (2 m0 c), the only value for which the
    state-independent dipole energy 2 m0 c^2 l0 equals hbar c.
    """

    hbar: float = 1.0
    m0: float = 1.0
    c: float = 1.0
    l0: Optional[float] = None
    e_charge: float = 1.0
    mu0: float = 1.0
    v0: float = 1.0

    def __post_init__(self):
        if self.l0 is None:
            object.__setattr__(self, "l0", self.hbar / (2.0 * self.m0 * self.c))
        for name in ("hbar", "m0", "c", "l0", "e_charge", "mu0", "v0"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise DomainError(f"constant {name} must be a positive finite real, got {val!r}")
        if abs(2.0 * self.m0 * self.c * self.l0 - self.hbar) > 1e-12 * self.hbar:
            raise DomainError("constants must satisfy 2 m0 c l0 = hbar")

    @property
    def nu(self):
        """Centrifugal diffusion constant c * l0."""
        return self.c * self.l0

    def to_dict(self):
        return {k: getattr(self, k) for k in ("hbar", "m0", "c", "l0", "e_charge", "mu0", "v0")}


NATURAL = Constants()


@dataclass(frozen=True)
class E6Point:
    """A point (x, y) of the six-space, x in E3+ and y in E3-.

    ``x`` and ``y`` have shape (3, *batch); a batch of points is a single
    E6Point whose trailing dimensions index the samples.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape[:1] != (3,) or y.shape != x.shape:
            raise DomainError(f"x and y must both have shape (3, ...), got {x.shape} and {y.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("E6Point components must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_z(cls, z):
        z = np.asarray(z, dtype=complex)
        return cls(z.real, z.imag)

    @classmethod
    def from_coords(cls, coords):
        """Build from a (6, *batch) array ordered x1, x2, x3, y1, y2, y3."""
        coords = np.asarray(coords, dtype=float)
        return cls(coords[:3], coords[3:])

    @property
    def z(self):
        return self.x + 1j * self.y

    @property
    def batch_shape(self):
        return self.x.shape[1:]

    def coords(self):
        return np.concatenate([self.x, self.y])

    def shifted(self, axis, delta):
        c = self.coords().copy()
        c[axis] = c[axis] + delta
        return E6Point.from_coords(c)

    def with_y_zero(self):
        return E6Point(self.x, np.zeros_like(self.y))


@dataclass(frozen=True)
class PlaneVector:
    """a * e_plane + b * e_plane'."""

    plane: int
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        _check_plane(self.plane)

    def norm2(self):
        return np.asarray(self.a) ** 2 + np.asarray(self.b) ** 2

    def norm(self):
        return np.sqrt(self.norm2())

    def __add__(self, other):
        _same_plane(self, other)
        return PlaneVector(self.plane, self.a + other.a, self.b + other.b)

    def __sub__(self, other):
        _same_plane(self, other)
        return PlaneVector(self.plane, self.a - other.a, self.b - other.b)

    def __mul__(self, s):
        return PlaneVector(self.plane, self.a * s, self.b * s)

    __rmul__ = __mul__

    def __neg__(self):
        return PlaneVector(self.plane, -self.a, -self.b)

    def primary(self):
        """The e_plane part alone."""
        return PlaneVector(self.plane, self.a, np.zeros_like(np.asarray(self.b, dtype=float)))

    def secondary(self):
        """The e_plane' part alone."""
        return PlaneVector(self.plane, np.zeros_like(np.asarray(self.a, dtype=float)), self.b)


@dataclass(frozen=True)
class KVector:
    """c * k_plane. k_plane has unit length, so the magnitude is |c|."""

    plane: int
    c: np.ndarray

    def __post_init__(self):
        _check_plane(self.plane)

    def magnitude(self):
        return np.abs(self.c)


def _same_plane(u, v):
    if u.plane != v.plane:
        raise DomainError(f"vectors lie on different planes ({u.plane} and {v.plane})")


def wedge(u, v):
    """u ^ v for two vectors on the same continuation plane.

    With e ^ e' = k = -(e' ^ e) and e ^ e = 0 the product reduces to
    (u.a v.b - u.b v.a) k.
    """
    _same_plane(u, v)
    return KVector(u.plane, u.a * v.b - u.b * v.a)


@dataclass(frozen=True)
class Field:
    """A real scalar field over six-space points.

    ``grad_func`` returns (d/dx, d/dy), each shaped (3, *batch). Without it
    gradients fall back to central differences. ``periodic`` marks
    angle-valued fields whose differences are folded mod 2 pi.
    """

    func: Callable
    grad_func: Optional[Callable] = None
    hess_diag_func: Optional[Callable] = None
    periodic: bool = False
    name: str = field(default="", compare=False)

    def __call__(self, p):
        return np.asarray(self.func(p), dtype=float)

    def grad(self, p, h=None):
        if self.grad_func is not None and h is None:
            gx, gy = self.grad_func(p)
            return np.asarray(gx, dtype=float), np.asarray(gy, dtype=float)
        return numdiff.gradient(self, p, numdiff.FIRST_STEP if h is None else h, self.periodic)

    def hess_diag(self, p, h=None):
        """(d2/dx_a^2, d2/dy_a^2) stacked over planes."""
        if self.hess_diag_func is not None and h is None:
            return self.hess_diag_func(p)
        step = numdiff.SECOND_STEP if h is None else h
        hx = np.stack([numdiff.second(self, p, a, step, self.periodic) for a in range(3)])
        hy = np.stack([numdiff.second(self, p, a + 3, step, self.periodic) for a in range(3)])
        return hx, hy

    def __add__(self, other):
        if np.isscalar(other):
            g = self.grad_func
            return Field(lambda p: self(p) + other, g, self.hess_diag_func, self.periodic, self.name)
        return NotImplemented


def constant_field(value):
    def grad(p):
        z = np.zeros((3,) + p.batch_shape)
        return z, z

    def hess(p):
        z = np.zeros((3,) + p.batch_shape)
        return z, z

    return Field(lambda p: np.full(p.batch_shape, float(value)), grad, hess, name=f"const({value})")


def special_curl(chi, plane, p, h=None):
    """Curl on plane ``plane`` of chi * k_plane: (d chi/dy) e - (d chi/dx) e'.

    ``chi`` is a callable of the point; when it is a :class:`Field` with an
    analytic gradient and ``h`` is None, that gradient is used. Otherwise
    central differences with step ``h`` (default 1e-4).
    """
    _check_plane(plane)
    ix, iy = numdiff.x_axis(plane), numdiff.y_axis(plane)
    if isinstance(chi, Field) and chi.grad_func is not None and h is None:
        gx, gy = chi.grad(p)
        dchi_dx, dchi_dy = gx[plane - 1], gy[plane - 1]
    else:
        step = numdiff.FIRST_STEP if h is None else h
        dchi_dx = numdiff.first(chi, p, ix, step)
        dchi_dy = numdiff.first(chi, p, iy, step)
    if not (np.all(np.isfinite(dchi_dx)) and np.all(np.isfinite(dchi_dy))):
        raise NumericError("non-finite derivative in special_curl")
    return PlaneVector(plane, dchi_dy, -dchi_dx)


def e6_speed(plane_velocities: Sequence[PlaneVector]):
    """Euclidean norm over all six coefficients of one vector per plane."""
    planes = sorted(v.plane for v in plane_velocities)
    if planes != list(PLANES):
        raise DomainError(f"need exactly one vector per plane, got planes {planes}")
    return np.sqrt(sum(v.norm2() for v in plane_velocities))
