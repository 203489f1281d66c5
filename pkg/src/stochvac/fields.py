"""Assembly-induced fields and the diffusion / Schrodinger residual chain.

The density is rho = sqrt(2/3) rho0 / v0. From the log-gradients of rho0
come the relative velocity field beta-bar = u - v and the centroid
(u + v) / 2, whose flux divergence turns flow continuity into the mixed
derivative diffusion

    d rho / dt = nu sum_a d2 rho / dx_a dy_a + rho V2 / (m0 c l0).

Residual checks run over the interior of a :class:`FieldGrid`. Time
derivatives are always analytic (phases are linear in t); spatial ones are
analytic or central differences.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from . import assembly as asm
from . import numdiff
from .errors import DomainError, NodalRegionError
from .geometry6 import E6Point, Field, KVector, PlaneVector, special_curl

SQRT6 = np.sqrt(6.0)
NODAL_EPS = 1e-10
ORDER_TARGET = 4.0
ORDER_WINDOW = 0.5


def density_scale(consts):
    """rho / rho0."""
    return np.sqrt(2.0 / 3.0) / consts.v0


# --- potentials -----------------------------------------------------------


@dataclass(frozen=True)
class PotentialField:
    """Regular external potential V(z) = V1 + i V2.

    ``kind`` is "harmonic" (m0 omega^2 sum z_a^2 / 2) or "free" (zero).
    """

    kind: str
    omega: float = 1.0
    m0: float = 1.0

    def __post_init__(self):
        if self.kind not in ("harmonic", "free"):
            raise DomainError(f"unknown potential kind {self.kind!r}")

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "free":
            return np.zeros(z.shape[1:], dtype=complex)
        return 0.5 * self.m0 * self.omega ** 2 * np.sum(z * z, axis=0)

    def dz(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "free":
            return np.zeros_like(z)
        return self.m0 * self.omega ** 2 * z

    def V1(self, p):
        return self.value(p.z).real

    def V2(self, p):
        return self.value(p.z).imag

    def cr_residual(self, p, h=None):
        """(dV1/dx - dV2/dy, dV1/dy + dV2/dx) per plane, shape (2, 3, *batch)."""
        if h is None:
            d = self.dz(p.z)
            v1x, v1y = d.real, -d.imag
            v2x, v2y = d.imag, d.real
        else:
            v1x, v1y = numdiff.gradient(self.V1, p, h)
            v2x, v2y = numdiff.gradient(self.V2, p, h)
        return np.stack([v1x - v2y, v1y + v2x])


def harmonic_potential(omega=1.0, consts=None):
    return PotentialField("harmonic", float(omega), consts.m0 if consts else 1.0)


FREE = PotentialField("free")


# --- density fields -------------------------------------------------------


def rho0_field(assembly, t):
    """rho0(x, y) at fixed t, with the analytic gradient 2 Re(conj(Psi) dPsi)."""

    def func(p):
        return asm.rho0(assembly, p, t)

    def grad(p):
        ps = asm.psi(assembly, p, t)
        gx, gy = assembly.psi_gradient(p, t)
        return 2.0 * (np.conj(ps) * gx).real, 2.0 * (np.conj(ps) * gy).real

    return Field(func, grad, name="rho0")


def drho0_dt(assembly, p, t):
    return 2.0 * (np.conj(asm.psi(assembly, p, t)) * assembly.dpsi_dt(p, t)).real


def rho0_mixed_analytic(psi_field, p, t):
    """d2 rho0 / dx_a dy_a = i(d2/dz2 - d2/dzbar2) rho0 = -2 Im(conj(Psi) Psi'') per plane."""
    ps = psi_field.value(p, t)
    return -2.0 * (np.conj(ps) * psi_field.d2z(p, t)).imag


def rho0_mixed_via_z(psi_field, p, t):
    """The same quantity written as i (Psi'' conj(Psi) - Psi conj(Psi''))."""
    ps = psi_field.value(p, t)
    d2 = psi_field.d2z(p, t)
    return (1j * (d2 * np.conj(ps) - ps * np.conj(d2))).real


def _require_positive(rho0, eps=NODAL_EPS):
    if np.any(rho0 <= eps):
        raise NodalRegionError(f"rho0 <= {eps:g}: log-gradients undefined")


# --- magnetisation, currents, velocities ----------------------------------


def magnetization(rho0_field, plane, p, consts):
    """Magnetic moment density (|e| c l0 / 3) rho0 / v0 on k_plane."""
    r = rho0_field(p)
    if np.any(r < 0):
        raise DomainError("rho0 must be nonnegative")
    return KVector(plane, consts.e_charge * consts.c * consts.l0 / 3.0 * r / consts.v0)


def b_induction(rho0_field, plane, p, consts):
    g = magnetization(rho0_field, plane, p, consts)
    return KVector(plane, consts.mu0 * g.c)


def _b_coefficient_field(rho0_field, consts):
    k = consts.mu0 * consts.e_charge * consts.c * consts.l0 / (3.0 * consts.v0)

    def grad(p):
        gx, gy = rho0_field.grad(p)
        return k * gx, k * gy

    return Field(lambda p: k * rho0_field(p), grad if rho0_field.grad_func else None)


def current_density(rho0_field, plane, p, consts, h=None):
    """J = (1/mu0) curl(B0 k_plane) through the special curl."""
    _require_positive(rho0_field(p))
    curl = special_curl(_b_coefficient_field(rho0_field, consts), plane, p, h)
    return curl * (1.0 / consts.mu0)


def current_closed_form(rho0_field, plane, p, consts):
    """J = -(|e| / sqrt 6) rho beta-bar."""
    r0 = rho0_field(p)
    vf = velocity_fields(rho0_field, p, consts)
    rho = density_scale(consts) * r0
    return vf.beta_bar[plane - 1] * (-consts.e_charge / SQRT6 * rho)


@dataclass(frozen=True)
class VelocityFields:
    """beta-bar = u - v per plane; u is pure e_a, v pure e_a'.

    ``centroid`` is (u + v)/2 as six components (x1..x3 then y1..y3).
    """

    beta_bar: Tuple[PlaneVector, ...]
    u: Tuple[PlaneVector, ...]
    v: Tuple[PlaneVector, ...]
    centroid: np.ndarray


def velocity_fields(rho0_field, p, consts, h=None):
    r0 = rho0_field(p)
    _require_positive(r0)
    gx, gy = rho0_field.grad(p, h)
    lx, ly = gx / r0, gy / r0
    cl = consts.c * consts.l0
    zero = np.zeros_like(r0)
    u = tuple(PlaneVector(a + 1, -cl * ly[a], zero) for a in range(3))
    v = tuple(PlaneVector(a + 1, zero, -cl * lx[a]) for a in range(3))
    bb = tuple(ua - va for ua, va in zip(u, v))
    centroid = np.concatenate([np.stack([0.5 * w.a for w in u]), np.stack([0.5 * w.b for w in v])])
    return VelocityFields(bb, u, v, centroid)


def centroid_flux(assembly, p, t, eps=NODAL_EPS):
    """rho beta^(c), six components; NaN where rho0 <= eps."""
    rf = rho0_field(assembly, t)
    r0 = rf(p)
    ok = r0 > eps
    safe = Field(lambda q: np.where(ok, rf(q), 1.0), lambda q: tuple(np.where(ok, g, 0.0) for g in rf.grad(q)))
    vf = velocity_fields(safe, p, assembly.consts)
    return np.where(ok, density_scale(assembly.consts) * r0 * vf.centroid, np.nan)


def centroid_divergence(assembly, p, t, h):
    """Six-dimensional divergence of rho beta^(c) by central differences of the flux."""
    total = 0.0
    for axis in range(6):
        total = total + numdiff.first(lambda q, ax=axis: centroid_flux(assembly, q, t)[ax], p, axis, h)
    return total


# --- residual reports -----------------------------------------------------


@dataclass(frozen=True)
class ResidualReport:
    """Residual summary over a point set.

    With finite differences, ``max_abs`` is at step ``h`` and ``ratio`` is
    max|R(h)| / max|R(h/2)| on the same points; ``order_ok`` tests it
    against ``ratio_target`` = 2^order, within 0.5 for order 2 (the window
    scales with the target).
    """

    name: str
    max_abs: float
    l2: float
    n_points: int
    tol: Optional[float]
    h: Optional[float] = None
    max_abs_half: Optional[float] = None
    ratio: Optional[float] = None
    order_ok: Optional[bool] = None
    passed: bool = False
    ratio_target: Optional[float] = None

    def to_dict(self):
        return asdict(self)


def make_report(name, resid, tol, h=None, resid_half=None, require_order=True, order=2):
    """Summarise residual samples; NaN entries (excluded points) are dropped.

    ``tol`` None means only the convergence order decides the pass flag.
    """
    r = np.abs(np.asarray(resid)).ravel()
    r = r[np.isfinite(r)]
    if r.size == 0:
        raise DomainError(f"{name}: no admissible points to evaluate")
    mx = float(np.max(r))
    l2 = float(np.sqrt(np.mean(r ** 2)))
    within = True if tol is None else bool(mx <= tol)
    tol = None if tol is None else float(tol)
    if resid_half is None:
        return ResidualReport(name, mx, l2, int(r.size), tol, h, passed=within)
    rh = np.abs(np.asarray(resid_half)).ravel()
    rh = rh[np.isfinite(rh)]
    ratio = numdiff.richardson_ratio(r, rh)
    target = 2.0 ** order
    ok = bool(abs(ratio - target) <= ORDER_WINDOW * target / ORDER_TARGET)
    passed = within and (ok or not require_order)
    return ResidualReport(name, mx, l2, int(r.size), tol, float(h), float(np.max(rh)), float(ratio), ok, passed,
                          target)


def _times(t):
    return [float(v) for v in np.atleast_1d(t)]


def _over_times(fn, times, threads=1):
    if threads and threads > 1 and len(times) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(fn, times))
    else:
        parts = [fn(t) for t in times]
    return np.concatenate([np.ravel(q) for q in parts])


def gamma_source(assembly, potential, p, t):
    """Gamma = rho V2 / (m0 c l0); the feedback term is zero."""
    k = assembly.consts
    rho = density_scale(k) * asm.rho0(assembly, p, t)
    return rho * potential.V2(p) / (k.m0 * k.c * k.l0)


def mixed_term(assembly, p, t, method="analytic", h=None):
    """sum_a d2 rho / dx_a dy_a."""
    scale = density_scale(assembly.consts)
    if method == "analytic":
        if assembly.source is None:
            raise DomainError("analytic mixed derivatives need a holomorphic source superposition")
        return scale * np.sum(rho0_mixed_analytic(assembly.source, p, t), axis=0)
    f = lambda q: scale * asm.rho0(assembly, q, t)  # noqa: E731
    return sum(numdiff.mixed(f, p, a, a + 3, h) for a in range(3))


def diffusion_pointwise(assembly, potential, p, t, method="analytic", h=None, nu=None):
    """d rho/dt - nu sum d2 rho/dx dy - Gamma at each point."""
    k = assembly.consts
    nu = k.nu if nu is None else nu
    drho = density_scale(k) * drho0_dt(assembly, p, t)
    return drho - nu * mixed_term(assembly, p, t, method, h) - gamma_source(assembly, potential, p, t)


def diffusion_residual(assembly, potential, grid, t, method="analytic", tol=1e-8, h=None, nu=None,
                       threads=1, order=2):
    """Centrifugal diffusion residual over the grid interior, for each time in ``t``."""
    p = grid.interior_points()
    times = _times(t)
    if method == "analytic":
        R = _over_times(lambda s: diffusion_pointwise(assembly, potential, p, s, "analytic", nu=nu), times, threads)
        return make_report("diffusion", R, tol)
    h = grid.h if h is None else h
    R1 = _over_times(lambda s: diffusion_pointwise(assembly, potential, p, s, "fd", h, nu), times, threads)
    R2 = _over_times(lambda s: diffusion_pointwise(assembly, potential, p, s, "fd", h / 2, nu), times, threads)
    return make_report("diffusion_fd", R1, tol, h, R2, order=order)


def _admissible(assembly, p, t, eps):
    return asm.rho0(assembly, p, t) > eps


def continuity_pointwise(assembly, potential, p, t, method="fd", h=None, eps=NODAL_EPS):
    """d rho/dt + div(rho beta^(c)) - Gamma; NaN where rho0 <= eps."""
    k = assembly.consts
    drho = density_scale(k) * drho0_dt(assembly, p, t)
    mask = _admissible(assembly, p, t, eps)
    if method == "analytic":
        div = -k.nu * mixed_term(assembly, p, t, "analytic")
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            div = centroid_divergence(assembly, p, t, h)
    R = drho + div - gamma_source(assembly, potential, p, t)
    return np.where(mask, R, np.nan)


def continuity_residual(assembly, potential, grid, t, method="fd", tol=1e-8, h=None, eps=NODAL_EPS,
                        threads=1, order=2):
    p = grid.interior_points()
    times = _times(t)
    if method == "analytic":
        R = _over_times(lambda s: continuity_pointwise(assembly, potential, p, s, "analytic", eps=eps), times, threads)
        return make_report("continuity", R, tol)
    h = grid.h if h is None else h
    R1 = _over_times(lambda s: continuity_pointwise(assembly, potential, p, s, "fd", h, eps), times, threads)
    R2 = _over_times(lambda s: continuity_pointwise(assembly, potential, p, s, "fd", h / 2, eps), times, threads)
    return make_report("continuity_fd", R1, tol, h, R2, order=order)


# --- potential and Schrodinger residuals ----------------------------------


@dataclass(frozen=True)
class ReconstructedPotential:
    """V(z) recovered from Psi. ``offset`` is V1 at the origin (zero if the origin is nodal)."""

    V: np.ndarray
    offset: float

    @property
    def V1(self):
        return self.V.real

    @property
    def V2(self):
        return self.V.imag

    @property
    def V1_shifted(self):
        return self.V.real - self.offset


def _laplacian_z(psi_field, p, t, h=None):
    if h is None:
        return np.sum(psi_field.d2z(p, t), axis=0)
    # holomorphic in each z_a, so d2/dz_a^2 = d2/dx_a^2
    f = lambda q: psi_field.value(q, t)  # noqa: E731
    return sum(numdiff.second(f, p, a, h) for a in range(3))


def _v_of(psi_field, p, t, consts, eps, h=None):
    ps = psi_field.value(p, t)
    if np.any(np.abs(ps) <= eps):
        raise NodalRegionError("|Psi| <= eps at a reconstruction point")
    hb = consts.hbar
    return (hb / ps) * (1j * psi_field.dt(p, t) + hb / (2.0 * consts.m0) * _laplacian_z(psi_field, p, t, h))


def potential_reconstruct(psi_field, p, t, consts, eps=NODAL_EPS, h=None):
    """V = (hbar / Psi)(i dPsi/dt + (hbar / 2 m0) sum d2 Psi / dz_a^2)."""
    V = _v_of(psi_field, p, t, consts, eps, h)
    origin = E6Point(np.zeros(3), np.zeros(3))
    try:
        offset = float(_v_of(psi_field, origin, t, consts, eps, h).real)
    except NodalRegionError:
        offset = 0.0
    return ReconstructedPotential(V, offset)


def v2_from_psi(psi_field, p, t, consts, eps=NODAL_EPS):
    """2 Im((m0 nu / Psi)(i dPsi/dt + nu sum d2 Psi / dz2)) with nu = hbar / 2 m0."""
    ps = psi_field.value(p, t)
    if np.any(np.abs(ps) <= eps):
        raise NodalRegionError("|Psi| <= eps")
    nu = consts.nu
    return 2.0 * ((consts.m0 * nu / ps) * (1j * psi_field.dt(p, t) + nu * _laplacian_z(psi_field, p, t))).imag


def schrodinger_pointwise(psi_field, potential, p, t, consts, h=None):
    """i hbar dPsi/dt + (hbar^2 / 2 m0) sum d2 Psi/dz2 - V Psi (complex)."""
    hb = consts.hbar
    ps = psi_field.value(p, t)
    return 1j * hb * psi_field.dt(p, t) + hb * hb / (2.0 * consts.m0) * _laplacian_z(psi_field, p, t, h) \
        - potential.value(p.z) * ps


@dataclass(frozen=True)
class SchrodingerReports:
    continued: ResidualReport
    boundary: ResidualReport
    v2_boundary_max: float


def schrodinger_residual(psi_field, potential, grid, t, consts, method="analytic", tol=1e-8, h=None,
                         threads=1):
    """Continued equation on the grid interior and the ordinary one on its y = 0 shadow.

    On y = 0 the Laplacian in x replaces sum d2/dz2 and V1 replaces V.
    """
    p = grid.interior_points()
    pb = p.with_y_zero()
    times = _times(t)

    def boundary(q, s, step):
        hb = consts.hbar
        ps = psi_field.value(q, s)
        if step is None:
            lap = np.sum(psi_field.d2z(q, s), axis=0)
        else:
            f = lambda r: psi_field.value(r, s)  # noqa: E731
            lap = sum(numdiff.second(f, q, a, step) for a in range(3))
        return 1j * hb * psi_field.dt(q, s) + hb * hb / (2.0 * consts.m0) * lap - potential.V1(q) * ps

    v2b = float(np.max(np.abs(potential.V2(pb))))
    if method == "analytic":
        R = _over_times(lambda s: schrodinger_pointwise(psi_field, potential, p, s, consts), times, threads)
        cont = make_report("schrodinger", R, tol)
        bnd = make_report("schrodinger_boundary", _over_times(lambda s: boundary(pb, s, None), times, threads), tol)
        return SchrodingerReports(cont, bnd, v2b)
    h = grid.h if h is None else h
    c1 = _over_times(lambda s: schrodinger_pointwise(psi_field, potential, p, s, consts, h), times, threads)
    c2 = _over_times(lambda s: schrodinger_pointwise(psi_field, potential, p, s, consts, h / 2), times, threads)
    b1 = _over_times(lambda s: boundary(pb, s, h), times, threads)
    b2 = _over_times(lambda s: boundary(pb, s, h / 2), times, threads)
    return SchrodingerReports(make_report("schrodinger_fd", c1, tol, h, c2),
                              make_report("schrodinger_boundary_fd", b1, tol, h, b2), v2b)
