import numpy as np
import pytest

from conftest import random_points
from stochvac import assembly as asm
from stochvac import eigenstates as es
from stochvac import fields, numdiff
from stochvac.errors import DomainError, NodalRegionError
from stochvac.geometry6 import NATURAL, E6Point, Field

K = NATURAL
HARM = fields.harmonic_potential(1.0)
TIMES = [0.0, 0.37, 1.0]
SUPER_BASE = (0.0, 0.37, 0.0, 0.0, 0.23, 0.0)


def ho(*terms):
    return asm.Assembly.from_eigenstates([(w, es.ho_state(n)) for w, n in terms])


def pt(x, y):
    return E6Point(np.asarray(x, float), np.asarray(y, float))


def const_rho(value):
    return Field(lambda p: np.full(p.batch_shape, float(value)),
                 lambda p: (np.zeros((3,) + p.batch_shape), np.zeros((3,) + p.batch_shape)))


def test_magnetization_examples():
    p = pt([0.1, 0, 0], [0, 0, 0])
    assert fields.magnetization(const_rho(0.0), 1, p, K).c == 0
    assert fields.magnetization(const_rho(1.0), 2, p, K).c == pytest.approx(1 / 6)
    assert fields.magnetization(const_rho(2.0), 2, p, K).c == pytest.approx(2 / 6)
    assert fields.b_induction(const_rho(1.0), 3, p, K).c == pytest.approx(1 / 6)
    with pytest.raises(DomainError):
        fields.magnetization(const_rho(-1.0), 1, p, K)


def test_constant_density_has_no_current_or_flow(rng):
    p = random_points(rng, 10)
    j = fields.current_density(const_rho(2.0), 1, p, K)
    assert np.all(j.a == 0) and np.all(j.b == 0)
    vf = fields.velocity_fields(const_rho(2.0), p, K)
    assert np.all(vf.centroid == 0)


def test_ho_ground_velocity_and_current_at_unit_x():
    A = ho((1.0, (0, 0, 0)))
    rf = fields.rho0_field(A, 0.0)
    p = pt([1.0, 0, 0], [0, 0, 0])
    vf = fields.velocity_fields(rf, p, K)
    b = vf.beta_bar[0]
    assert (b.a, b.b) == pytest.approx((0.0, -1.0), abs=1e-14)
    j = fields.current_density(rf, 1, p, K)
    rho = np.sqrt(2 / 3) * np.exp(-1.0)
    assert (j.a, j.b) == pytest.approx((0.0, rho / np.sqrt(6)), abs=1e-14)


def test_current_two_routes_random(rng):
    A = ho((1.0, (0, 0, 0)), (0.7, (1, 0, 0)), (0.4, (0, 0, 2)))
    rf = fields.rho0_field(A, 0.3)
    p = random_points(rng, 100, 1.0)
    for plane in (1, 2, 3):
        j1 = fields.current_density(rf, plane, p, K)
        j2 = fields.current_closed_form(rf, plane, p, K)
        assert np.allclose(j1.a, j2.a, rtol=1e-10, atol=1e-12)
        assert np.allclose(j1.b, j2.b, rtol=1e-10, atol=1e-12)
        jf = fields.current_density(rf, plane, p, K, h=1e-5)
        assert np.allclose(jf.a, j2.a, rtol=1e-6, atol=1e-8)


def test_velocity_decomposition(rng):
    A = ho((1.0, (0, 0, 0)), (1.0, (0, 1, 0)))
    p = random_points(rng, 30, 1.0)
    vf = fields.velocity_fields(fields.rho0_field(A, 0.5), p, K)
    for b, u, v in zip(vf.beta_bar, vf.u, vf.v):
        d = (u - v) - b
        assert np.all(d.a == 0) and np.all(d.b == 0)


def test_velocity_fields_nodal():
    A = ho((1.0, (1, 0, 0)))
    with pytest.raises(NodalRegionError):
        fields.velocity_fields(fields.rho0_field(A, 0.0), pt([0, 0, 0], [0, 0, 0]), K)


def test_rho0_gradient_and_mixed_identity(rng):
    A = ho((1.0, (0, 0, 0)), (1.0, (1, 0, 0)), (1.0, (0, 1, 0)))
    p = random_points(rng, 40, 1.0)
    t = 0.37
    rf = fields.rho0_field(A, t)
    ax, ay = rf.grad(p)
    fx, fy = rf.grad(p, h=1e-5)
    assert np.allclose(ax, fx, rtol=1e-7, atol=1e-8)
    mix = fields.rho0_mixed_analytic(A.source, p, t)
    assert np.allclose(mix, fields.rho0_mixed_via_z(A.source, p, t), rtol=1e-12, atol=1e-12)
    for a in range(3):
        fd = numdiff.mixed(rf, p, a, a + 3, 1e-3)
        assert np.allclose(mix[a], fd, rtol=1e-5, atol=1e-4)


def test_ho_ground_identity_exact(rng):
    # for rho0 = exp(sum(y^2 - x^2)) the mixed derivative is -4 x y rho0
    A = ho((1.0, (0, 0, 0)))
    p = random_points(rng, 50, 2.0)
    mix = fields.rho0_mixed_analytic(A.source, p, 0.0)
    r0 = asm.rho0(A, p, 0.0)
    assert np.allclose(mix, -4 * p.x * p.y * r0, rtol=1e-10)


def test_ho_ground_diffusion_terms(rng):
    A = ho((1.0, (0, 0, 0)))
    p = random_points(rng, 50, 2.0)
    rho = np.sqrt(2 / 3) * asm.rho0(A, p, 0.2)
    xy = np.sum(p.x * p.y, axis=0)
    assert np.allclose(K.nu * fields.mixed_term(A, p, 0.2), -2 * xy * rho, rtol=1e-10, atol=1e-12)
    assert np.allclose(fields.gamma_source(A, HARM, p, 0.2), 2 * xy * rho, rtol=1e-10, atol=1e-12)
    assert np.max(np.abs(fields.drho0_dt(A, p, 0.2))) < 1e-12 * np.max(rho)


def test_diffusion_ho_ground_analytic():
    g = es.FieldGrid.square()
    rep = fields.diffusion_residual(ho((1.0, (0, 0, 0))), HARM, g, TIMES, tol=1e-10)
    assert rep.passed and rep.max_abs <= 1e-10


def test_diffusion_stationary_excited_state():
    g = es.FieldGrid.square(count=21, lo=-2, hi=2, base=(0, 0.1, 0, 0, 0.2, 0))
    A = ho((1.0, (2, 1, 0)))
    rep = fields.diffusion_residual(A, HARM, g, TIMES, tol=1e-8)
    assert rep.passed


def test_diffusion_wrong_nu_control():
    A = ho((1.0, (0, 0, 0)))
    p = es.FieldGrid.square(count=11, lo=-1, hi=1).interior_points()
    r = fields.diffusion_pointwise(A, HARM, p, 0.0, nu=2 * K.nu)
    assert np.allclose(r, -K.nu * fields.mixed_term(A, p, 0.0), atol=1e-12)
    assert np.max(np.abs(r)) > 0.1


def test_free_single_wave_continuity():
    A = asm.Assembly.from_eigenstates([(1.0, es.free_state((0.8, -0.3, 0.0)))])
    g = es.FieldGrid.square(count=21)
    rep = fields.continuity_residual(A, fields.FREE, g, TIMES, "fd", tol=1e-8)
    assert rep.max_abs < 1e-8
    rep = fields.diffusion_residual(A, fields.FREE, g, TIMES, tol=1e-12)
    assert rep.passed


def test_superposition_fd_second_order():
    g = es.FieldGrid.square(base=SUPER_BASE)
    A = ho((1.0, (0, 0, 0)), (1.0, (1, 0, 0)), (1.0, (0, 1, 0)))
    d = fields.diffusion_residual(A, HARM, g, TIMES, "fd", None)
    c = fields.continuity_residual(A, HARM, g, TIMES, "fd", None)
    assert d.order_ok and c.order_ok
    assert d.ratio == pytest.approx(4.0, abs=0.5)
    a = fields.diffusion_residual(A, HARM, g, TIMES, "analytic", 1e-8)
    assert a.passed


def test_two_state_continuity_fd_converges():
    g = es.FieldGrid.square(count=41, base=(0, 0.3, 0, 0, 0.2, 0))
    A = ho((1.0, (0, 0, 0)), (1.0, (1, 0, 0)))
    rep = fields.continuity_residual(A, HARM, g, TIMES, "fd", None)
    assert rep.order_ok
    an = fields.continuity_residual(A, HARM, g, TIMES, "analytic", 1e-8)
    assert an.passed


def test_threads_do_not_change_results():
    g = es.FieldGrid.square(count=21, base=SUPER_BASE)
    A = ho((1.0, (0, 0, 0)), (1.0, (1, 0, 0)))
    a = fields.diffusion_residual(A, HARM, g, TIMES, "fd", None, threads=1)
    b = fields.diffusion_residual(A, HARM, g, TIMES, "fd", None, threads=3)
    assert a == b


def test_potential_reconstruction(rng):
    p = random_points(rng, 60, 1.0)
    ground = ho((1.0, (0, 0, 0)))
    rec = fields.potential_reconstruct(ground.source, p, 0.4, K)
    assert np.allclose(rec.V - rec.offset, np.sum(p.z ** 2, axis=0) / 2, atol=1e-12)
    pb = p.with_y_zero()
    recb = fields.potential_reconstruct(ground.source, pb, 0.4, K)
    assert np.allclose(recb.V1_shifted, np.sum(pb.x ** 2, axis=0) / 2, atol=1e-12)
    assert np.max(np.abs(recb.V2)) < 1e-12
    sup = ho((1.0, (0, 0, 0)), (1.0, (1, 0, 0)))
    rs = fields.potential_reconstruct(sup.source, p, 0.4, K)
    assert np.allclose(rs.V - rs.offset, rec.V - rec.offset, atol=1e-10)
    free = asm.Assembly.from_eigenstates([(1.0, es.free_state((1.0, 0.5, 0)))])
    rf = fields.potential_reconstruct(free.source, p, 0.4, K)
    assert np.max(np.abs(rf.V)) < 1e-12
    fd = fields.potential_reconstruct(ground.source, p, 0.4, K, h=1e-3)
    assert np.allclose(fd.V, rec.V, atol=1e-5)


def test_v2_from_psi_matches_potential(rng):
    p = random_points(rng, 30, 1.0)
    A = ho((1.0, (0, 0, 0)), (0.5, (0, 2, 0)))
    v2 = fields.v2_from_psi(A.source, p, 0.1, K)
    assert np.allclose(v2, HARM.V2(p), atol=1e-10)


def test_potential_cauchy_riemann(rng):
    p = random_points(rng, 50)
    assert np.max(np.abs(HARM.cr_residual(p))) < 1e-14
    assert np.max(np.abs(HARM.cr_residual(p, h=1e-4))) < 1e-8
    with pytest.raises(DomainError):
        fields.PotentialField("box")


def test_schrodinger_eigen_and_superposition():
    g = es.FieldGrid.square(count=21)
    for A in (ho((1.0, (0, 0, 0))), ho((1.0, (0, 0, 0)), (2.0, (1, 1, 0)), (-1.0, (0, 0, 3)))):
        r = fields.schrodinger_residual(A.source, HARM, g, TIMES, K, tol=1e-10)
        assert r.continued.passed and r.boundary.passed
        assert r.v2_boundary_max == 0


class Perturbed:
    """Psi (1 + 0.01 x1), which is not holomorphic and not a solution."""

    def __init__(self, src):
        self.src = src

    def value(self, p, t):
        return self.src.value(p, t) * (1 + 0.01 * p.x[0])

    def dt(self, p, t):
        return self.src.dt(p, t) * (1 + 0.01 * p.x[0])

    def d2z(self, p, t):
        f = lambda q: self.value(q, t)  # noqa: E731
        return np.stack([numdiff.second(f, p, a, 1e-3) for a in range(3)])


def test_schrodinger_negative_control():
    g = es.FieldGrid.square(count=21)
    r = fields.schrodinger_residual(Perturbed(ho((1.0, (0, 0, 0))).source), HARM, g, TIMES, K, tol=1e-8)
    assert not r.continued.passed
    assert r.continued.max_abs > 1e-4


def test_make_report_handles_nan_and_order():
    r = fields.make_report("x", np.array([1.0, np.nan, 2.0]), 3.0)
    assert r.n_points == 2 and r.passed
    o = fields.make_report("o", np.array([4.0]), None, 0.1, np.array([1.0]))
    assert o.order_ok and o.ratio == 4.0
    bad = fields.make_report("o", np.array([4.0]), None, 0.1, np.array([2.0]))
    assert not bad.passed
    four = fields.make_report("o", np.array([16.0]), None, 0.1, np.array([1.0]), order=4)
    assert four.passed and four.ratio_target == 16.0
    with pytest.raises(DomainError):
        fields.make_report("e", np.array([np.nan]), 1.0)
    assert set(r.to_dict()) >= {"name", "max_abs", "l2", "passed"}
