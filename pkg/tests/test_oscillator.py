import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_points
from stochvac import oscillator as osc
from stochvac.errors import DomainError
from stochvac.geometry6 import E6Point, PlaneVector, constant_field, e6_speed

ORIGIN = E6Point(np.zeros(3), np.zeros(3))
S3 = 1 / np.sqrt(3)

energies = st.floats(0.05, 20.0)
angles = st.floats(-10.0, 10.0)
times = st.floats(-20.0, 20.0)


def coeffs(planes):
    return np.array([[v.a, v.b] for v in planes])


def test_invariants_of_a_state():
    o = osc.Oscillator(2.5)
    assert o.omega == 2.5
    assert o.amplitude == pytest.approx(1 / (np.sqrt(3) * 2.5))
    assert o.mass_moment == pytest.approx(2 * 0.5 / np.sqrt(3))
    with pytest.raises(DomainError):
        osc.Oscillator(0.0)
    with pytest.raises(DomainError):
        osc.Oscillator(-1.0)


def test_half_phase_rate():
    o = osc.Oscillator(1.7, alpha=constant_field(0.4))
    d = (o.half_phase(ORIGIN, 1.0 + 1e-3) - o.half_phase(ORIGIN, 1.0 - 1e-3)) / 2e-3
    assert d == pytest.approx(1.7, abs=1e-10)


def test_position_examples():
    o = osc.Oscillator(1.0)
    assert np.allclose(coeffs(osc.position(o, ORIGIN, 0.0)), [[S3, 0]] * 3, atol=1e-15)
    assert np.allclose(coeffs(osc.position(o, ORIGIN, np.pi / 2)), [[0, S3]] * 3, atol=1e-15)
    assert np.allclose(coeffs(osc.position(o, ORIGIN, np.pi)), [[-S3, 0]] * 3, atol=1e-15)
    o2 = osc.Oscillator(2.0)
    # omega doubles too; compare at the same total phase
    assert np.allclose(coeffs(osc.position(o2, ORIGIN, 0.0)), 0.5 * coeffs(osc.position(o, ORIGIN, 0.0)))


def test_position_bar_examples():
    o = osc.Oscillator(1.0)
    assert np.allclose(coeffs(osc.position_bar(o, ORIGIN, 0.0)), coeffs(osc.position(o, ORIGIN, 0.0)))
    assert np.allclose(coeffs(osc.position_bar(o, ORIGIN, np.pi / 2)), [[0, -S3]] * 3, atol=1e-15)


@given(energies, angles, angles, angles, times)
def test_position_bar_is_conjugate(e, g1, g2, g3, t):
    o = osc.Oscillator(e, (g1, g2, g3))
    q, qb = coeffs(osc.position(o, ORIGIN, t)), coeffs(osc.position_bar(o, ORIGIN, t))
    assert np.array_equal(qb[:, 0], q[:, 0]) and np.array_equal(qb[:, 1], -q[:, 1])


def test_velocity_at_zero_phase():
    o = osc.Oscillator(1.0)
    assert np.allclose(coeffs(osc.velocity(o, ORIGIN, 0.0)), [[0, S3]] * 3, atol=1e-15)


@given(energies, angles, angles, angles, times)
def test_speeds(e, g1, g2, g3, t):
    o = osc.Oscillator(e, (g1, g2, g3))
    for vel in (osc.velocity(o, ORIGIN, t), osc.velocity_bar(o, ORIGIN, t)):
        assert np.allclose(osc.plane_speeds(vel), S3, atol=1e-12)
        assert abs(e6_speed(vel) - 1.0) < 1e-12


@given(energies, angles, angles, angles, times)
def test_velocity_is_time_derivative(e, g1, g2, g3, t):
    o = osc.Oscillator(e, (g1, g2, g3))
    dt = 1e-5
    fd = (coeffs(osc.position(o, ORIGIN, t + dt)) - coeffs(osc.position(o, ORIGIN, t - dt))) / (2 * dt)
    assert np.allclose(fd, coeffs(osc.velocity(o, ORIGIN, t)), atol=1e-6 * max(1.0, e))


@settings(max_examples=50)
@given(energies, times)
def test_acceleration_is_shm(e, t):
    o = osc.Oscillator(e, (0.3, 1.1, 2.0))
    a = coeffs(osc.acceleration(o, ORIGIN, t))
    q = coeffs(osc.position(o, ORIGIN, t))
    assert np.allclose(a, -o.omega ** 2 * q, atol=1e-12)


def test_orbit_residual_random(rng):
    p = random_points(rng, 500)
    for e in (0.3, 1.0, 7.0):
        o = osc.Oscillator(e, (0.3, 1.1, 2.0), constant_field(0.2))
        assert np.max(np.abs(osc.orbit_residual(o, p, 0.71))) < 1e-12


def test_orbit_residual_perturbation():
    o = osc.Oscillator(1.0)
    q = osc.position(o, ORIGIN, 0.0)
    eps = 1e-3
    moved = [PlaneVector(v.plane, v.a + eps, v.b) for v in q]
    r = osc.circle_residual(moved, o.amplitude)
    assert np.allclose(r, 2 * eps * q[0].a + eps ** 2, rtol=1e-9)


def test_nesting():
    a, b = osc.Oscillator(1.0), osc.Oscillator(2.0)
    assert a.amplitude > b.amplitude


def test_monopole_plane_examples():
    assert np.allclose(osc.monopole_plane_coeffs((0, 0, 0)), 0)
    assert osc.monopole_plane((0, 0, 0)).degenerate
    assert np.allclose(osc.monopole_plane_coeffs((0, np.pi / 2, 0)), (-1, 0, 1))
    assert np.allclose(osc.monopole_plane_coeffs((0, 2 * np.pi, 0)), 0, atol=1e-15)
    o = osc.Oscillator(1.0, (0, np.pi / 2, 0))
    X, Y = osc.scaled_coords(o, ORIGIN, 0.4)
    assert X[0] == pytest.approx(X[2])
    assert abs(osc.monopole_plane_residual(o.gamma, X)) < 1e-15


@given(angles, angles, angles, times, energies)
def test_monopole_plane_on_orbit(g1, g2, g3, t, e):
    o = osc.Oscillator(e, (g1, g2, g3))
    X, Y = osc.scaled_coords(o, ORIGIN, t)
    assert abs(osc.monopole_plane_residual(o.gamma, X)) < 1e-10
    assert abs(osc.monopole_plane_residual(o.gamma, Y)) < 1e-10


def test_ellipse_special_cases():
    u = np.linspace(0, 2 * np.pi, 17)
    xa, xb = np.cos(u), np.cos(u - np.pi / 2)
    r = osc.ellipse_residuals((xa, xb), (np.pi / 2, 0.0))
    assert np.allclose(r, xa ** 2 + xb ** 2 - 1)
    assert np.max(np.abs(r)) < 1e-15
    r0 = osc.ellipse_residuals((xa, xa + 0.1), (0.7, 0.7))
    assert np.allclose(r0, 0.01)


def test_ellipse_sweep(rng):
    p = random_points(rng, 1000, 5.0)
    o = osc.Oscillator(1.3, (0.3, 1.1, 2.0), constant_field(0.0))
    ts = rng.uniform(-10, 10, 1000)
    r = osc.all_ellipse_residuals(o, p, ts)
    assert r.shape == (6, 1000)
    assert np.max(np.abs(r)) < 1e-12


def test_phase_gradient_of_constant_alpha_is_zero(rng):
    p = random_points(rng, 5)
    gx, gy = osc.phase_gradient(osc.Oscillator(1.0), p)
    assert np.all(gx == 0) and np.all(gy == 0)
