import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_points
from stochvac.errors import DomainError, NumericError
from stochvac.geometry6 import (
    NATURAL, Constants, E6Point, Field, KVector, PlaneVector, e6_speed, special_curl, wedge,
)

finite = st.floats(-50, 50, allow_nan=False)


def test_natural_constants():
    k = NATURAL
    assert k.l0 == 0.5
    assert 2 * k.m0 * k.c * k.l0 == k.hbar
    assert k.nu == k.c * k.l0 == 0.5


def test_constants_reject_inconsistent_l0():
    with pytest.raises(DomainError):
        Constants(l0=1.0)
    with pytest.raises(DomainError):
        Constants(hbar=-1.0)
    k = Constants(hbar=2.0, m0=1.0, c=2.0)
    assert k.l0 == pytest.approx(0.5)


def test_point_validation_and_z():
    p = E6Point(np.array([1.0, 2.0, 3.0]), np.array([-1.0, 0.5, 0.0]))
    assert np.array_equal(p.z, np.array([1 - 1j, 2 + 0.5j, 3 + 0j]))
    with pytest.raises(DomainError):
        E6Point(np.array([np.nan, 0, 0]), np.zeros(3))
    with pytest.raises(DomainError):
        E6Point(np.zeros(2), np.zeros(2))


@given(st.lists(finite, min_size=6, max_size=6))
def test_from_z_roundtrip(vals):
    z = np.array(vals[:3]) + 1j * np.array(vals[3:])
    p = E6Point.from_z(z)
    assert np.array_equal(p.z, z)
    assert np.array_equal(E6Point.from_coords(p.coords()).z, z)


@given(finite, finite)
def test_plane_vector_norm(a, b):
    v = PlaneVector(2, a, b)
    assert v.norm2() == pytest.approx(a * a + b * b)


def test_kvector_magnitude_keeps_unit_basis():
    assert KVector(3, -2.5).magnitude() == 2.5


def test_wedge_examples():
    e1, e1p = PlaneVector(1, 1.0, 0.0), PlaneVector(1, 0.0, 1.0)
    assert wedge(e1, e1p).c == 1.0
    assert wedge(e1p, e1).c == -1.0
    assert wedge(e1, e1).c == 0.0
    assert wedge(PlaneVector(2, 2.0, 0.0), PlaneVector(2, 0.0, 3.0)).c == 6.0
    with pytest.raises(DomainError):
        wedge(e1, PlaneVector(2, 0.0, 1.0))


@given(finite, finite, finite, finite)
def test_wedge_antisymmetric(a, b, c, d):
    u, v = PlaneVector(1, a, b), PlaneVector(1, c, d)
    assert wedge(u, v).c == -wedge(v, u).c


def test_special_curl_examples():
    p = E6Point(np.array([2.0, 0.0, 0.0]), np.array([3.0, 0.0, 0.0]))
    cy = special_curl(lambda q: q.y[0], 1, p)
    assert (cy.a, cy.b) == pytest.approx((1.0, 0.0), abs=1e-10)
    cx = special_curl(lambda q: q.x[0], 1, p)
    assert (cx.a, cx.b) == pytest.approx((0.0, -1.0), abs=1e-10)
    cxy = special_curl(lambda q: q.x[0] * q.y[0], 1, p)
    assert (cxy.a, cxy.b) == pytest.approx((2.0, -3.0), abs=1e-8)
    f = Field(lambda q: q.x[0] * q.y[0],
              lambda q: (np.stack([q.y[0], 0 * q.y[0], 0 * q.y[0]]), np.stack([q.x[0], 0 * q.x[0], 0 * q.x[0]])))
    ca = special_curl(f, 1, p)
    assert (ca.a, ca.b) == (2.0, -3.0)


def test_special_curl_nonfinite():
    p = E6Point(np.zeros(3), np.zeros(3))
    with pytest.raises(NumericError):
        special_curl(lambda q: np.where(q.x[0] > 0, np.inf, 0.0), 1, p)


def test_e6_speed_examples():
    s = 1 / np.sqrt(3)
    assert e6_speed([PlaneVector(k, s, 0.0) for k in (1, 2, 3)]) == pytest.approx(1.0, abs=1e-15)
    assert e6_speed([PlaneVector(k, 0.0, 0.0) for k in (1, 2, 3)]) == 0.0
    assert e6_speed([PlaneVector(1, 3.0, 4.0), PlaneVector(2, 0.0, 0.0), PlaneVector(3, 0.0, 0.0)]) == 5.0
    with pytest.raises(DomainError):
        e6_speed([PlaneVector(1, 1.0, 0.0)])


def test_field_fd_gradient_matches_analytic(rng):
    p = random_points(rng, 20)
    f = Field(lambda q: np.sum(q.x * q.y, axis=0), lambda q: (q.y, q.x))
    gx, gy = f.grad(p, h=1e-4)
    ax, ay = f.grad(p)
    assert np.max(np.abs(gx - ax)) < 1e-8 and np.max(np.abs(gy - ay)) < 1e-8
