"""Central finite-difference stencils over six-dimensional points.

All stencils are second order. A point is anything with a
``shifted(axis, delta)`` method; axes 0-2 are x1..x3 and 3-5 are y1..y3.
Points may carry batch dimensions, in which case every sample is shifted
together and the stencils vectorise.
"""

import numpy as np

FIRST_STEP = 1e-4
SECOND_STEP = 1e-3


def x_axis(plane):
    return plane - 1


def y_axis(plane):
    return plane + 2


def _wrap(d):
    # differences of an angle, folded into (-pi, pi]
    return np.angle(np.exp(1j * d))


def first(f, p, axis, h=FIRST_STEP, periodic=False):
    """d f / d(axis) by (f(p+h) - f(p-h)) / 2h."""
    d = np.asarray(f(p.shifted(axis, h))) - np.asarray(f(p.shifted(axis, -h)))
    if periodic:
        d = _wrap(d)
    return d / (2.0 * h)


def second(f, p, axis, h=SECOND_STEP, periodic=False):
    f0 = np.asarray(f(p))
    up = np.asarray(f(p.shifted(axis, h))) - f0
    dn = np.asarray(f(p.shifted(axis, -h))) - f0
    if periodic:
        up, dn = _wrap(up), _wrap(dn)
    return (up + dn) / (h * h)


def mixed(f, p, axis_a, axis_b, h=SECOND_STEP):
    """d2 f / d(axis_a) d(axis_b) by the four-corner stencil."""
    pp = p.shifted(axis_a, h).shifted(axis_b, h)
    pm = p.shifted(axis_a, h).shifted(axis_b, -h)
    mp = p.shifted(axis_a, -h).shifted(axis_b, h)
    mm = p.shifted(axis_a, -h).shifted(axis_b, -h)
    return (np.asarray(f(pp)) - np.asarray(f(pm)) - np.asarray(f(mp)) + np.asarray(f(mm))) / (4.0 * h * h)


def gradient(f, p, h=FIRST_STEP, periodic=False):
    """Return (d/dx, d/dy), each stacked over the three planes on axis 0."""
    gx = np.stack([first(f, p, a, h, periodic) for a in range(3)])
    gy = np.stack([first(f, p, a + 3, h, periodic) for a in range(3)])
    return gx, gy


def richardson_ratio(err_h, err_h2):
    """max|e(h)| / max|e(h/2)|; about 4 for a second-order scheme."""
    num = float(np.max(np.abs(err_h)))
    den = float(np.max(np.abs(err_h2)))
    if den == 0.0:
        return float("inf") if num > 0.0 else float("nan")
    return num / den
