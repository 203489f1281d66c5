"""Relative angular momenta of dipole pairs and the spin split.

Coefficients on k_a are expressed in units of hbar throughout.
"""

from dataclasses import dataclass

import numpy as np

from . import oscillator as osc_mod
from .errors import DomainError
from .geometry6 import wedge

SQRT2 = np.sqrt(2.0)
SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True)
class AngularMomentum:
    plane: int
    coeff: np.ndarray  # on k_plane, units of hbar


def relative_angular_momentum(osc_i, osc_j, plane, p, t):
    """(M_j q+_j - M_i q-_i) ^ (beta+_j - beta-_i) on one continuation plane.

    The + parts are the e_plane components and the - parts the e_plane'
    components of the oscillators' positions and velocities.
    """
    if plane not in (1, 2, 3):
        raise DomainError(f"plane index must be 1, 2 or 3, got {plane!r}")
    k = plane - 1
    qi = osc_mod.position(osc_i, p, t)[k]
    qj = osc_mod.position(osc_j, p, t)[k]
    bi = osc_mod.velocity(osc_i, p, t)[k]
    bj = osc_mod.velocity(osc_j, p, t)[k]
    lever = qj.primary() * osc_j.mass - qi.secondary() * osc_i.mass
    rate = bj.primary() - bi.secondary()
    kv = wedge(lever, rate)
    return AngularMomentum(plane, kv.c / osc_j.consts.hbar)


def closed_form_a(phi_i, phi_j):
    """-(1/3) cos((phi_i - phi_j)/2) in units of hbar; phi are full phases."""
    return -np.cos((np.asarray(phi_i) - np.asarray(phi_j)) / 2.0) / 3.0


def pair_matrix(assembly, plane, p, t):
    """a_ij on ``plane`` for every ordered state pair via the wedge route, shape (n, n, *batch)."""
    oscs = [s.oscillator for s in assembly.states]
    return np.stack([
        np.stack([np.asarray(relative_angular_momentum(oi, oj, plane, p, t).coeff) for oj in oscs])
        for oi in oscs
    ])


def assembly_angular_momentum(assembly, plane, p, t):
    """sum_ij n_i n_j a_ij on one plane, from the pairwise wedges."""
    n = assembly.occupations(p)
    a = pair_matrix(assembly, plane, p, t)
    total = np.einsum("i...,j...,ij...->...", n, n, a)
    return AngularMomentum(plane, total)


def n0_from_rho0(rho0):
    """Number of half-hbar units, sqrt(2/3) rho0."""
    return np.sqrt(2.0 / 3.0) * np.asarray(rho0)


@dataclass(frozen=True)
class SpinSplit:
    """a = plus_coeff * k+ + minus_coeff * k- in units of hbar."""

    chi: float
    plus_coeff: np.ndarray
    minus_coeff: np.ndarray
    N0: np.ndarray

    def magnitude(self):
        return np.sqrt(self.plus_coeff ** 2 + self.minus_coeff ** 2)


SPECIAL_CHI = (np.pi / 4, 3 * np.pi / 4, 5 * np.pi / 4, 7 * np.pi / 4)


def spin_decompose(chi=np.pi / 4, N0=1.0):
    """Split -(1/sqrt 2)(cos chi k+ - sin chi k-) N0 into its two labelled axes."""
    N0 = np.asarray(N0, dtype=float)
    if np.any(N0 < 0):
        raise DomainError("N0 must be nonnegative")
    return SpinSplit(float(chi), -np.cos(chi) * N0 / SQRT2, np.sin(chi) * N0 / SQRT2, N0)


def k_projection(plane_coeffs):
    """Component along k = sum_b k_b / sqrt 3 of per-plane coefficients stacked on axis 0."""
    return np.sum(np.asarray(plane_coeffs), axis=0) / SQRT3
