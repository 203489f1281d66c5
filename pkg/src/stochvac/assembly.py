"""Statistical assemblies of oscillators.

An assembly is a list of energy states, each with a constant weight N_j and
an occurrence-frequency field n_cj(x, y), so n_j = N_j n_cj. From it come
the wavefunction Psi = sum_j n_j exp(-i phi_j/2), the bilinear density
rho0 = Psi* Psi, the linear and quadratic probabilities, and Monte Carlo
estimators of both.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from . import angular
from .errors import DomainError, NodalRegionError, UndefinedDistributionError
from .eigenstates import Superposition
from .geometry6 import NATURAL, Constants, Field, constant_field
from .oscillator import Oscillator

SQRT3 = np.sqrt(3.0)
NODAL_EPS = 1e-10


@dataclass(frozen=True)
class AssemblyState:
    oscillator: Oscillator
    weight: float
    modulus: Field = field(default_factory=lambda: constant_field(1.0))


@dataclass(frozen=True)
class Assembly:
    """Energy states sharing one gamma triple.

    ``source`` is the holomorphic superposition the states were built from,
    when there is one; field checks that need d2 Psi / dz2 require it.
    """

    states: Tuple[AssemblyState, ...]
    source: Optional[object] = None
    consts: Constants = NATURAL

    def __post_init__(self):
        if len(self.states) == 0:
            raise DomainError("an assembly needs at least one state")
        g0 = self.states[0].oscillator.gamma
        for s in self.states:
            if s.weight < 0 or not np.isfinite(s.weight):
                raise DomainError(f"state weights must be nonnegative, got {s.weight!r}")
            if s.oscillator.gamma != g0:
                raise DomainError("all oscillators in an assembly must share the same gamma")
        object.__setattr__(self, "states", tuple(self.states))

    @classmethod
    def from_eigenstates(cls, terms, gamma=(0.0, 0.0, 0.0), consts=None):
        """Assembly whose Psi is sum_k w_k psi_k(z, t).

        A negative weight is stored as |w| with pi added to the state's phase.
        """
        terms = tuple((float(w), s) for w, s in terms)
        consts = consts or terms[0][1].consts
        states = []
        for w, st in terms:
            alpha = st.phase_field()
            if w < 0:
                alpha = alpha + np.pi
            osc = Oscillator(st.energy, tuple(gamma), alpha, st.label, consts)
            states.append(AssemblyState(osc, abs(w), st.modulus_field()))
        return cls(tuple(states), Superposition(terms), consts)

    @classmethod
    def from_constants(cls, energies, occupations, alphas=None, gamma=(0.0, 0.0, 0.0), consts=NATURAL):
        """Spatially uniform assembly: n_c = 1, constant phase offsets ``alphas``."""
        alphas = np.zeros(len(energies)) if alphas is None else alphas
        states = []
        for j, (e, n, a) in enumerate(zip(energies, occupations, alphas)):
            osc = Oscillator(float(e), tuple(gamma), constant_field(float(a)), f"E{j}", consts)
            states.append(AssemblyState(osc, float(n)))
        return cls(tuple(states), None, consts)

    def __len__(self):
        return len(self.states)

    def occupations(self, p):
        return np.stack([s.weight * s.modulus(p) for s in self.states])

    def total(self, p):
        return np.sum(self.occupations(p), axis=0)

    def half_phases(self, p, t):
        return np.stack([s.oscillator.half_phase(p, t) for s in self.states])

    def omegas(self):
        return np.array([s.oscillator.omega for s in self.states])

    def unit_amplitudes(self, p, t):
        """exp(phi_j / 2i) per state."""
        return np.exp(-1j * self.half_phases(p, t))

    def psi_gradient(self, p, t):
        """(d Psi / dx_a, d Psi / dy_a) from the analytic partials of n_c and phi/2."""
        gx = 0.0
        gy = 0.0
        for s in self.states:
            n = s.weight * s.modulus(p)
            nx, ny = s.modulus.grad(p)
            ax, ay = s.oscillator.alpha.grad(p)
            u = np.exp(-1j * s.oscillator.half_phase(p, t))
            gx = gx + (s.weight * nx - 1j * n * ax) * u
            gy = gy + (s.weight * ny - 1j * n * ay) * u
        return gx, gy

    def dpsi_dt(self, p, t):
        n = self.occupations(p)
        om = self.omegas().reshape((-1,) + (1,) * (n.ndim - 1))
        return np.sum(-1j * om * n * self.unit_amplitudes(p, t), axis=0)


def psi(assembly, p, t):
    """Psi = sum_i N_i n_ci exp(phi_i / 2i)."""
    return np.sum(assembly.occupations(p) * assembly.unit_amplitudes(p, t), axis=0)


def psi_star(assembly, p, t):
    """Same sum with the exponent conjugated."""
    return np.sum(assembly.occupations(p) * np.exp(1j * assembly.half_phases(p, t)), axis=0)


def rho0(assembly, p, t):
    """Psi* Psi (real and nonnegative)."""
    return (psi_star(assembly, p, t) * psi(assembly, p, t)).real


def rho0_double_sum(assembly, p, t, plane=1):
    """rho0 recovered from the pairwise wedge angular momenta: a_plane / (-1/3)."""
    return -3.0 * angular.assembly_angular_momentum(assembly, plane, p, t).coeff


def _require_distribution(assembly, p):
    n = assembly.occupations(p)
    tot = np.sum(n, axis=0)
    if np.any(tot <= 0):
        raise UndefinedDistributionError("total occupation N(p) is zero")
    return n, tot


def probabilities(assembly, p):
    """Linear P_j = n_j / N and quadratic P_ij = n_i n_j / N^2."""
    n, tot = _require_distribution(assembly, p)
    P = n / tot
    return P, np.einsum("i...,j...->ij...", P, P)


def expect_linear(assembly, p, t):
    """E_L over the unit amplitudes; N E_L reproduces Psi."""
    P, _ = probabilities(assembly, p)
    return np.sum(P * assembly.unit_amplitudes(p, t), axis=0)


def pair_k_projection(assembly, p, t):
    """a_ij . k / hbar for all pairs, k = sum_b k_b / sqrt 3, from the wedge route."""
    mats = [angular.pair_matrix(assembly, plane, p, t) for plane in (1, 2, 3)]
    return angular.k_projection(mats)


def expect_quadratic(assembly, p, t, plane=None):
    """E_Q of a_ij . k / hbar under P_ij.

    With ``plane`` given, the expectation of that plane's coefficient alone.
    """
    _, Pij = probabilities(assembly, p)
    if plane is None:
        a = pair_k_projection(assembly, p, t)
    else:
        a = angular.pair_matrix(assembly, plane, p, t)
    return np.sum(Pij * a, axis=(0, 1))


def rho0_quadratic_route(assembly, p, t):
    """rho0 = -sqrt(3) N_f E_Q[a . k / hbar] with N_f = N(p)^2."""
    tot = assembly.total(p)
    return -SQRT3 * tot ** 2 * expect_quadratic(assembly, p, t)


def make_rng(seed):
    """PCG64 stream from an integer seed (or pass a Generator through)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn_rngs(seed, count):
    """``count`` independent child streams of one seed."""
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(count)]


@dataclass(frozen=True)
class MonteCarloEstimate:
    psi: complex
    psi_se: float
    rho0: float
    rho0_se: float
    draws: int


def _se(samples):
    m = samples.shape[0]
    if m < 2:
        return float("nan")
    dev = samples - samples.mean()
    return float(np.sqrt(np.sum(np.abs(dev) ** 2) / (m - 1) / m))


def sample_assembly(assembly, p, t, draws, seed=None):
    """Monte Carlo estimates of Psi and rho0 at a single point.

    Psi-hat = N mean(exp(phi_i / 2i)) with i ~ P_j; rho0-hat =
    -sqrt(3) N_f mean(a_ij . k / hbar) with (i, j) ~ P_j x P_j drawn
    independently. Standard errors use the sample variance (complex
    modulus for Psi); they are NaN for a single draw.
    """
    if draws < 1:
        raise DomainError("need at least one draw")
    if p.batch_shape != ():
        raise DomainError("sample_assembly works at a single point")
    rng = make_rng(seed)
    P, _ = probabilities(assembly, p)
    P = np.asarray(P, dtype=float)
    P = P / P.sum()
    tot = float(assembly.total(p))
    u = np.asarray(assembly.unit_amplitudes(p, t))
    a = np.asarray(pair_k_projection(assembly, p, t))
    idx = rng.choice(len(P), size=draws, p=P)
    i2 = rng.choice(len(P), size=draws, p=P)
    j2 = rng.choice(len(P), size=draws, p=P)
    ps = tot * u[idx]
    rs = -SQRT3 * tot ** 2 * a[i2, j2]
    return MonteCarloEstimate(complex(ps.mean()), _se(ps), float(rs.mean()), _se(rs), int(draws))


@dataclass(frozen=True)
class ComplexFluidPotential:
    """w = 2 nu (phi/2 + i ln n_c) and its Cauchy-Riemann residual.

    ``residual`` has shape (2, 3, *batch): (d(phi/2)/dx - d ln n/dy,
    d(phi/2)/dy + d ln n/dx) per plane.
    """

    w: np.ndarray
    residual: np.ndarray

    def max_residual(self):
        return float(np.max(np.abs(self.residual)))


def fluid_potential(assembly, i, p, t=0.0, h=None, eps=NODAL_EPS):
    """Eigen complex fluid potential of state ``i``.

    With ``h`` None the analytic partials are used. Otherwise the phase and
    the frequency field n_c are differenced centrally with step ``h`` and
    d ln n_c = (d n_c) / n_c.
    """
    st = assembly.states[i]
    n = st.modulus(p)
    if np.any(n <= eps):
        raise NodalRegionError(f"n_c <= {eps:g}: point lies in a nodal region")
    half = st.oscillator.half_phase(p, t)
    w = 2.0 * assembly.consts.nu * (half + 1j * np.log(n))
    px, py = st.oscillator.alpha.grad(p, h)
    nx, ny = st.modulus.grad(p, h)
    lx, ly = nx / n, ny / n
    return ComplexFluidPotential(w, np.stack([px - ly, py + lx]))


def random_assembly(rng, max_states=6, max_occupation=5, gamma=(0.0, 0.0, 0.0), consts=NATURAL):
    """Uniform assembly with random integer occupations, energies and phase offsets (test helper)."""
    k = int(rng.integers(1, max_states + 1))
    occ = rng.integers(1, max_occupation + 1, size=k)
    energies = rng.uniform(0.5, 5.0, size=k)
    alphas = rng.uniform(-np.pi, np.pi, size=k)
    return Assembly.from_constants(energies, occ, alphas, gamma, consts)
