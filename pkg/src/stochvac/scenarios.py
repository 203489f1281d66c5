"""Named, reproducible verification scenarios and the fine-structure formula.

A scenario is a declarative JSON-compatible dict: the states of an
assembly, the external potential, a grid, time samples, tolerances, a seed
and the list of checks to run. :func:`run_scenario` executes the checks in
order and returns a :class:`ScenarioReport`.
"""

import copy
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from . import __version__
from . import angular, fields
from . import assembly as asm
from . import eigenstates as es
from . import oscillator as osc
from .errors import ConfigError, DomainError
from .geometry6 import Constants, E6Point, e6_speed

REFERENCE_ALPHA = 7.297351e-3


def fine_structure(N):
    """cos(pi / N) / N."""
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    return math.cos(math.pi / N) / N


DEFAULT_TOLERANCES = {
    "kinematic": 1e-12,
    "plane": 1e-10,
    "angular_self": 1e-14,
    "angular_pair": 1e-12,
    "three_route": 1e-10,
    "conjugacy": 1e-10,
    "current": 1e-10,
    "residual": 1e-8,
    "potential": 1e-8,
    "fine_structure_rel": 1e-6,
    "mc_sigma": 3.0,
    "mc_coverage": 0.95,
    "mc_se_window": 0.2,
}

DEFAULTS = {
    "description": "",
    "states": [],
    "gamma": [0.0, 0.0, 0.0],
    "chi": math.pi / 4,
    "potential": {"kind": "free"},
    "grid": {"axes": ["x1", "y1"], "lo": -3.0, "hi": 3.0, "count": 41, "base": [0.0] * 6},
    "times": [0.0, 0.37, 1.0],
    "units": "natural",
    "constants": {},
    "tolerances": {},
    "seed": 0,
    "checks": [],
    "montecarlo": {"draws": 10000, "runs": 100, "point": [0.0] * 6, "time": 0.37},
    "fine_structure_n": 137,
    "threads": 1,
    "fd_orders": {},
    "output": {"dir": "out", "format": "json"},
}


def _ho(n, w=1.0):
    return {"family": "ho", "n": list(n), "weight": w}


BUILTINS = {
    "ho-ground": {
        "description": "Continued harmonic-oscillator ground state in a harmonic potential.",
        "states": [_ho((0, 0, 0))],
        "potential": {"kind": "harmonic", "omega": 1.0},
        "checks": ["rho0_three_route", "probabilities", "linear_expectation", "conjugacy", "conjugacy_fd",
                   "velocity_identity", "current_two_route", "gamma_balance", "diffusion", "diffusion_fd",
                   "continuity_fd", "potential", "potential_cr", "schrodinger"],
    },
    "ho-superposition-3": {
        "description": "Equal-weight superposition of the (0,0,0), (1,0,0) and (0,1,0) oscillator states.",
        "states": [_ho((0, 0, 0)), _ho((1, 0, 0)), _ho((0, 1, 0))],
        "potential": {"kind": "harmonic", "omega": 1.0},
        "grid": {"axes": ["x1", "y1"], "lo": -3.0, "hi": 3.0, "count": 41, "base": [0.0, 0.37, 0.0, 0.0, 0.23, 0.0]},
        "checks": ["rho0_three_route", "probabilities", "linear_expectation", "conjugacy", "diffusion",
                   "diffusion_fd", "continuity_fd", "potential", "schrodinger"],
    },
    "free-wave-2": {
        "description": "Two continued plane waves with no external potential.",
        "states": [{"family": "free", "k": [1.0, 0.0, 0.0], "weight": 1.0},
                   {"family": "free", "k": [0.0, 0.5, 0.0], "weight": 1.0}],
        "potential": {"kind": "free"},
        "grid": {"axes": ["x1", "y1"], "lo": -3.0, "hi": 3.0, "count": 41, "base": [0.0, 0.21, 0.0, 0.0, 0.13, 0.0]},
        "checks": ["rho0_three_route", "probabilities", "conjugacy", "conjugacy_fd", "velocity_identity",
                   "current_two_route", "diffusion", "diffusion_fd", "continuity_fd", "potential",
                   "potential_cr", "schrodinger"],
        # every term of rho0 is (anti)holomorphic per plane, so the h^2 error of
        # the mixed stencil cancels and the scheme is fourth order here
        "fd_orders": {"diffusion_fd": 4, "continuity_fd": 4},
    },
    "orbit-kinematics": {
        "description": "Closed-form oscillator kinematics for generic phase constants.",
        "states": [{"family": "energy", "energy": e, "alpha": a, "weight": 1.0}
                   for e, a in ((0.5, 0.1), (1.0, -0.7), (2.0, 1.9), (3.7, 2.6))],
        "gamma": [0.3, 1.1, 2.0],
        "checks": ["orbit", "speed", "shm", "monopole_plane", "ellipse", "self_angular", "wedge_closed_form",
                   "mass_moment"],
    },
    "spin-split": {
        "description": "Spin decomposition of the total internal angular momentum at chi = pi/4.",
        "states": [_ho((0, 0, 0)), _ho((1, 0, 0), 0.5)],
        "potential": {"kind": "harmonic", "omega": 1.0},
        "grid": {"axes": ["x1", "y1"], "lo": -3.0, "hi": 3.0, "count": 41, "base": [0.0, 0.31, 0.0, 0.0, 0.17, 0.0]},
        "checks": ["spin_split", "rho0_three_route"],
    },
    "montecarlo-convergence": {
        "description": "Monte Carlo sampling of the linear and quadratic assemblies at one point.",
        "states": [{"family": "energy", "energy": e, "alpha": a, "weight": n}
                   for e, a, n in ((1.0, 0.0, 1.0), (2.0, 1.3, 2.0), (3.5, -2.1, 3.0))],
        "grid": {"axes": ["x1", "y1"], "lo": -1.0, "hi": 1.0, "count": 5, "base": [0.0] * 6},
        "seed": 20240601,
        "checks": ["probabilities", "linear_expectation", "rho0_three_route", "montecarlo"],
    },
    "fine-structure": {
        "description": "The closed-form fine-structure value cos(pi/N)/N at N = 137.",
        "checks": ["fine_structure"],
    },
}


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def builtin_names():
    return list(BUILTINS)


def resolve_config(raw):
    """Fill defaults. A raw dict may name a builtin in ``extends`` to start from it."""
    if not isinstance(raw, dict):
        raise ConfigError("config", "must be a JSON object")
    raw = dict(raw)
    base = DEFAULTS
    ext = raw.pop("extends", None)
    if ext is not None:
        if ext not in BUILTINS:
            raise ConfigError("extends", f"unknown builtin scenario {ext!r}")
        base = _merge(DEFAULTS, dict(BUILTINS[ext], name=ext))
    cfg = _merge(base, raw)
    if "name" not in cfg:
        raise ConfigError("name", "scenario needs a name")
    unknown = set(cfg) - set(DEFAULTS) - {"name"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown configuration key")
    validate(cfg)
    return cfg


def builtin_config(name):
    if name not in BUILTINS:
        raise ConfigError("scenario", f"unknown scenario {name!r}")
    return resolve_config(dict(BUILTINS[name], name=name))


def validate(cfg):
    for c in cfg["checks"]:
        if c not in CHECKS:
            raise ConfigError("checks", f"unknown check {c!r}")
    if cfg["units"] != "natural":
        raise ConfigError("units", f"unsupported unit system {cfg['units']!r} (only 'natural')")
    try:
        Constants(**cfg["constants"])
    except (TypeError, DomainError) as exc:
        raise ConfigError("constants", str(exc)) from exc
    if len(cfg["gamma"]) != 3:
        raise ConfigError("gamma", "needs three phase constants")
    for k in cfg["tolerances"]:
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError(f"tolerances.{k}", "unknown tolerance")
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        raise ConfigError("seed", "must be a nonnegative integer")
    if not isinstance(cfg["threads"], int) or cfg["threads"] < 1:
        raise ConfigError("threads", "must be a positive integer")
    if cfg["output"].get("format") not in ("json", "csv", "both"):
        raise ConfigError("output.format", "must be json, csv or both")
    for i, s in enumerate(cfg["states"]):
        if s.get("family") not in ("ho", "free", "energy"):
            raise ConfigError(f"states[{i}].family", f"unknown family {s.get('family')!r}")
    if cfg["potential"].get("kind") not in ("harmonic", "free"):
        raise ConfigError("potential.kind", "must be harmonic or free")
    try:
        _grid(cfg)
    except (TypeError, KeyError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("grid", str(exc)) from exc
    needs_states = {"orbit", "speed", "shm", "monopole_plane", "ellipse", "self_angular", "wedge_closed_form",
                    "mass_moment", "rho0_three_route", "probabilities", "linear_expectation", "montecarlo",
                    "spin_split", "conjugacy", "conjugacy_fd", "diffusion", "diffusion_fd", "continuity_fd",
                    "velocity_identity", "current_two_route", "gamma_balance", "potential", "schrodinger"}
    if not cfg["states"] and needs_states & set(cfg["checks"]):
        raise ConfigError("states", "the requested checks need at least one state")
    for k, v in cfg["fd_orders"].items():
        if k not in ("diffusion_fd", "continuity_fd", "conjugacy_fd") or v not in (2, 4):
            raise ConfigError(f"fd_orders.{k}", "expected order must be 2 or 4 for an fd check")
    n = cfg["fine_structure_n"]
    if "fine_structure" in cfg["checks"] and (not isinstance(n, int) or n < 1):
        raise ConfigError("fine_structure_n", "must be a positive integer")


def _grid(cfg):
    g = cfg["grid"]
    axes = tuple(es.GridAxis(a, float(g["lo"]), float(g["hi"]), int(g["count"])) for a in g["axes"])
    return es.FieldGrid(axes, tuple(float(v) for v in g["base"]))


@dataclass
class Context:
    cfg: dict
    consts: Constants
    grid: es.FieldGrid
    times: List[float]
    tol: Dict[str, float]
    assembly: object = None
    potential: object = None

    @property
    def holomorphic(self):
        return self.assembly is not None and self.assembly.source is not None


def build_context(cfg):
    consts = Constants(**cfg["constants"])
    grid = _grid(cfg)
    tol = dict(DEFAULT_TOLERANCES, **cfg["tolerances"])
    ctx = Context(cfg, consts, grid, [float(t) for t in cfg["times"]], tol)
    pot = cfg["potential"]
    ctx.potential = fields.PotentialField(pot["kind"], float(pot.get("omega", 1.0)), consts.m0)
    states = cfg["states"]
    if states:
        fams = {s["family"] for s in states}
        if "energy" in fams:
            if fams != {"energy"}:
                raise ConfigError("states", "energy-family states cannot be mixed with eigenstates")
            ctx.assembly = asm.Assembly.from_constants(
                [s["energy"] for s in states], [s.get("weight", 1.0) for s in states],
                [s.get("alpha", 0.0) for s in states], tuple(cfg["gamma"]), consts)
        else:
            terms = []
            for s in states:
                if s["family"] == "ho":
                    st = es.ho_state(s["n"], float(pot.get("omega", 1.0)), consts)
                else:
                    st = es.free_state(s["k"], consts)
                terms.append((float(s.get("weight", 1.0)), st))
            ctx.assembly = asm.Assembly.from_eigenstates(terms, tuple(cfg["gamma"]), consts)
    return ctx


def _select(p, mask):
    c = p.coords()
    return E6Point.from_coords(c[:, mask])


def _cmp(name, value, tol, **extra):
    value = float(value)
    return dict(name=name, kind="comparison", value=value, tol=float(tol), passed=bool(value <= tol), **extra)


def _res(name, report):
    d = report.to_dict()
    d.update(name=name, kind="residual")
    return d


def _all_points(ctx):
    return ctx.grid.points()


def _oscs(ctx):
    return [s.oscillator for s in ctx.assembly.states]


# --- kinematics -----------------------------------------------------------


def check_orbit(ctx):
    p = _all_points(ctx)
    worst = max(float(np.max(np.abs(osc.orbit_residual(o, p, t)))) for o in _oscs(ctx) for t in ctx.times)
    return _cmp("orbit", worst, ctx.tol["kinematic"])


def check_speed(ctx):
    p = _all_points(ctx)
    c = ctx.consts.c
    worst = 0.0
    for o in _oscs(ctx):
        for t in ctx.times:
            for vel in (osc.velocity(o, p, t), osc.velocity_bar(o, p, t)):
                worst = max(worst, float(np.max(np.abs(osc.plane_speeds(vel) - c / math.sqrt(3)))))
                worst = max(worst, float(np.max(np.abs(e6_speed(vel) - c))))
    return _cmp("speed", worst, ctx.tol["kinematic"])


def check_shm(ctx):
    p = _all_points(ctx)
    worst = 0.0
    for o in _oscs(ctx):
        for t in ctx.times:
            acc = osc.acceleration(o, p, t)
            q = osc.position(o, p, t)
            for a, b in zip(acc, q):
                d = a + b * o.omega ** 2
                worst = max(worst, float(np.max(np.abs(d.a))), float(np.max(np.abs(d.b))))
    return _cmp("shm", worst, ctx.tol["kinematic"])


def check_monopole_plane(ctx):
    p = _all_points(ctx)
    plane = osc.monopole_plane(ctx.cfg["gamma"])
    worst = 0.0
    for o in _oscs(ctx):
        for t in ctx.times:
            X, Y = osc.scaled_coords(o, p, t)
            for coords in (X, Y):
                worst = max(worst, float(np.max(np.abs(osc.monopole_plane_residual(o.gamma, coords)))))
    return _cmp("monopole_plane", worst, ctx.tol["plane"], degenerate=plane.degenerate,
                normal=[float(v) for v in plane.coeffs])


def check_ellipse(ctx):
    p = _all_points(ctx)
    worst = max(float(np.max(np.abs(osc.all_ellipse_residuals(o, p, t)))) for o in _oscs(ctx) for t in ctx.times)
    return _cmp("ellipse", worst, ctx.tol["plane"])


def check_self_angular(ctx):
    p = _all_points(ctx)
    worst = 0.0
    for o in _oscs(ctx):
        for t in ctx.times:
            for plane in (1, 2, 3):
                a = angular.relative_angular_momentum(o, o, plane, p, t).coeff
                worst = max(worst, float(np.max(np.abs(a + 1.0 / 3.0))))
    return _cmp("self_angular", worst, ctx.tol["angular_self"])


def check_wedge_closed_form(ctx):
    p = _all_points(ctx)
    oscs = _oscs(ctx)
    worst = 0.0
    for t in ctx.times:
        for oi in oscs:
            for oj in oscs:
                cf = angular.closed_form_a(2 * oi.half_phase(p, t), 2 * oj.half_phase(p, t))
                for plane in (1, 2, 3):
                    a = angular.relative_angular_momentum(oi, oj, plane, p, t).coeff
                    b = angular.relative_angular_momentum(oj, oi, plane, p, t).coeff
                    worst = max(worst, float(np.max(np.abs(a - cf))), float(np.max(np.abs(a - b))))
    return _cmp("wedge_closed_form", worst, ctx.tol["angular_pair"])


def check_mass_moment(ctx):
    oscs = _oscs(ctx)
    k = ctx.consts
    target = 2 * k.m0 * k.l0 / math.sqrt(3)
    worst = max(abs(o.mass_moment - target) / target for o in oscs)
    order = sorted(oscs, key=lambda o: o.energy)
    nested = all(a.amplitude > b.amplitude for a, b in zip(order, order[1:]) if a.energy < b.energy)
    r = _cmp("mass_moment", worst, ctx.tol["kinematic"], nested=nested)
    r["passed"] = r["passed"] and nested
    return r


# --- assemblies -----------------------------------------------------------


def check_rho0_three_route(ctx):
    p = _all_points(ctx)
    A = ctx.assembly
    worst = 0.0
    for t in ctx.times:
        r = asm.rho0(A, p, t)
        scale = np.maximum(1.0, np.abs(r))
        routes = [asm.rho0_quadratic_route(A, p, t)] + [asm.rho0_double_sum(A, p, t, b) for b in (1, 2, 3)]
        for q in routes:
            worst = max(worst, float(np.max(np.abs(q - r) / scale)))
    return _cmp("rho0_three_route", worst, ctx.tol["three_route"], scaled="max(1, rho0)")


def check_probabilities(ctx):
    p = _all_points(ctx)
    P, Pij = asm.probabilities(ctx.assembly, p)
    dev = max(float(np.max(np.abs(P.sum(axis=0) - 1))), float(np.max(np.abs(Pij.sum(axis=(0, 1)) - 1))),
              float(np.max(np.abs(Pij - np.einsum("i...,j...->ij...", P, P)))))
    return _cmp("probabilities", dev, ctx.tol["kinematic"])


def check_linear_expectation(ctx):
    p = _all_points(ctx)
    A = ctx.assembly
    worst = 0.0
    for t in ctx.times:
        ps = asm.psi(A, p, t)
        el = A.total(p) * asm.expect_linear(A, p, t)
        worst = max(worst, float(np.max(np.abs(el - ps) / np.maximum(1.0, np.abs(ps)))))
    return _cmp("linear_expectation", worst, ctx.tol["kinematic"], scaled="max(1, |Psi|)")


def _conjugacy_points(ctx, interior):
    p = ctx.grid.interior_points() if interior else ctx.grid.points()
    return p


def check_conjugacy(ctx):
    A = ctx.assembly
    p = _conjugacy_points(ctx, False)
    worst, excluded = 0.0, 0
    for i, s in enumerate(A.states):
        mask = s.modulus(p) > asm.NODAL_EPS
        excluded += int(np.sum(~mask))
        fp = asm.fluid_potential(A, i, _select(p, mask), ctx.times[0])
        worst = max(worst, fp.max_residual())
    return _cmp("conjugacy", worst, ctx.tol["conjugacy"], excluded_points=excluded)


def check_conjugacy_fd(ctx):
    A = ctx.assembly
    p = _conjugacy_points(ctx, True)
    h = ctx.grid.h
    reports = []
    for i, s in enumerate(A.states):
        mask = s.modulus(p) > asm.NODAL_EPS
        q = _select(p, mask)
        r1 = asm.fluid_potential(A, i, q, ctx.times[0], h=h).residual
        r2 = asm.fluid_potential(A, i, q, ctx.times[0], h=h / 2).residual
        reports.append(fields.make_report(f"conjugacy_fd[{i}]", r1, None, h, r2, order=_order(ctx, "conjugacy_fd")))
    ok = all(r.passed for r in reports)
    return dict(name="conjugacy_fd", kind="residual_set", passed=ok, reports=[r.to_dict() for r in reports])


def check_spin_split(ctx):
    A = ctx.assembly
    p = _all_points(ctx)
    chi = float(ctx.cfg["chi"])
    worst, special = 0.0, 0.0
    for t in ctx.times:
        r0 = asm.rho0(A, p, t)
        N0 = angular.n0_from_rho0(r0)
        split = angular.spin_decompose(chi, N0)
        per_plane = [angular.assembly_angular_momentum(A, b, p, t).coeff for b in (1, 2, 3)]
        along_k = angular.k_projection(per_plane)
        scale = np.maximum(1.0, np.abs(along_k))
        worst = max(worst, float(np.max(np.abs(split.magnitude() - np.abs(along_k)) / scale)))
        worst = max(worst, float(np.max(np.abs(along_k + N0 / math.sqrt(2)) / scale)))
        if any(abs(chi - c) < 1e-15 for c in angular.SPECIAL_CHI):
            special = max(special, float(np.max(np.abs(np.abs(split.plus_coeff) - N0 / 2) / scale)),
                          float(np.max(np.abs(np.abs(split.minus_coeff) - N0 / 2) / scale)))
    return _cmp("spin_split", max(worst, special), ctx.tol["three_route"], chi=chi)


def check_montecarlo(ctx):
    A = ctx.assembly
    mc = ctx.cfg["montecarlo"]
    pt = E6Point.from_coords(np.asarray(mc["point"], dtype=float))
    t = float(mc["time"])
    draws, runs = int(mc["draws"]), int(mc["runs"])
    k = ctx.tol["mc_sigma"]
    true_psi = complex(asm.psi(A, pt, t))
    true_rho = float(asm.rho0(A, pt, t))
    rngs = asm.spawn_rngs(ctx.cfg["seed"], runs + 1)
    hit_psi = hit_rho = 0
    for rng in rngs[:runs]:
        e = asm.sample_assembly(A, pt, t, draws, rng)
        hit_psi += abs(e.psi - true_psi) < k * e.psi_se
        hit_rho += abs(e.rho0 - true_rho) < k * e.rho0_se
    small = asm.sample_assembly(A, pt, t, draws, rngs[runs])
    big = asm.sample_assembly(A, pt, t, 4 * draws, rngs[runs])
    se_psi = small.psi_se / big.psi_se
    se_rho = small.rho0_se / big.rho0_se
    w = ctx.tol["mc_se_window"]
    cov = ctx.tol["mc_coverage"]
    ok = (hit_psi >= cov * runs and hit_rho >= cov * runs
          and abs(se_psi - 2) <= 2 * w and abs(se_rho - 2) <= 2 * w)
    return dict(name="montecarlo", kind="statistical", passed=bool(ok), runs=runs, draws=draws,
                psi_within=int(hit_psi), rho0_within=int(hit_rho), se_ratio_psi=float(se_psi),
                se_ratio_rho0=float(se_rho), sigma=k, coverage=cov)


# --- fields ---------------------------------------------------------------


def _nonnodal(ctx, p, t):
    return _select(p, asm.rho0(ctx.assembly, p, t) > fields.NODAL_EPS)


def check_velocity_identity(ctx):
    A = ctx.assembly
    worst = 0.0
    for t in ctx.times:
        p = _nonnodal(ctx, _all_points(ctx), t)
        vf = fields.velocity_fields(fields.rho0_field(A, t), p, ctx.consts)
        for b, u, v in zip(vf.beta_bar, vf.u, vf.v):
            d = (u - v) - b
            worst = max(worst, float(np.max(np.abs(d.a))), float(np.max(np.abs(d.b))))
        c = vf.centroid
        for a in range(3):
            worst = max(worst, float(np.max(np.abs(c[a] - 0.5 * vf.u[a].a))),
                        float(np.max(np.abs(c[a + 3] - 0.5 * vf.v[a].b))))
    return _cmp("velocity_identity", worst, ctx.tol["kinematic"])


def check_current_two_route(ctx):
    A = ctx.assembly
    worst = 0.0
    for t in ctx.times:
        p = _nonnodal(ctx, _all_points(ctx), t)
        rf = fields.rho0_field(A, t)
        for plane in (1, 2, 3):
            j1 = fields.current_density(rf, plane, p, ctx.consts)
            j2 = fields.current_closed_form(rf, plane, p, ctx.consts)
            scale = np.maximum(1.0, np.hypot(j2.a, j2.b))
            worst = max(worst, float(np.max(np.hypot(j1.a - j2.a, j1.b - j2.b) / scale)))
    return _cmp("current_two_route", worst, ctx.tol["current"], scaled="max(1, |J|)")


def check_gamma_balance(ctx):
    A = ctx.assembly
    p = ctx.grid.interior_points()
    worst = drift = 0.0
    for t in ctx.times:
        mix = ctx.consts.nu * fields.mixed_term(A, p, t, "analytic")
        gam = fields.gamma_source(A, ctx.potential, p, t)
        worst = max(worst, float(np.max(np.abs(mix + gam))))
        drift = max(drift, float(np.max(np.abs(fields.drho0_dt(A, p, t)))))
    r = _cmp("gamma_balance", max(worst, drift), ctx.tol["residual"], max_drho_dt=drift)
    return r


def _order(ctx, name):
    return int(ctx.cfg["fd_orders"].get(name, 2))


def check_diffusion(ctx):
    rep = fields.diffusion_residual(ctx.assembly, ctx.potential, ctx.grid, ctx.times, "analytic",
                                    ctx.tol["residual"], threads=ctx.cfg["threads"])
    return _res("diffusion", rep)


def check_diffusion_fd(ctx):
    rep = fields.diffusion_residual(ctx.assembly, ctx.potential, ctx.grid, ctx.times, "fd", None,
                                    threads=ctx.cfg["threads"], order=_order(ctx, "diffusion_fd"))
    return _res("diffusion_fd", rep)


def check_continuity_fd(ctx):
    rep = fields.continuity_residual(ctx.assembly, ctx.potential, ctx.grid, ctx.times, "fd", None,
                                     threads=ctx.cfg["threads"], order=_order(ctx, "continuity_fd"))
    return _res("continuity_fd", rep)


def check_potential(ctx):
    src = ctx.assembly.source
    p = ctx.grid.interior_points()
    worst = line = offset = 0.0
    for t in ctx.times:
        q = _select(p, np.abs(src.value(p, t)) > fields.NODAL_EPS)
        rec = fields.potential_reconstruct(src, q, t, ctx.consts)
        offset = rec.offset
        exact = ctx.potential.value(q.z)
        worst = max(worst, float(np.max(np.abs(rec.V - rec.offset - exact))))
        qb = q.with_y_zero()
        qb = _select(qb, np.abs(src.value(qb, t)) > fields.NODAL_EPS)
        rb = fields.potential_reconstruct(src, qb, t, ctx.consts)
        om, m0 = ctx.potential.omega, ctx.consts.m0
        target = 0.5 * m0 * om ** 2 * np.sum(qb.x ** 2, axis=0) if ctx.potential.kind == "harmonic" else 0.0
        line = max(line, float(np.max(np.abs(rb.V1_shifted - target))), float(np.max(np.abs(rb.V2))))
    return _cmp("potential", max(worst, line), ctx.tol["potential"], offset=offset, boundary_max_dev=line)


def check_potential_cr(ctx):
    p = _all_points(ctx)
    a = float(np.max(np.abs(ctx.potential.cr_residual(p))))
    f = float(np.max(np.abs(ctx.potential.cr_residual(p, h=1e-4))))
    return _cmp("potential_cr", max(a, f), ctx.tol["conjugacy"], analytic=a, finite_difference=f)


def check_schrodinger(ctx):
    tol = ctx.tol["residual"]
    r = fields.schrodinger_residual(ctx.assembly.source, ctx.potential, ctx.grid, ctx.times, ctx.consts,
                                    "analytic", tol, threads=ctx.cfg["threads"])
    ok = r.continued.passed and r.boundary.passed and r.v2_boundary_max <= tol
    return dict(name="schrodinger", kind="residual_set", passed=bool(ok), v2_boundary_max=r.v2_boundary_max,
                reports=[r.continued.to_dict(), r.boundary.to_dict()])


def check_fine_structure(ctx):
    n = ctx.cfg["fine_structure_n"]
    v = fine_structure(n)
    rel = abs(v - REFERENCE_ALPHA) / REFERENCE_ALPHA
    return _cmp("fine_structure", rel, ctx.tol["fine_structure_rel"], N=n, alpha=v, reference=REFERENCE_ALPHA)


@dataclass(frozen=True)
class CheckSpec:
    fn: Callable
    summary: str
    holomorphic: bool = False


CHECKS = {
    "orbit": CheckSpec(check_orbit, "phase points lie on circles q+^2 + q-^2 = q0^2 on every plane"),
    "speed": CheckSpec(check_speed, "per-plane speed c/sqrt(3) and six-space speed c for both velocity fields"),
    "shm": CheckSpec(check_shm, "d2q/dt2 = -omega^2 q (simple harmonic motion)"),
    "monopole_plane": CheckSpec(check_monopole_plane, "scaled monopole coordinates X and Y stay on the plane "
                                "sin(g3-g2) X1 + sin(g1-g3) X2 + sin(g2-g1) X3 = 0"),
    "ellipse": CheckSpec(check_ellipse, "the six projected ellipses X_a^2 + X_b^2 - 2 X_a X_b cos(g_a-g_b) = "
                         "sin^2(g_a-g_b) hold on-orbit"),
    "self_angular": CheckSpec(check_self_angular, "self-interaction angular momentum is -hbar/3 on each plane"),
    "wedge_closed_form": CheckSpec(check_wedge_closed_form, "pairwise wedge angular momentum equals "
                                   "-(hbar/3) cos((phi_i - phi_j)/2) and is symmetric"),
    "mass_moment": CheckSpec(check_mass_moment, "M_j q0_j = 2 m0 l0 / sqrt(3) for all states; higher-energy "
                             "orbits nest inside lower ones"),
    "rho0_three_route": CheckSpec(check_rho0_three_route, "Psi* Psi equals the pairwise angular-momentum sum "
                                  "and -sqrt(3) N_f E_Q[a.k/hbar]"),
    "probabilities": CheckSpec(check_probabilities, "P_j and P_ij sum to one and P_ij = P_i P_j"),
    "linear_expectation": CheckSpec(check_linear_expectation, "Psi = N E_L[exp(phi/2i)]"),
    "conjugacy": CheckSpec(check_conjugacy, "Cauchy-Riemann residual of w = 2 nu (phi/2 + i ln n_c) with "
                           "analytic partials"),
    "conjugacy_fd": CheckSpec(check_conjugacy_fd, "the same residual by central differences, second order"),
    "velocity_identity": CheckSpec(check_velocity_identity, "beta-bar = u - v and beta^(c) = (u + v)/2"),
    "current_two_route": CheckSpec(check_current_two_route, "curl of B0 / mu0 equals -(|e|/sqrt 6) rho beta-bar"),
    "gamma_balance": CheckSpec(check_gamma_balance, "stationary state: nu sum d2 rho/dx dy cancels "
                               "Gamma = rho V2 / (m0 c l0)", True),
    "diffusion": CheckSpec(check_diffusion, "d rho/dt = nu sum d2 rho/dx_a dy_a + Gamma, analytic derivatives",
                           True),
    "diffusion_fd": CheckSpec(check_diffusion_fd, "the diffusion residual by finite differences converges at "
                              "second order"),
    "continuity_fd": CheckSpec(check_continuity_fd, "d rho/dt + div6(rho beta^(c)) = Gamma, flux divergence by "
                               "finite differences, second order"),
    "potential": CheckSpec(check_potential, "V(z) reconstructed from Psi matches the external potential; V1 on "
                           "y = 0 is the real potential", True),
    "potential_cr": CheckSpec(check_potential_cr, "V1 and V2 are harmonic conjugates"),
    "schrodinger": CheckSpec(check_schrodinger, "continued Schrodinger equation on the grid and the ordinary one "
                             "on y = 0 with V2 = 0 there", True),
    "spin_split": CheckSpec(check_spin_split, "total internal angular momentum -(hbar/sqrt 2) N0 k splits into "
                            "labelled k+ and k- parts"),
    "montecarlo": CheckSpec(check_montecarlo, "sampled Psi and rho0 fall within the stated standard errors; "
                            "errors halve when draws quadruple"),
    "fine_structure": CheckSpec(check_fine_structure, "cos(pi/N)/N against 7.297351e-3"),
}


@dataclass
class ScenarioReport:
    name: str
    config: dict
    checks: list = field(default_factory=list)
    passed: bool = True
    wall_clock_s: float = 0.0
    version: str = __version__

    def to_dict(self):
        return dict(scenario=self.name, config=self.config, checks=self.checks, passed=self.passed,
                    wall_clock_s=self.wall_clock_s, version=self.version)


def run_scenario(cfg):
    """Run every requested check in declared order."""
    cfg = resolve_config(cfg) if "checks" not in cfg or "grid" not in cfg else cfg
    start = time.perf_counter()
    ctx = build_context(cfg)
    report = ScenarioReport(cfg["name"], copy.deepcopy(cfg))
    for name in cfg["checks"]:
        spec = CHECKS[name]
        if spec.holomorphic and not ctx.holomorphic:
            raise ConfigError("checks", f"check {name!r} needs eigenstate (ho/free) states")
        res = spec.fn(ctx)
        report.checks.append(res)
        report.passed = report.passed and bool(res["passed"])
    report.wall_clock_s = time.perf_counter() - start
    return report


CSV_HEADER = ("x1", "x2", "x3", "y1", "y2", "y3", "t", "re_psi", "im_psi", "rho0", "resid_diffusion",
              "resid_schrodinger")


def grid_rows(cfg):
    """Rows of the grid dump, one per grid point and time sample; absent quantities are None."""
    ctx = build_context(cfg)
    p = ctx.grid.points()
    coords = p.coords().reshape(6, -1)
    rows = []
    A = ctx.assembly
    for t in ctx.times:
        n = coords.shape[1]
        ps = asm.psi(A, p, t).ravel() if A is not None else [None] * n
        rho = asm.rho0(A, p, t).ravel() if A is not None else [None] * n
        rd = rs = [None] * n
        if A is not None and ctx.holomorphic and "diffusion" in cfg["checks"]:
            rd = fields.diffusion_pointwise(A, ctx.potential, p, t).ravel()
        if A is not None and ctx.holomorphic and "schrodinger" in cfg["checks"]:
            rs = np.abs(fields.schrodinger_pointwise(A.source, ctx.potential, p, t, ctx.consts)).ravel()
        for k in range(n):
            re = None if ps[k] is None else float(np.real(ps[k]))
            im = None if ps[k] is None else float(np.imag(ps[k]))
            rows.append([float(v) for v in coords[:, k]] + [t, re, im,
                        None if rho[k] is None else float(rho[k]),
                        None if rd[k] is None else float(rd[k]),
                        None if rs[k] is None else float(rs[k])])
    return rows


def describe(name):
    cfg = builtin_config(name)
    lines = [f"{name}: {cfg['description']}"]
    for c in cfg["checks"]:
        lines.append(f"  {c:20s} {CHECKS[c].summary}")
    return "\n".join(lines)
