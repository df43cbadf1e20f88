"""Time stepping of the swirl/vorticity pair ``(Gamma, G)`` on the cylinder.

``D_t Gamma = 0`` and ``D_t G = r^{-4} d_z(Gamma^2)`` along the meridional
flow recovered from ``G``.  One step is a semi-Lagrangian predictor-corrector:
characteristics are traced with the midpoint rule, first with the old
velocity, then with the average of the old and predicted velocities.  The
source is integrated by the trapezoid rule along each characteristic.  Both
fields are re-projected onto the odd class after every step, and the
compression scale is advanced exactly, ``lam <- lam exp(-sigma dt)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .elliptic import MeridionalVelocity, divergence_residual, velocity_from_G
from .grid import (ODD, BoundaryTrace, ScalarField, boundary_traces, dz4, even_part,
                   grad_inf, odd_project, wall_dz)
from .interp import cubic_sample

log = logging.getLogger(__name__)


class DynamicsError(RuntimeError):
    def __init__(self, msg, last_good=None):
        super().__init__(msg)
        self.last_good = last_good


@dataclass(frozen=True)
class StepReport:
    dt: float
    cfl: float
    b_ident: float
    a_ident: float
    AB_ident: float
    divergence: float
    parity_drift: float
    clamped: int = 0


@dataclass(frozen=True)
class SimState:
    t: float
    Gamma: ScalarField
    G: ScalarField
    lam: float
    S: float
    trace: BoundaryTrace
    velocity: MeridionalVelocity
    step_count: int = 0
    kappa: float = 0.5

    def __post_init__(self):
        if not self.lam > 0:
            raise DynamicsError("compression scale must stay positive")
        if self.Gamma.parity != ODD or self.G.parity != ODD:
            raise DynamicsError("state fields must carry the odd parity tag")

    @property
    def grid(self):
        return self.G.grid


def rhs_G(Gamma: ScalarField) -> ScalarField:
    """``r^{-4} d_z(Gamma^2)`` with the fourth-order periodic z-stencil."""
    g = Gamma.grid
    out = dz4(Gamma.values**2, g.hz) / g.r[:, None] ** 4
    return ScalarField(g, out, ODD if Gamma.parity == ODD else Gamma.parity)


def _velocity(G: ScalarField) -> MeridionalVelocity:
    return velocity_from_G(G)[1]


def initial_state(Gamma0: ScalarField, G0: ScalarField, lam0: float,
                  kappa: float = 0.5) -> SimState:
    if not (np.all(np.isfinite(Gamma0.values)) and np.all(np.isfinite(G0.values))):
        raise DynamicsError("non-finite initial data")
    Gamma0 = odd_project(Gamma0)
    G0 = odd_project(G0)
    v = _velocity(G0)
    tr = boundary_traces(Gamma0, G0, v.u_z, lam0, 0.0, u_r=v.u_r, kappa=kappa)
    return SimState(0.0, Gamma0, G0, lam0, 0.0, tr, v, 0, kappa)


def _feet(v_r, v_z, grid, dt, clamped):
    """Departure points of the grid nodes for frozen velocity ``(v_r, v_z)``."""
    R, Z = grid.mesh()
    r_mid = R - 0.5 * dt * v_r
    z_mid = Z - 0.5 * dt * v_z
    ur = cubic_sample(v_r, grid, r_mid, z_mid)
    uz = cubic_sample(v_z, grid, r_mid, z_mid)
    r_foot = R - dt * ur
    z_foot = Z - dt * uz
    r_foot[-1] = 1.0  # impermeable wall: wall points stay on the wall
    clamped.append(int(np.count_nonzero((r_foot > 1.0) | (r_foot < grid.r[0]))))
    return np.clip(r_foot, grid.r[0], 1.0), z_foot


def advect(f: ScalarField, v: MeridionalVelocity, dt: float, *, limit: bool = True,
           clamped: list | None = None) -> ScalarField:
    """Semi-Lagrangian transport of ``f`` by ``v`` over ``dt``."""
    clamped = [] if clamped is None else clamped
    rf, zf = _feet(v.u_r.values, v.u_z.values, f.grid, dt, clamped)
    return f.with_values(cubic_sample(f.values, f.grid, rf, zf, limit=limit))


def _transport(Gamma, G, src0, v_r, v_z, dt, clamped):
    g = G.grid
    rf, zf = _feet(v_r, v_z, g, dt, clamped)
    Gam = cubic_sample(Gamma.values, g, rf, zf, limit=True)
    Gam_f = ScalarField(g, Gam, ODD)
    carried = cubic_sample(G.values + 0.5 * dt * src0, g, rf, zf, limit=True)
    Gn = carried + 0.5 * dt * rhs_G(Gam_f).values
    return Gam_f, ScalarField(g, Gn, ODD)


def _rel(lhs, rhs, floor):
    return abs(lhs - rhs) / max(abs(rhs), floor)


def identity_residuals(tr0: BoundaryTrace, tr1: BoundaryTrace, dt: float,
                       eps0: float = 1e-12) -> tuple[float, float, float]:
    """Relative residuals of ``b' = sigma b``, ``a' = sigma a + 2 b^2``, ``A' = 2 B^2``.

    Time derivatives are forward differences across the step and right-hand
    sides are trapezoid averages of the endpoint values.
    """
    rb = 0.5 * (tr0.sigma * tr0.b + tr1.sigma * tr1.b)
    ra = 0.5 * (tr0.sigma * tr0.a + 2 * tr0.b**2 + tr1.sigma * tr1.a + 2 * tr1.b**2)
    rA = tr0.B**2 + tr1.B**2
    return (_rel((tr1.b - tr0.b) / dt, rb, eps0),
            _rel((tr1.a - tr0.a) / dt, ra, eps0),
            _rel((tr1.A - tr0.A) / dt, rA, eps0))


def step(s: SimState, dt: float) -> tuple[SimState, StepReport]:
    """Advance one step of size ``dt``."""
    if not dt > 0:
        raise DynamicsError("dt must be positive", s)
    g = s.grid
    clamped: list = []
    v0 = s.velocity
    src0 = rhs_G(s.Gamma).values

    # predictor with the old velocity, corrector with the time-centred one
    _, G_p = _transport(s.Gamma, s.G, src0, v0.u_r.values, v0.u_z.values, dt, clamped)
    v_p = _velocity(odd_project(G_p))
    vr = 0.5 * (v0.u_r.values + v_p.u_r.values)
    vz = 0.5 * (v0.u_z.values + v_p.u_z.values)
    Gam1, G1 = _transport(s.Gamma, s.G, src0, vr, vz, dt, clamped)

    for f in (Gam1, G1):
        if not np.all(np.isfinite(f.values)):
            raise DynamicsError("non-finite field after transport", s)
    scale = max(float(np.max(np.abs(G1.values))), float(np.max(np.abs(Gam1.values))), 1e-300)
    drift = max(float(np.max(np.abs(even_part(Gam1)))),
                float(np.max(np.abs(even_part(G1))))) / scale
    Gam1 = odd_project(Gam1)
    G1 = odd_project(G1)

    v1 = _velocity(G1)
    sigma_half = -wall_dz(vz[-1], g)
    lam1 = s.lam * math.exp(-sigma_half * dt)
    t1 = s.t + dt
    tr1 = boundary_traces(Gam1, G1, v1.u_z, lam1, t1, u_r=v1.u_r, kappa=s.kappa)
    bI, aI, ABI = identity_residuals(s.trace, tr1, dt)
    vmax = max(float(np.max(np.abs(vr))), float(np.max(np.abs(vz))))
    rep = StepReport(dt=dt, cfl=vmax * dt / min(g.hr, g.hz), b_ident=bI, a_ident=aI,
                     AB_ident=ABI, divergence=divergence_residual(v1), parity_drift=drift,
                     clamped=int(sum(clamped)))
    if rep.clamped:
        log.debug("step %d: %d characteristic feet clamped to the domain", s.step_count,
                  rep.clamped)
    new = SimState(t1, Gam1, G1, lam1, s.S + sigma_half * dt, tr1, v1,
                   s.step_count + 1, s.kappa)
    return new, rep


# --------------------------------------------------------------------------
# driver

@dataclass(frozen=True)
class StepControl:
    cfl: float = 0.5
    strain_target: float = 0.02
    dt_max: float = math.inf
    dt_min: float = 1e-8
    fixed_dt: float | None = None

    def choose(self, s: SimState) -> float:
        if self.fixed_dt is not None:
            return self.fixed_dt
        g = s.grid
        v = s.velocity
        vmax = max(float(np.max(np.abs(v.u_r.values))), float(np.max(np.abs(v.u_z.values))))
        dt = self.dt_max
        if vmax > 0:
            dt = min(dt, self.cfl * min(g.hr, g.hz) / vmax)
        # only the meridional flow moves material; the swirl gradient does not
        strain = grad_inf([v.u_r.values, v.u_z.values], g)
        if strain > 0:
            dt = min(dt, self.strain_target / strain)
        return dt


@dataclass
class RunResult:
    samples: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    stop_reason: str = ""
    final: SimState | None = None


TIME_REACHED = "time reached"
CEILING = "ceiling"
DT_UNDERFLOW = "dt underflow"
RESOLUTION = "resolution exhausted"
MAX_STEPS = "step limit"


def run(s0: SimState, T: float, control: StepControl = StepControl(), monitors=None,
        cadence: int = 1, B_ceiling: float = 100.0, grad_ceiling: float = math.inf,
        max_steps: int = 10**6, res_cells: float = 8.0) -> RunResult:
    """Step until ``T`` or a stop condition.

    ``monitors(state, report)`` is called at step 0 and every ``cadence``
    steps and its dict return value is stored as one sample.  The run stops
    at ``T``, when ``B >= B_ceiling B(0)`` or ``gradUinf >= grad_ceiling``,
    when ``dt`` falls below ``control.dt_min``, or when ``lam`` drops below
    ``res_cells`` axial cells.
    """
    if not T > 0:
        raise DynamicsError("T must be positive")
    res = RunResult()
    s = s0
    B0 = abs(s0.trace.B)
    floor = res_cells * s0.grid.hz

    def sample(state, rep):
        res.samples.append(monitors(state, rep) if monitors else default_sample(state, rep))

    sample(s, None)
    while True:
        if s.t >= T * (1 - 1e-12):
            res.stop_reason = TIME_REACHED
            break
        if B0 > 0 and abs(s.trace.B) >= B_ceiling * B0 or s.trace.grad_u_inf >= grad_ceiling:
            res.stop_reason = CEILING
            break
        if s.lam < floor:
            res.stop_reason = RESOLUTION
            break
        if s.step_count >= max_steps:
            res.stop_reason = MAX_STEPS
            break
        dt = min(control.choose(s), T - s.t)
        if dt < control.dt_min and T - s.t > control.dt_min:
            res.stop_reason = DT_UNDERFLOW
            break
        s, rep = step(s, dt)
        res.reports.append(rep)
        if s.step_count % cadence == 0:
            sample(s, rep)
    res.final = s
    return res


def default_sample(s: SimState, rep: StepReport | None) -> dict:
    tr = s.trace
    row = {"step": s.step_count, "t": s.t, "sigma": tr.sigma, "a": tr.a, "b": tr.b,
           "c": tr.c_curv, "lambda": tr.lam, "A": tr.A, "B": tr.B, "S": s.S,
           "Rratio": tr.R_ratio, "gradUinf": tr.grad_u_inf}
    if rep is not None:
        row.update(dt=rep.dt, bIdent=rep.b_ident, aIdent=rep.a_ident, ABIdent=rep.AB_ident,
                   divergence=rep.divergence, parityDrift=rep.parity_drift)
    return row


# --------------------------------------------------------------------------
# continuation monitor

@dataclass(frozen=True)
class ContinuationReport:
    swirl_gradient: np.ndarray
    grad_u_inf: np.ndarray
    dominates: bool
    correlation: float


def continuation_monitor(traces) -> ContinuationReport:
    """``lam^{-1/2} B`` (the wall swirl slope) against the velocity-gradient sup."""
    traces = list(traces)
    if not traces:
        raise DynamicsError("empty trace series")
    sw = np.array([abs(tr.B) / math.sqrt(tr.lam) for tr in traces])
    gu = np.array([tr.grad_u_inf for tr in traces])
    dom = bool(np.all(gu >= sw * (1 - 1e-12)))
    if len(sw) > 2 and np.std(sw) > 0 and np.std(gu) > 0:
        corr = float(np.corrcoef(sw, gu)[0, 1])
    else:
        corr = math.nan
    return ContinuationReport(sw, gu, dom, corr)


def with_lambda(s: SimState, lam: float) -> SimState:
    return replace(s, lam=lam, trace=s.trace.rescaled(lam))
