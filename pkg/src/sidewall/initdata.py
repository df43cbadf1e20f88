"""Smooth exact-odd packet initial data and its admissibility report.

``Gamma0 = beta z r^2 chi`` and ``G0 = alpha z chi`` with a two-factor bump
``chi``.  The default "collar" cutoff ``bump(x / lam0) bump(y / lam0)`` is
flat near the wall point, so the wall slopes are ``b(0) = beta`` and
``a(0) = alpha``.  The "cone" cutoff ``bump(x / lam0) bump((|y|/x - m) / delta_c)``
keeps the data inside a narrow cone of slope ``m``; it vanishes on the wall.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .cutoffs import bump_cutoff
from .elliptic import velocity_from_G
from .grid import ODD, GridSpec, ScalarField, anisotropy_ratio, boundary_traces, core_mask
from .packets import hyperbolic_mass, maximal_score, tail_masses, upper_cone_min

COLLAR = "collar"
CONE = "cone"


class InitDataError(ValueError):
    pass


@dataclass(frozen=True)
class PacketSpec:
    alpha: float = 1.0
    beta: float | None = None
    lam0: float = 0.05
    delta_c: float = 0.1
    c_star: float = 100.0
    shape: str = COLLAR
    slope: float = 1.0
    safety: float = 2.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise InitDataError("alpha must be positive")
        if self.beta is not None and self.beta < 0:
            raise InitDataError("beta must be nonnegative")
        if not 0 < self.lam0 <= 0.1:
            raise InitDataError("lam0 must lie in (0, 0.1] (flattening regime)")
        if not 0 < self.delta_c <= 0.25:
            raise InitDataError("delta_c must lie in (0, 0.25]")
        if self.shape not in (COLLAR, CONE):
            raise InitDataError(f"unknown packet shape {self.shape!r}")


def packet_cutoff(X, Y, spec: PacketSpec) -> np.ndarray:
    """Even-in-y cutoff in flattened coordinates."""
    ay = np.abs(Y)
    radial = bump_cutoff(X / spec.lam0)
    if spec.shape == COLLAR:
        return radial * bump_cutoff(ay / spec.lam0)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(X > 0, ay / np.where(X > 0, X, 1.0), np.inf)
    return np.where(X > 0, radial * bump_cutoff((s - spec.slope) / spec.delta_c), 0.0)


def check_resolution(spec: PacketSpec, grid: GridSpec):
    if spec.lam0 < 16 * grid.hz or spec.lam0 < 8 * grid.hr:
        raise InitDataError(
            f"packet scale {spec.lam0:g} unresolved: need >= 16 axial cells "
            f"({16 * grid.hz:.4g}) and >= 8 radial cells ({8 * grid.hr:.4g})")
    if 2 * spec.lam0 > 0.5 * grid.z_period:
        raise InitDataError("packet does not fit in half a period")


def _fields(spec: PacketSpec, grid: GridSpec, beta: float):
    R, Z = grid.mesh()
    chi = packet_cutoff(1.0 - R, Z, spec)
    G = ScalarField(grid, spec.alpha * Z * chi, ODD)
    Gam = ScalarField(grid, beta * Z * R**2 * chi, ODD)
    return Gam, G


def solve_beta(spec: PacketSpec, M0: float) -> float:
    """Swirl amplitude with ``B(0)^2 = safety * C_* * M(0)^2``.

    Uses ``B(0) = lam0^{1/2} b(0)`` and ``b(0) = beta`` for the collar cutoff.
    """
    return math.sqrt(spec.safety * spec.c_star / spec.lam0) * M0


def make_packet(spec: PacketSpec, grid: GridSpec) -> tuple[ScalarField, ScalarField, PacketSpec]:
    """Return ``(Gamma0, G0, spec)``; when ``spec.beta`` is None it is solved for."""
    check_resolution(spec, grid)
    beta = spec.beta
    if beta is None:
        _, G = _fields(spec, grid, 0.0)
        M0, _ = maximal_score(G, spec.delta_c, spec.lam0)
        beta = solve_beta(spec, M0)
        spec = PacketSpec(**{**asdict(spec), "beta": beta})
    Gam, G = _fields(spec, grid, beta)
    return Gam, G, spec


@dataclass(frozen=True)
class Clause:
    name: str
    passed: bool
    value: float
    bound: float


@dataclass(frozen=True)
class AdmissibilityReport:
    clauses: tuple
    a0: float
    b0: float
    A0: float
    B0: float
    M0: float
    H0: float
    on_diagonal: bool

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "clauses": [asdict(c) for c in self.clauses],
            "a0": self.a0, "b0": self.b0, "A0": self.A0, "B0": self.B0,
            "M0": self.M0, "H0": self.H0, "on_diagonal": self.on_diagonal,
        }


def _core_deviation(f: ScalarField, slope: float, lam: float, kappa: float) -> float:
    """``sup |f - slope y|`` on the inner core, relative to ``|slope| kappa lam``."""
    g = f.grid
    mask = core_mask(g, lam, kappa)
    _, Y = g.flat_mesh()
    dev = float(np.max(np.abs(f.values - slope * Y)[mask]))
    scale = abs(slope) * kappa * lam
    if scale == 0:
        return 0.0 if dev == 0 else math.inf
    return dev / scale


def admissibility_report(Gamma0: ScalarField, G0: ScalarField, spec: PacketSpec, *,
                         kappa: float = 0.5, eta: float = 0.01, delta: float = 0.05,
                         eps: float = 0.05, parity_tol: float = 1e-12,
                         diag_fraction: float = 0.01) -> AdmissibilityReport:
    """Check the seven admissibility clauses on generated data.

    (i) exact odd parity, (ii) ``G0 >= 0`` on the upper half collar,
    (iii)/(iv) linear-core deviation of ``G0``/``Gamma0`` from ``a(0) y``/``b(0) y``,
    (v) dyadic tail ratio, (vi) core anisotropy, (vii) source dominance
    ``B(0)^2 >= C_* M(0)^2``.  ``on_diagonal`` separately flags data whose
    diagonal score is below ``diag_fraction`` of its square-packet mass.
    """
    g = G0.grid
    lam = spec.lam0
    _, v = velocity_from_G(G0)
    tr = boundary_traces(Gamma0, G0, v.u_z, lam, u_r=v.u_r, kappa=kappa)

    def parity_err(f):
        scale = max(float(np.max(np.abs(f.values))), 1e-300)
        return float(np.max(np.abs(f.values + f.values[:, g.mirror]))) / scale

    par = max(parity_err(Gamma0), parity_err(G0))
    gmax = max(float(np.max(np.abs(G0.values))), 1e-300)
    gmin = upper_cone_min(G0, 0.5 * g.z_period, kappa=2.0) / gmax
    dev_G = _core_deviation(G0, tr.a, lam, kappa)
    dev_Gam = _core_deviation(Gamma0, tr.b, lam, kappa)
    j_max = max(1, int(math.floor(math.log2(min(1.0, 0.5 * g.z_period) / lam))) - 1)
    tail = tail_masses(G0, lam, j_max)
    R = anisotropy_ratio(Gamma0, lam, kappa)
    M0, _ = maximal_score(G0, spec.delta_c, lam)
    lhs = tr.B**2
    rhs = spec.c_star * M0**2
    H0 = hyperbolic_mass(G0, lam)
    clauses = (
        Clause("(i) exact odd parity", par <= parity_tol, par, parity_tol),
        Clause("(ii) G0 >= 0 on the upper half", gmin >= -parity_tol, gmin, 0.0),
        Clause("(iii) G0 linear core deviation", dev_G <= delta, dev_G, delta),
        Clause("(iv) Gamma0 linear core deviation", dev_Gam <= delta, dev_Gam, delta),
        Clause("(v) tail ratio", tail.ratio <= eta, tail.ratio, eta),
        Clause("(vi) anisotropy R", R <= eps, R, eps),
        Clause("(vii) source dominance B^2 / (C_* M^2)", bool(lhs >= rhs),
               lhs / rhs if rhs > 0 else (math.inf if lhs > 0 else 0.0), 1.0),
    )
    return AdmissibilityReport(clauses, tr.a, tr.b, tr.A, tr.B, M0, H0,
                               bool(M0 >= diag_fraction * abs(H0)))
