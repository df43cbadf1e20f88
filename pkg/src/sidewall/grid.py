"""Grids, scalar fields and wall-point traces on the periodic cylinder.

The radial grid is cell-shifted, ``r_i = (i + 1/2) h_r`` with
``h_r = 1 / (Nr - 1/2)``, so the axis is never sampled while the wall
``r = 1`` is the last node.  The axial grid is ``z_k = (k - Nz/2) h_z``,
which contains ``z = 0`` (index ``Nz/2``) and is closed under ``z -> -z``
modulo the period.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

ODD = "odd"
EVEN = "even"
NONE = "none"
PARITIES = (ODD, EVEN, NONE)


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    Nr: int
    Nz: int
    z_period: float = 2.0 * np.pi

    def __post_init__(self):
        if self.Nz % 2:
            raise GridError("Nz must be even")
        if self.Nr < 8 or self.Nz < 8:
            raise GridError(f"grid too small: Nr={self.Nr}, Nz={self.Nz} (need >= 8)")
        if not self.z_period > 0:
            raise GridError("zPeriod must be positive")

    @property
    def hr(self) -> float:
        return 1.0 / (self.Nr - 0.5)

    @property
    def hz(self) -> float:
        return self.z_period / self.Nz

    @cached_property
    def r(self) -> np.ndarray:
        r = (np.arange(self.Nr) + 0.5) * self.hr
        r[-1] = 1.0
        return r

    @cached_property
    def z(self) -> np.ndarray:
        return (np.arange(self.Nz) - self.Nz // 2) * self.hz

    @property
    def x(self) -> np.ndarray:
        """Wall distance ``1 - r`` of the radial nodes."""
        return 1.0 - self.r

    @property
    def k0(self) -> int:
        """Index of the ``z = 0`` node."""
        return self.Nz // 2

    @cached_property
    def mirror(self) -> np.ndarray:
        """Index map ``k -> k'`` with ``z_k' = -z_k`` (mod period)."""
        return (2 * self.k0 - np.arange(self.Nz)) % self.Nz

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.r, self.z, indexing="ij")

    def flat_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened side-wall coordinates ``(x, y) = (1 - r, z)`` on the grid."""
        return np.meshgrid(self.x, self.z, indexing="ij")


def make_grid(Nr: int, Nz: int, z_period: float = 2.0 * np.pi) -> GridSpec:
    return GridSpec(int(Nr), int(Nz), float(z_period))


@dataclass(frozen=True)
class ScalarField:
    grid: GridSpec
    values: np.ndarray
    parity: str = NONE

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.Nr, self.grid.Nz):
            raise GridError(f"values shape {v.shape} does not match grid "
                            f"({self.grid.Nr}, {self.grid.Nz})")
        if self.parity not in PARITIES:
            raise GridError(f"unknown parity tag {self.parity!r}")
        object.__setattr__(self, "values", v)

    def with_values(self, values, parity=None) -> "ScalarField":
        return ScalarField(self.grid, values, self.parity if parity is None else parity)

    @classmethod
    def from_function(cls, grid, fn, parity=NONE):
        R, Z = grid.mesh()
        return cls(grid, np.broadcast_to(fn(R, Z), R.shape).copy(), parity)

    @classmethod
    def zeros(cls, grid, parity=NONE):
        return cls(grid, np.zeros((grid.Nr, grid.Nz)), parity)


@dataclass(frozen=True)
class FlatPoint:
    """A fluid point in flattened side-wall coordinates."""

    x: float
    y: float

    def __post_init__(self):
        if not self.x > 0:
            raise GridError("flat point must satisfy x > 0")

    @classmethod
    def wrapped(cls, x, y, z_period):
        return cls(x, (y + 0.5 * z_period) % z_period - 0.5 * z_period)


@dataclass(frozen=True)
class BoundaryTrace:
    t: float
    sigma: float
    a: float
    b: float
    c_curv: float
    lam: float
    A: float = field(init=False)
    B: float = field(init=False)
    R_ratio: float = 0.0
    grad_u_inf: float = 0.0

    def __post_init__(self):
        if not self.lam > 0:
            raise GridError("compression scale lambda must be positive")
        object.__setattr__(self, "A", self.lam * self.a)
        object.__setattr__(self, "B", np.sqrt(self.lam) * self.b)

    def rescaled(self, lam) -> "BoundaryTrace":
        return replace(self, lam=lam)


# --------------------------------------------------------------------------
# parity and quadrature

def even_part(f: ScalarField) -> np.ndarray:
    v = f.values
    return 0.5 * (v + v[:, f.grid.mirror])


def odd_project(f: ScalarField) -> ScalarField:
    v = f.values
    return f.with_values(0.5 * (v - v[:, f.grid.mirror]), ODD)


def even_project(f: ScalarField) -> ScalarField:
    return f.with_values(even_part(f), EVEN)


def _radial_weights(grid: GridSpec) -> np.ndarray:
    # composite trapezoid on {0, r_0, ..., r_{N-1} = 1}; integrand r^3 f vanishes at r = 0
    r = grid.r
    nodes = np.concatenate(([0.0], r))
    dr = np.diff(nodes)
    w = np.zeros(len(nodes))
    w[:-1] += 0.5 * dr
    w[1:] += 0.5 * dr
    return w[1:] * r**3


def weighted_integral5(f: ScalarField) -> float:
    """Integral of ``f r^3 dr dz`` over one period of the cylinder."""
    wr = _radial_weights(f.grid)
    return float(wr @ f.values.sum(axis=1) * f.grid.hz)


# --------------------------------------------------------------------------
# finite differences

def dz4(v: np.ndarray, hz: float) -> np.ndarray:
    """Fourth-order centred periodic z-derivative along the last axis."""
    return (8.0 * (np.roll(v, -1, -1) - np.roll(v, 1, -1))
            - (np.roll(v, -2, -1) - np.roll(v, 2, -1))) / (12.0 * hz)


def dzz4(v: np.ndarray, hz: float) -> np.ndarray:
    return (16.0 * (np.roll(v, -1, -1) + np.roll(v, 1, -1))
            - (np.roll(v, -2, -1) + np.roll(v, 2, -1)) - 30.0 * v) / (12.0 * hz**2)


def dr2(v: np.ndarray, hr: float) -> np.ndarray:
    """Second-order r-derivative: centred inside, even ghost at the axis,
    one-sided at the wall."""
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2.0 * hr)
    d[0] = (v[1] - v[0]) / (2.0 * hr)
    d[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * hr)
    return d


def _stencil_at(v: np.ndarray, k0: int, coeffs, offsets) -> float:
    n = v.shape[-1]
    return float(sum(c * v[(k0 + o) % n] for c, o in zip(coeffs, offsets)))


def wall_dz(v_wall: np.ndarray, grid: GridSpec) -> float:
    """Fourth-order centred z-derivative of a wall row at ``z = 0``."""
    return _stencil_at(v_wall, grid.k0, (1, -8, 8, -1), (-2, -1, 1, 2)) / (12.0 * grid.hz)


def wall_dzz(v_wall: np.ndarray, grid: GridSpec) -> float:
    return _stencil_at(v_wall, grid.k0, (-1, 16, -30, 16, -1),
                       (-2, -1, 0, 1, 2)) / (12.0 * grid.hz**2)


def core_mask(grid: GridSpec, lam: float, kappa: float) -> np.ndarray:
    """Nodes of the inner core ``{x + |y| <= kappa * lam}``."""
    X, Y = grid.flat_mesh()
    return X + np.abs(Y) <= kappa * lam * (1 + 1e-12)


def anisotropy_ratio(Gamma: ScalarField, lam: float, kappa: float = 0.5,
                     floor: float = 1e-3) -> float:
    """Max of ``|d_r Gamma / d_z Gamma|`` over the inner core, skipping nodes where
    ``|d_z Gamma|`` falls below ``floor`` times its core maximum."""
    g = Gamma.grid
    mask = core_mask(g, lam, kappa)
    gz = np.abs(dz4(Gamma.values, g.hz))[mask]
    gr = np.abs(dr2(Gamma.values, g.hr))[mask]
    if gz.size == 0 or gz.max() == 0.0:
        return 0.0
    keep = gz > floor * gz.max()
    return float(np.max(gr[keep] / gz[keep]))


def grad_inf(components, grid: GridSpec) -> float:
    out = 0.0
    for c in components:
        out = max(out, float(np.max(np.abs(dr2(c, grid.hr)))),
                  float(np.max(np.abs(dz4(c, grid.hz)))))
    return out


def boundary_traces(Gamma: ScalarField, G: ScalarField, u_z: ScalarField, lam: float,
                    t: float = 0.0, *, u_r: ScalarField | None = None,
                    kappa: float = 0.5) -> BoundaryTrace:
    """Wall-point quantities at ``(r, z) = (1, 0)``.

    sigma, a, b use the fourth-order centred z-stencil on the wall row and the
    curvature uses the matching second-derivative stencil.  ``grad_u_inf`` takes
    the swirl ``Gamma / r`` and, when given, ``u_r`` into account.
    """
    g = Gamma.grid
    if g.Nr < 3:
        raise GridError("grid too coarse near wall")
    sigma = -wall_dz(u_z.values[-1], g)
    a = wall_dz(G.values[-1], g)
    b = wall_dz(Gamma.values[-1], g)
    c = wall_dzz(Gamma.values[-1], g)
    comps = [u_z.values, Gamma.values / g.r[:, None]]
    if u_r is not None:
        comps.append(u_r.values)
    R = anisotropy_ratio(Gamma, lam, kappa)
    return BoundaryTrace(t=t, sigma=sigma, a=a, b=b, c_curv=c, lam=lam,
                         R_ratio=R, grad_u_inf=grad_inf(comps, g))
