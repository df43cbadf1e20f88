"""Side-wall kernels and their constants.

The 5D fundamental solution of ``-Delta`` is ``c5 |X|^-3`` with
``c5 = 1 / ((n - 2) |S^4|) = 1 / (8 pi^2)``.  Reflecting across the wall gives
the half-space Dirichlet Green function; its mixed boundary derivative is
``C5 xi zeta / R^7`` with ``C5 = 30 c5``, and integrating out the three
transverse directions leaves ``C0 xy / (x^2 + y^2)^2`` with
``C0 = C5 * 8 pi / 15 = 2 / pi``.  Every constant here has an independent
quadrature or finite-difference check below.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

C5_FUNDAMENTAL = 1.0 / (8.0 * np.pi**2)
C5_MIXED = 30.0 * C5_FUNDAMENTAL
ETA_REDUCTION_EXACT = 8.0 * np.pi / 15.0
C0_EXACT = 2.0 / np.pi


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class KernelPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.x > 0:
            raise KernelError("kernel points need x > 0")


@dataclass(frozen=True)
class LiftedPoint5:
    xi: float
    zeta: float
    eta: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "eta", tuple(float(e) for e in self.eta))
        if len(self.eta) != 3 or not np.all(np.isfinite([self.xi, self.zeta, *self.eta])):
            raise KernelError("lifted point needs finite (xi, zeta, eta in R^3)")

    def as_array(self) -> np.ndarray:
        return np.array([self.xi, self.zeta, *self.eta])


# --------------------------------------------------------------------------
# the two-variable kernel K0 = xy / (x^2 + y^2)^2

def k0(x, y):
    """Vectorised unit-constant kernel; returns 0 at the origin."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    rho2 = x * x + y * y
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(rho2 > 0, x * y / np.where(rho2 > 0, rho2, 1.0) ** 2, 0.0)
    return out


def k0_eval(p: KernelPoint | tuple) -> float:
    x, y = (p.x, p.y) if isinstance(p, KernelPoint) else p
    if x == 0 and y == 0:
        raise KernelError("kernel singular at origin")
    return float(k0(x, y))


def k0_grad(x, y):
    rho2 = x * x + y * y
    rho6 = rho2**3
    return y * (y * y - 3 * x * x) / rho6, x * (x * x - 3 * y * y) / rho6


def hyperbolic_derivative(x, y, sigma):
    """``V_sigma K0 = (sigma x d_x - sigma y d_y) K0`` with analytic derivatives."""
    kx, ky = k0_grad(x, y)
    return sigma * (x * kx - y * ky)


def k0_transport_residual(p: KernelPoint | tuple, sigma: float) -> float:
    x, y = (p.x, p.y) if isinstance(p, KernelPoint) else p
    if x == 0 and y == 0:
        raise KernelError("kernel singular at origin")
    rho2 = x * x + y * y
    return float(hyperbolic_derivative(x, y, sigma)
                 + 4.0 * sigma * (x * x - y * y) / rho2 * k0(x, y))


def cone_transport_constant(delta_c: float) -> float:
    """Constant ``C`` in ``|V_sigma K0| <= C delta_c sigma K0`` on ``|y/x - 1| <= delta_c``."""
    return 4.0 * (2.0 + delta_c) / (2.0 - 2.0 * delta_c + delta_c**2)


# --------------------------------------------------------------------------
# 5D half-space objects

def _green_raw(X, Xi):
    d = X - Xi
    Xs = Xi.copy()
    Xs[0] = -Xs[0]
    ds = X - Xs
    return C5_FUNDAMENTAL * (np.dot(d, d) ** -1.5 - np.dot(ds, ds) ** -1.5)


def halfspace_green(X: LiftedPoint5, Xi: LiftedPoint5) -> float:
    """Reflected Dirichlet Green function ``c5 (|X - Xi|^-3 - |X - Xi*|^-3)``."""
    if X.xi < 0 or Xi.xi < 0:
        raise KernelError("half-space points need xi >= 0")
    a, b = X.as_array(), Xi.as_array()
    if np.array_equal(a, b):
        raise KernelError("coincident points")
    return float(_green_raw(a, b))


def mixed_boundary_kernel(Xi: LiftedPoint5) -> float:
    if Xi.xi < 0:
        raise KernelError("mixed kernel needs xi >= 0")
    R2 = Xi.xi**2 + Xi.zeta**2 + sum(e * e for e in Xi.eta)
    if R2 == 0:
        raise KernelError("boundary source at the evaluation point")
    return float(C5_MIXED * Xi.xi * Xi.zeta * R2**-3.5)


def mixed_kernel_fd(Xi: LiftedPoint5, h: float | None = None) -> float:
    """Finite-difference oracle for ``d_x d_y G_D`` at the wall origin.

    ``G_D`` is odd in the observation coordinate x, so ``G_D(h)/h`` is an even
    expansion in h; central differences in y.  One Richardson step in h.
    """
    a = Xi.as_array()
    scale = np.sqrt(np.dot(a, a))
    h = 1e-3 * scale if h is None else h

    def D(hh):
        e0 = np.zeros(5)
        ex = e0.copy()
        ex[0] = hh
        ey = e0.copy()
        ey[1] = hh
        return (_green_raw(ex + ey, a) - _green_raw(ex - ey, a)) / (2.0 * hh * hh)

    return float((4.0 * D(h / 2) - D(h)) / 3.0)


# --------------------------------------------------------------------------
# transverse reduction and the effective constant

def eta_integral(s: float, epsabs: float = 1e-13) -> float:
    """``int_{R^3} (s^2 + |eta|^2)^{-7/2} d eta`` by adaptive radial quadrature."""
    val, err = integrate.quad(lambda t: 4 * np.pi * t * t * (s * s + t * t) ** -3.5,
                              0.0, np.inf, epsabs=epsabs * s**-4, epsrel=1e-13, limit=200)
    if not err <= 1e-10 * max(abs(val), 1.0):
        raise KernelError(f"eta quadrature error estimate {err:.2e} too large")
    return float(val)


def eta_reduction_constant() -> float:
    """``C`` in ``int (xi^2 + zeta^2 + |eta|^2)^{-7/2} d eta = C (xi^2 + zeta^2)^-2``."""
    return eta_integral(1.0)


def effective_constant() -> float:
    return C5_MIXED * eta_reduction_constant()


def effective_kernel_oracle(xi: float, zeta: float, epsrel: float = 1e-10) -> float:
    """Cartesian 3D quadrature of the mixed kernel over the transverse directions."""
    s2 = xi * xi + zeta * zeta

    # each half-line mapped to [0, 1) by e = t / (1 - t)
    def f(t1, t2, t3):
        q = 1.0 / ((1.0 - t1) * (1.0 - t2) * (1.0 - t3))
        e1, e2, e3 = t1 / (1 - t1), t2 / (1 - t2), t3 / (1 - t3)
        return (s2 + e1 * e1 + e2 * e2 + e3 * e3) ** -3.5 * q * q

    opts = {"epsabs": 0.0, "epsrel": epsrel, "limit": 100}
    # QUADPACK flags round-off in its extrapolation table at this tolerance even
    # though the result is exact to ~1e-15; the caller compares against 2/pi.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.nquad(f, [[0.0, 1.0]] * 3, opts=[opts] * 3)
    return float(C5_MIXED * xi * zeta * 8.0 * val)


# --------------------------------------------------------------------------
# half-space consistency of the solver's compression rate

@dataclass(frozen=True)
class SigmaConsistency:
    ratio: float
    sigma_solver: float
    sigma_model: float
    H: float


def sigma_consistency(G, phi, lam: float) -> SigmaConsistency:
    """Compare the solver's wall compression with ``C0 * 2 * H_lam[G]``.

    The factor 2 accounts for the mirrored lower half-packet of an odd source.
    """
    from .elliptic import recover_velocity
    from .grid import wall_dz
    from .packets import hyperbolic_mass

    H = hyperbolic_mass(G, lam)
    if H == 0.0:
        raise KernelError("degenerate packet")
    v = recover_velocity(phi)
    sigma = -wall_dz(v.u_z.values[-1], G.grid)
    model = C0_EXACT * 2.0 * H
    return SigmaConsistency(sigma / model, sigma, model, H)


# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckRow:
    name: str
    value: float
    reference: float
    tol: float
    relative: bool = False

    @property
    def error(self) -> float:
        return abs(self.value - self.reference)

    @property
    def passed(self) -> bool:
        scale = abs(self.reference) if self.relative else 1.0
        return bool(self.error <= self.tol * scale)


def verify_kernels(seed: int = 0, n_points: int = 10_000, n_fd: int = 100) -> list[CheckRow]:
    """Run every kernel identity against its oracle; one row per identity."""
    rng = np.random.default_rng(seed)
    rows = [
        CheckRow("eta_reduction_constant", eta_reduction_constant(), ETA_REDUCTION_EXACT, 1e-8),
        CheckRow("effective_constant", effective_constant(), C0_EXACT, 1e-8),
        CheckRow("effective_kernel_oracle(1,1)", effective_kernel_oracle(1.0, 1.0),
                 C0_EXACT * 0.25, 1e-6, relative=True),
        CheckRow("effective_kernel_oracle(1,2)", effective_kernel_oracle(1.0, 2.0),
                 C0_EXACT * 2.0 / 25.0, 1e-6, relative=True),
    ]
    x = 10.0 ** rng.uniform(-1, 1, n_points)
    y = 10.0 ** rng.uniform(-1, 1, n_points) * rng.choice([-1.0, 1.0], n_points)
    sig = rng.uniform(-5, 5, n_points)
    vk = hyperbolic_derivative(x, y, sig)
    res = vk + 4.0 * sig * (x * x - y * y) / (x * x + y * y) * k0(x, y)
    rows.append(CheckRow("k0_transport_residual (relative, max)",
                         float(np.max(np.abs(res) / (np.abs(vk) + np.abs(sig * k0(x, y))))),
                         0.0, 1e-13))
    worst = 0.0
    for dc in (0.05, 0.1, 0.2):
        s = rng.uniform(1 - dc, 1 + dc, n_points)
        xc = 10.0 ** rng.uniform(-2, 0, n_points)
        ratio = np.abs(hyperbolic_derivative(xc, s * xc, 1.0)) / (dc * k0(xc, s * xc))
        worst = max(worst, float(np.max(ratio / cone_transport_constant(dc))))
    rows.append(CheckRow("cone bound |V K0| / (C dc sigma K0), max", worst, 0.0, 1.0))
    rel = 0.0
    for _ in range(n_fd):
        Xi = LiftedPoint5(rng.uniform(0.2, 2.0), rng.uniform(-2.0, 2.0),
                          tuple(rng.uniform(-1.0, 1.0, 3)))
        exact = mixed_boundary_kernel(Xi)
        rel = max(rel, abs(mixed_kernel_fd(Xi) - exact) / abs(exact))
    rows.append(CheckRow("mixed kernel vs FD of halfspace_green (rel, max)", rel, 0.0, 1e-6))
    sym = 0.0
    wall = 0.0
    for _ in range(100):
        A = LiftedPoint5(rng.uniform(0.1, 2), rng.uniform(-2, 2), tuple(rng.uniform(-1, 1, 3)))
        B = LiftedPoint5(rng.uniform(0.1, 2), rng.uniform(-2, 2), tuple(rng.uniform(-1, 1, 3)))
        g = halfspace_green(A, B)
        sym = max(sym, abs(g - halfspace_green(B, A)) / abs(g))
        W = LiftedPoint5(0.0, A.zeta, A.eta)
        wall = max(wall, abs(halfspace_green(W, B)))
    rows.append(CheckRow("halfspace_green symmetry (rel, max)", sym, 0.0, 1e-13))
    rows.append(CheckRow("halfspace_green on wall (max)", wall, 0.0, 1e-15))
    return rows
