"""Five-dimensional stream-function recovery and meridional velocity.

Solves ``-Delta_5 phi = G`` with ``phi = 0`` on the wall and an even (zero
flux) reflection at the axis, where
``Delta_5 = d_r^2 + (3/r) d_r + d_z^2``.  The z-direction is diagonalised by
a real FFT; each Fourier mode is a tridiagonal radial system.  Second-order
differences in r, spectral in z.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import EVEN, NONE, ODD, GridSpec, ScalarField, dr2


class EllipticError(RuntimeError):
    def __init__(self, msg, residuals=()):
        super().__init__(msg)
        self.residuals = list(residuals)


@dataclass(frozen=True)
class PoissonProblem:
    source: ScalarField
    wall_value: float = 0.0

    def __post_init__(self):
        if self.wall_value != 0.0:
            raise ValueError("the wall Dirichlet value is fixed to 0")
        if not np.all(np.isfinite(self.source.values)):
            raise ValueError("Poisson source must be finite")

    @property
    def grid(self) -> GridSpec:
        return self.source.grid


@dataclass(frozen=True)
class MeridionalVelocity:
    u_r: ScalarField
    u_z: ScalarField
    parity_consistent: bool = False

    @property
    def grid(self) -> GridSpec:
        return self.u_r.grid

    @classmethod
    def zeros(cls, grid):
        return cls(ScalarField.zeros(grid, EVEN), ScalarField.zeros(grid, ODD), True)


def _wavenumbers(grid: GridSpec) -> np.ndarray:
    return 2.0 * np.pi * np.fft.rfftfreq(grid.Nz, d=grid.hz)


def spectral_dz(v: np.ndarray, grid: GridSpec, order: int = 1) -> np.ndarray:
    k = _wavenumbers(grid)
    vh = np.fft.rfft(v, axis=-1)
    if order == 1:
        mult = 1j * k
        if grid.Nz % 2 == 0:
            mult[-1] = 0.0  # Nyquist mode has no odd derivative
    else:
        mult = (1j * k) ** order
    return np.fft.irfft(vh * mult, n=grid.Nz, axis=-1)


def _radial_coeffs(grid: GridSpec):
    """Sub/diag/super coefficients of the radial part on the unknown rows 0..Nr-2."""
    h = grid.hr
    r = grid.r[:-1]
    sub = 1.0 / h**2 - 1.5 / (h * r)
    sup = 1.0 / h**2 + 1.5 / (h * r)
    diag = np.full_like(r, -2.0 / h**2)
    # axis reflection phi_{-1} = phi_0
    diag[0] += sub[0]
    sub = sub.copy()
    sub[0] = 0.0
    return sub, diag, sup


def radial_delta5(v: np.ndarray, grid: GridSpec) -> np.ndarray:
    """``d_r^2 v + (3/r) d_r v`` row by row (axis reflection, one-sided wall row)."""
    h = grid.hr
    r = grid.r
    out = np.empty_like(v)
    ghost = v[0]
    vm = np.concatenate([ghost[None], v[:-2]])
    vp = v[1:]
    vc = v[:-1]
    out[:-1] = (vp - 2 * vc + vm) / h**2 + 3.0 / r[:-1, None] * (vp - vm) / (2 * h)
    d2 = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / h**2
    d1 = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    out[-1] = d2 + 3.0 * d1
    return out


def apply_delta5(phi: ScalarField) -> ScalarField:
    g = phi.grid
    out = radial_delta5(phi.values, g) + spectral_dz(phi.values, g, order=2)
    return phi.with_values(out)


def _thomas(sub, diag, sup, rhs):
    """Batched tridiagonal solve; ``diag`` and ``rhs`` have shape (n, m)."""
    n = rhs.shape[0]
    cp = np.empty(diag.shape, dtype=float)
    dp = np.empty(rhs.shape, dtype=rhs.dtype)
    cp[0] = sup[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        den = diag[i] - sub[i] * cp[i - 1]
        cp[i] = sup[i] / den
        dp[i] = (rhs[i] - sub[i] * dp[i - 1]) / den
    x = np.empty_like(dp)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def solve_poisson5(p: PoissonProblem | ScalarField, *, tol: float = 1e-10,
                   check: bool = True) -> ScalarField:
    """Return ``phi`` with ``-Delta_5 phi = G`` and ``phi = 0`` at ``r = 1``.

    The residual ``||Delta_5 phi + G||_inf`` over the interior rows, relative to
    ``||G||_inf``, is measured with :func:`apply_delta5`; exceeding ``tol``
    raises :class:`EllipticError`.
    """
    if isinstance(p, ScalarField):
        p = PoissonProblem(p)
    G = p.source
    g = G.grid
    k = _wavenumbers(g)
    sub, diag, sup = _radial_coeffs(g)
    Gh = np.fft.rfft(G.values[:-1], axis=-1)
    D = diag[:, None] - (k**2)[None, :]
    phih = _thomas(sub, D, sup, -Gh)
    phi = np.zeros((g.Nr, g.Nz))
    phi[:-1] = np.fft.irfft(phih, n=g.Nz, axis=-1)
    parity = G.parity if G.parity in (ODD, EVEN) else NONE
    out = ScalarField(g, phi, parity)
    if check:
        scale = max(float(np.max(np.abs(G.values))), 1e-300)
        res = float(np.max(np.abs(apply_delta5(out).values[:-1] + G.values[:-1]))) / scale
        if not np.isfinite(res) or res > tol:
            raise EllipticError(f"Poisson residual {res:.3e} exceeds {tol:.1e}", [res])
    return out


def recover_velocity(phi: ScalarField) -> MeridionalVelocity:
    """``u_r = -r d_z phi``, ``u_z = 2 phi + r d_r phi``."""
    g = phi.grid
    r = g.r[:, None]
    ur = -r * spectral_dz(phi.values, g)
    uz = 2.0 * phi.values + r * dr2(phi.values, g.hr)
    if phi.parity == ODD:
        return MeridionalVelocity(ScalarField(g, ur, EVEN), ScalarField(g, uz, ODD), True)
    if phi.parity == EVEN:
        return MeridionalVelocity(ScalarField(g, ur, ODD), ScalarField(g, uz, EVEN), True)
    return MeridionalVelocity(ScalarField(g, ur), ScalarField(g, uz), False)


def velocity_from_G(G: ScalarField, **kw) -> tuple[ScalarField, MeridionalVelocity]:
    phi = solve_poisson5(PoissonProblem(G), **kw)
    return phi, recover_velocity(phi)


def divergence_field(v: MeridionalVelocity) -> np.ndarray:
    g = v.grid
    r = g.r[:, None]
    return dr2(r * v.u_r.values, g.hr) / r + spectral_dz(v.u_z.values, g)


def divergence_residual(v: MeridionalVelocity) -> float:
    """Sup-norm of the discrete ``(1/r) d_r (r u_r) + d_z u_z``."""
    return float(np.max(np.abs(divergence_field(v))))
