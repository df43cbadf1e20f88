"""Explosive comparison system ``X' = alpha Y^2``, ``Y' = beta X Y``.

Along the flow ``I = Y^2 - (beta / alpha) X^2`` is conserved, which turns the
first equation into the Riccati equation ``X' = beta X^2 + alpha I`` and gives
the blow-up time in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp


class ComparisonError(ValueError):
    pass


class IntegrationFailure(ComparisonError):
    """The integrator could not resolve the trajectory (numerical, not input, failure)."""


@dataclass(frozen=True)
class ComparisonState:
    X: float
    Y: float
    alpha: float
    beta: float
    t: float = 0.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ComparisonError("alpha and beta must be positive")
        if self.X < 0 or self.Y < 0:
            raise ComparisonError("comparison states live in the quadrant X >= 0, Y >= 0")

    @property
    def invariant(self) -> float:
        return self.Y**2 - self.beta / self.alpha * self.X**2


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    halted: bool
    t_star_lower: float
    t_star_extrapolated: float
    invariant_drift: float

    def rows(self):
        return zip(self.t, self.X, self.Y)


def _riccati_tail(X0: float, I: float, alpha: float, beta: float) -> float:
    """Time for ``X' = beta X^2 + alpha I`` to reach infinity from ``X0``."""
    if I > 0:
        w = math.sqrt(alpha * beta * I)
        return (0.5 * math.pi - math.atan(X0 * math.sqrt(beta / (alpha * I)))) / w
    if I < 0:
        k = math.sqrt(alpha * -I / beta)
        if X0 <= k:
            return math.inf
        return math.log((X0 + k) / (X0 - k)) / (2.0 * beta * k)
    return math.inf if X0 == 0 else 1.0 / (beta * X0)


def blowup_time(s: ComparisonState) -> float:
    """Closed-form blow-up time measured from ``s.t = 0``.

    ``+inf`` is returned only when ``X0`` sits at or inside the attracting
    root of the Riccati equation, which cannot happen for ``Y0 > 0``.
    """
    if not s.Y > 0:
        raise ComparisonError("source amplitude must be positive")
    return _riccati_tail(s.X, s.invariant, s.alpha, s.beta)


def integrate(s: ComparisonState, t_end: float, tol: float = 1e-10,
              x_ceiling: float | None = None, t_eval=None) -> Trajectory:
    """Adaptive Dormand-Prince 8(5,3) integration, halting at ``X = x_ceiling``.

    ``x_ceiling`` defaults to ``1 / tol``.  When the ceiling halts the run the
    final time is a lower bound for the blow-up time, and the Riccati tail from
    the halting state gives an extrapolated blow-up time.
    """
    if not tol > 0:
        raise ComparisonError("tol must be positive")
    ceiling = 1.0 / tol if x_ceiling is None else x_ceiling
    al, be = s.alpha, s.beta
    I0 = s.invariant

    def rhs(_, u):
        return [al * u[1] ** 2, be * u[0] * u[1]]

    def hit(_, u):
        return u[0] - ceiling

    hit.terminal = True
    hit.direction = 1
    sol = solve_ivp(rhs, (s.t, s.t + t_end), [s.X, s.Y], method="DOP853", rtol=tol,
                    atol=tol * 1e-2, events=hit, t_eval=t_eval, dense_output=False)
    if sol.status == -1:
        raise IntegrationFailure(f"stiff/blow-up unresolved: {sol.message}")
    halted = sol.status == 1
    X, Y = sol.y
    if halted and t_eval is not None:
        tc, (Xc, Yc) = sol.t_events[0][0], sol.y_events[0][0]
        t = np.append(sol.t, tc)
        X, Y = np.append(X, Xc), np.append(Y, Yc)
    else:
        t = sol.t
    # relative to the size of the cancelling terms; |I0| alone is swamped by
    # round-off once X^2 ~ Y^2 >> |I0| near the ceiling
    scale = np.maximum(abs(I0), Y**2)
    drift = float(np.max(np.abs(Y**2 - be / al * X**2 - I0) / np.maximum(scale, 1e-300)))
    t_last = float(t[-1])
    t_star = t_last + _riccati_tail(float(X[-1]), I0, al, be) if halted else math.inf
    return Trajectory(t, X, Y, halted, t_last if halted else math.inf, t_star, drift)


# --------------------------------------------------------------------------
# comparison against measured traces

@dataclass(frozen=True)
class TraceComparison:
    c1_hat: float
    c2_hat: float
    dominated: bool
    margin_A: float
    margin_B: float
    comparison: tuple
    note: str = ""


def _fit_rates(t, A, B):
    """Conservative discrete margins ``min dA/dt / B^2`` and ``min dB/dt / (A B)``.

    Denominators use the larger endpoint value on each interval so that the
    fitted rate bounds the increment from below over the whole interval.
    """
    dt = np.diff(t)
    dA = np.diff(A) / dt
    dB = np.diff(B) / dt
    den1 = np.maximum(B[:-1] ** 2, B[1:] ** 2)
    den2 = np.maximum(A[:-1] * B[:-1], A[1:] * B[1:])
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(den1 > 0, dA / den1, np.nan)
        r2 = np.where(den2 > 0, dB / den2, np.nan)
    c1 = float(np.nanmin(r1)) if np.any(np.isfinite(r1)) else math.nan
    c2 = float(np.nanmin(r2)) if np.any(np.isfinite(r2)) else math.nan
    return c1, c2


def trace_comparison(t, A, B, c1_hat: float | None = None, c2_hat: float | None = None,
                     tol: float = 1e-9) -> TraceComparison:
    """Fit (or accept) comparison rates and test sample-wise domination.

    The comparison system starts from the first sample and is evaluated at the
    sample times; domination means ``A >= X - tol`` and ``B >= Y - tol``
    relative to the sample scale.  Degenerate series give ``nan`` rates and no
    domination claim.
    """
    t = np.asarray(t, float)
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    if t.size < 2:
        raise ComparisonError("need at least two samples")
    if np.any(np.diff(t) <= 0):
        raise ComparisonError("time column must be strictly increasing")
    f1, f2 = _fit_rates(t, A, B)
    c1 = f1 if c1_hat is None else c1_hat
    c2 = f2 if c2_hat is None else c2_hat
    if not (np.isfinite(c1) and np.isfinite(c2)):
        return TraceComparison(c1, c2, False, math.nan, math.nan, (), "degenerate series")
    if c1 <= 0 or c2 <= 0 or A[0] < 0 or B[0] <= 0:
        return TraceComparison(c1, c2, False, math.nan, math.nan, (),
                               "nonpositive rates or data: no explosive comparison")
    s0 = ComparisonState(float(A[0]), float(B[0]), c1, c2, float(t[0]))
    traj = integrate(s0, float(t[-1] - t[0]), tol=1e-11, x_ceiling=1e300, t_eval=t)
    n = traj.t.size
    X, Y = traj.X[:n], traj.Y[:n]
    scale_A = max(float(np.max(np.abs(A))), 1e-300)
    scale_B = max(float(np.max(np.abs(B))), 1e-300)
    mA = float(np.min(A[:n] - X)) / scale_A
    mB = float(np.min(B[:n] - Y)) / scale_B
    return TraceComparison(c1, c2, bool(mA >= -tol and mB >= -tol), mA, mB,
                           tuple(zip(traj.t, X, Y)))
