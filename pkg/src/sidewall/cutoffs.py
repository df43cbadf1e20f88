"""Smooth compactly supported cutoffs used by packets and initial data."""

from __future__ import annotations

import numpy as np


def _f(t):
    t = np.asarray(t, float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, monotone in between."""
    a = _f(t)
    b = _f(1.0 - np.asarray(t, float))
    return a / (a + b)


def bump_cutoff(s):
    """Even C-infinity profile equal to 1 on ``|s| <= 1/2`` and 0 on ``|s| >= 1``."""
    s = np.asarray(s, float)
    out = smooth_step(2.0 * (1.0 - np.abs(s)))
    return out if out.ndim else float(out)


def diagonal_window(x, y, lam, delta_c, slope=1.0):
    """``bump(x / lam) * bump((y / x - slope) / delta_c)`` for ``x > 0``, else 0."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(x > 0, y / np.where(x > 0, x, 1.0), np.inf)
    return np.where(x > 0, bump_cutoff(x / lam) * bump_cutoff((s - slope) / delta_c), 0.0)


def dyadic_window(x, s, lam_j, delta_nu, m):
    """Packet cutoff with plateau ``[lam_j, 2 lam_j] x [m - delta_nu, m + delta_nu]``.

    The radial factor is a bump in ``log2(x / lam_j) - 1/2``, so the support is
    ``(lam_j / sqrt2, 2 sqrt2 lam_j)``; the angular support is ``|s - m| < 2 delta_nu``.
    """
    x = np.asarray(x, float)
    with np.errstate(divide="ignore"):
        u = np.where(x > 0, np.log2(np.where(x > 0, x, 1.0) / lam_j) - 0.5, np.inf)
    return bump_cutoff(u) * bump_cutoff((np.asarray(s, float) - m) / (2.0 * delta_nu))
