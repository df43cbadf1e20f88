"""Tensor-product cubic Lagrange interpolation on the cylinder grid.

Periodic in z; at the axis and the wall the four-point stencil is shifted
inward (one-sided).  Used both by the semi-Lagrangian transport and by the
packet quadratures, which sample fields off the grid.
"""

from __future__ import annotations

import numpy as np

from .grid import GridSpec, ScalarField


def _lagrange4(t):
    # weights for nodes at offsets 0, 1, 2, 3 evaluated at fractional position t
    return (
        -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0,
        t * (t - 2.0) * (t - 3.0) / 2.0,
        -t * (t - 1.0) * (t - 3.0) / 2.0,
        t * (t - 1.0) * (t - 2.0) / 6.0,
    )


def _index_coords(grid: GridSpec, r, z):
    pi = np.clip((np.asarray(r, float) / grid.hr) - 0.5, 0.0, grid.Nr - 1.0)
    pk = (np.asarray(z, float) / grid.hz + grid.k0) % grid.Nz
    return pi, pk


def cubic_sample(values: np.ndarray, grid: GridSpec, r, z, *, limit: bool = False,
                 clamped: list | None = None) -> np.ndarray:
    """Sample grid ``values`` at physical points ``(r, z)``.

    With ``limit`` the result is clipped to the range of the 2x2 cell that
    contains the point, which removes cubic overshoot.  Points with ``r``
    outside ``[r_0, 1]`` are clamped; their count is appended to ``clamped``
    when a list is supplied.
    """
    r = np.asarray(r, float)
    if clamped is not None:
        clamped.append(int(np.count_nonzero((r > 1.0) | (r < grid.r[0]))))
    pi, pk = _index_coords(grid, r, z)
    Nr, Nz = grid.Nr, grid.Nz

    i0 = np.clip(np.floor(pi).astype(np.intp) - 1, 0, Nr - 4)
    ti = pi - i0
    k1 = np.floor(pk).astype(np.intp)
    tk = pk - (k1 - 1)
    wr = _lagrange4(ti)
    wz = _lagrange4(tk)

    out = np.zeros(np.broadcast(pi, pk).shape)
    cols = [(k1 - 1 + b) % Nz for b in range(4)]
    for a in range(4):
        row = i0 + a
        acc = wz[0] * values[row, cols[0]]
        for b in range(1, 4):
            acc = acc + wz[b] * values[row, cols[b]]
        out += wr[a] * acc

    if limit:
        ia = np.minimum(np.floor(pi).astype(np.intp), Nr - 2)
        ka = k1 % Nz
        kb = (k1 + 1) % Nz
        corners = np.stack([values[ia, ka], values[ia, kb],
                            values[ia + 1, ka], values[ia + 1, kb]])
        out = np.clip(out, corners.min(axis=0), corners.max(axis=0))
    return out


def sample_flat(f: ScalarField, x, y) -> np.ndarray:
    """Sample a field at flattened side-wall coordinates ``(x, y) = (1 - r, z)``."""
    return cubic_sample(f.values, f.grid, 1.0 - np.asarray(x, float), y)
