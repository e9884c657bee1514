"""Finite differences and the Wirtinger derivatives built on them.

Interior nodes use centred stencils; non-periodic edges use one-sided
stencils one point wider than the minimum (one order more accurate), which
keeps the edge error constant comparable to the interior one. The global
error is O(h^p) with ``p = accuracy`` (2 by default, 4 available).
"""
from functools import lru_cache

import numpy as np

from .core import Grid2D, GridError


@lru_cache(maxsize=None)
def stencil_weights(offsets: tuple, deriv: int) -> np.ndarray:
    """Weights ``w`` with ``sum w_k f(x + o_k h) = h^deriv f^(deriv)(x) + O(h^len)``."""
    o = np.asarray(offsets, dtype=float)
    m = len(o)
    V = np.vander(o, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[deriv] = float(np.prod(np.arange(1, deriv + 1)))
    w = np.linalg.solve(V, rhs)
    w.setflags(write=False)
    return w


def _diff(f, h, axis, periodic, deriv, accuracy):
    if accuracy not in (2, 4):
        raise ValueError("accuracy must be 2 or 4")
    f = np.asarray(f)
    n = f.shape[axis]
    half = accuracy // 2
    centred = tuple(range(-half, half + 1))
    wc = stencil_weights(centred, deriv)
    if periodic:
        if n < len(centred):
            raise GridError(f"need at least {len(centred)} nodes per axis")
        # weights sum to zero, so differencing against f annihilates constants exactly
        return sum(w * (np.roll(f, -o, axis) - f) for o, w in zip(centred, wc)
                   if w != 0.0 and o != 0) / h**deriv
    m = accuracy + deriv + 2
    if n < m:
        raise GridError(f"need at least {m} nodes per axis")
    f = np.moveaxis(f, axis, 0)
    out = np.zeros_like(f, dtype=np.result_type(f, float))
    mid = f[half:n - half]
    for o, w in zip(centred, wc):
        if w != 0.0 and o != 0:
            out[half:n - half] += w * (f[half + o:n - half + o] - mid)
    for i in range(half):
        wl = stencil_weights(tuple(range(-i, m - i)), deriv)
        out[i] = np.tensordot(wl, f[:m] - f[i], axes=(0, 0))
        wr = stencil_weights(tuple(range(i - m + 1, i + 1)), deriv)
        out[n - 1 - i] = np.tensordot(wr, f[n - m:] - f[n - 1 - i], axes=(0, 0))
    return np.moveaxis(out / h**deriv, 0, axis)


def d_dx(f, grid: Grid2D, accuracy: int = 2):
    return _diff(f, grid.hx, 1, grid.periodic_x, 1, accuracy)


def d_dy(f, grid: Grid2D, accuracy: int = 2):
    return _diff(f, grid.hy, 0, grid.periodic_y, 1, accuracy)


def d2_dx2(f, grid: Grid2D, accuracy: int = 2):
    return _diff(f, grid.hx, 1, grid.periodic_x, 2, accuracy)


def d2_dy2(f, grid: Grid2D, accuracy: int = 2):
    return _diff(f, grid.hy, 0, grid.periodic_y, 2, accuracy)


def d_z(f, grid: Grid2D, accuracy: int = 2):
    """``(d/dx - i d/dy) / 2``; with accuracy 2 exact on polynomials of degree <= 2."""
    return 0.5 * (d_dx(f, grid, accuracy) - 1j * d_dy(f, grid, accuracy))


def d_zbar(f, grid: Grid2D, accuracy: int = 2):
    """``(d/dx + i d/dy) / 2``."""
    return 0.5 * (d_dx(f, grid, accuracy) + 1j * d_dy(f, grid, accuracy))


def d_zzbar(f, grid: Grid2D, accuracy: int = 2):
    """``d^2 / dz dzbar``, i.e. a quarter of the Laplacian."""
    return 0.25 * (d2_dx2(f, grid, accuracy) + d2_dy2(f, grid, accuracy))
