"""Fourier-spectral operators on doubly periodic grids and lattice cells.

Fields that are only quasi-periodic (``f(z + lambda_k) = kappa_k f(z)``) are
handled through a Bloch twist: ``f = exp(i q.x) g`` with ``g`` periodic and
``exp(i q_k L_k) = kappa_k``. ``twist`` arguments give ``(kappa_x, kappa_y)``;
each may be a scalar or an array broadcasting against the trailing
(component) axes of the field.
"""
from __future__ import annotations

import numpy as np

from .core import Grid2D, GridError


class IncompatibleSourceError(GridError):
    """The right-hand side of a dbar-problem has a nonzero mean."""


def _periods(grid: Grid2D):
    if grid.periodic_x and grid.periodic_y:
        return grid.nx * grid.hx, grid.ny * grid.hy, grid.nx, grid.ny
    if grid.is_closed_cell:
        return (grid.nx - 1) * grid.hx, (grid.ny - 1) * grid.hy, grid.nx - 1, grid.ny - 1
    raise GridError("spectral operators need a doubly periodic grid or a lattice cell")


def bloch_wavenumber(kappa, period):
    """``q`` with ``exp(i q period) = kappa`` (principal branch)."""
    kappa = np.asarray(kappa, dtype=complex)
    return np.log(kappa) / (1j * period)


def _fundamental(f, grid):
    f = np.asarray(f)
    if grid.is_closed_cell:
        return f[:-1, :-1]
    return f


def _close(g, grid, kx, ky):
    """Append the wrap row/column of a lattice cell from the fundamental domain."""
    if not grid.is_closed_cell:
        return g
    ny, nx = g.shape[:2]
    out = np.empty((ny + 1, nx + 1) + g.shape[2:], dtype=g.dtype)
    out[:ny, :nx] = g
    out[:ny, nx] = kx * g[:, 0]
    out[ny, :] = ky * out[0, :]
    return out


def spectral_apply(f, grid: Grid2D, symbol, twist=(1.0, 1.0)):
    """Apply the Fourier multiplier ``symbol(kx, ky)`` to ``f``.

    ``kx`` and ``ky`` include the Bloch shift of each component.
    """
    lx, ly, nx, ny = _periods(grid)
    g = np.asarray(_fundamental(f, grid), dtype=complex)
    trailing = g.shape[2:]
    kap_x = np.broadcast_to(np.asarray(twist[0], dtype=complex), trailing)
    kap_y = np.broadcast_to(np.asarray(twist[1], dtype=complex), trailing)
    qx = bloch_wavenumber(kap_x, lx)
    qy = bloch_wavenumber(kap_y, ly)
    xs = grid.hx * np.arange(nx)
    ys = grid.hy * np.arange(ny)
    extra = (None,) * len(trailing)
    X = xs[(None, slice(None)) + extra]
    Y = ys[(slice(None), None) + extra]
    phase = np.exp(1j * (qx * X + qy * Y))
    twisted = np.any(qx != 0) or np.any(qy != 0)
    G = np.fft.fft2(g / phase if twisted else g, axes=(0, 1))
    kx = 2 * np.pi * np.fft.fftfreq(nx, grid.hx)
    ky = 2 * np.pi * np.fft.fftfreq(ny, grid.hy)
    KX = kx[(None, slice(None)) + extra] + qx
    KY = ky[(slice(None), None) + extra] + qy
    out = np.fft.ifft2(symbol(KX, KY) * G, axes=(0, 1))
    if twisted:
        out = out * phase
    return _close(out, grid, kap_x, kap_y)


def d_dx(f, grid, twist=(1.0, 1.0), order=1):
    return spectral_apply(f, grid, lambda kx, ky: (1j * kx) ** order, twist)


def d_dy(f, grid, twist=(1.0, 1.0), order=1):
    return spectral_apply(f, grid, lambda kx, ky: (1j * ky) ** order, twist)


def d_z(f, grid, twist=(1.0, 1.0), order=1):
    """Spectral ``d^order/dz^order``; ``d/dz`` has symbol ``(i kx + ky)/2``."""
    return spectral_apply(f, grid, lambda kx, ky: (0.5 * (1j * kx + ky)) ** order, twist)


def d_zbar(f, grid, twist=(1.0, 1.0), order=1):
    return spectral_apply(f, grid, lambda kx, ky: (0.5 * (1j * kx - ky)) ** order, twist)


def d_zzbar(f, grid, twist=(1.0, 1.0)):
    return spectral_apply(f, grid, lambda kx, ky: -0.25 * (kx**2 + ky**2), twist)


def solve_dbar(g, grid: Grid2D, rtol: float = 1e-10):
    """Zero-mean solution ``F`` of ``dF/dzbar = g`` on a doubly periodic grid or lattice cell."""
    lx, ly, nx, ny = _periods(grid)
    g = np.asarray(_fundamental(g, grid), dtype=complex)
    norm = np.abs(g).max() if g.size else 0.0
    mean = np.abs(g.mean(axis=(0, 1))).max(initial=0.0)
    if norm > 0 and mean > rtol * norm:
        raise IncompatibleSourceError(f"source mean {mean:.3e} exceeds {rtol:g} * max|g|")
    G = np.fft.fft2(g, axes=(0, 1))
    kx = 2 * np.pi * np.fft.fftfreq(nx, lx / nx)
    ky = 2 * np.pi * np.fft.fftfreq(ny, ly / ny)
    KY, KX = np.meshgrid(ky, kx, indexing="ij")
    sym = 0.5 * (1j * KX - KY)
    sym[0, 0] = 1.0
    sym = sym.reshape(sym.shape + (1,) * (g.ndim - 2))
    F = G / sym
    F[0, 0] = 0.0
    return _close(np.fft.ifft2(F, axes=(0, 1)), grid, 1.0, 1.0)


def antiderivative_1d(f, h, kappa, eval_points):
    """Spectral antiderivative of a quasi-periodic sequence.

    ``f`` holds ``n`` samples (axis 0) over one period ``n h``; component
    ``c`` satisfies ``f(x + n h) = kappa[c] f(x)``. Returns an antiderivative
    evaluated at ``eval_points`` (positions relative to the first sample).
    When ``kappa = 1`` the mean mode contributes a linear term.
    """
    f = np.asarray(f, dtype=complex)
    n = f.shape[0]
    period = n * h
    trailing = f.shape[1:]
    kap = np.broadcast_to(np.asarray(kappa, dtype=complex), trailing)
    q = bloch_wavenumber(kap, period)
    xs = h * np.arange(n)
    extra = (None,) * len(trailing)
    phase = np.exp(1j * q * xs[(slice(None),) + extra])
    coef = np.fft.fft(f / phase, axis=0) / n
    k = 2 * np.pi * np.fft.fftfreq(n, h)
    wav = k[(slice(None),) + extra] + q  # (n, *trailing)
    small = np.abs(wav) < 1e-12 / h
    safe = np.where(small, 1.0, wav)
    pts = np.asarray(eval_points, dtype=float)
    # E[p, m, ...] = exp(i wav_m x_p) / (i wav_m)  or x_p for the zero mode
    E = np.exp(1j * wav[None] * pts[(slice(None), None) + extra]) / (1j * safe[None])
    E = np.where(small[None], pts[(slice(None), None) + extra] + 0j, E)
    return np.einsum("pm...,m...->p...", E, coef)
