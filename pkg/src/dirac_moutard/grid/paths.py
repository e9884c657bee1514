"""Quadrature of 1-forms along grid paths."""
from __future__ import annotations

import numpy as np

from .. import _kernels
from .core import DomainError, FormField, Grid2D, GridError, GridPath
from .spectral import antiderivative_1d


def _step(grid: Grid2D, a, b):
    """Unit step a -> b as (axis, sign); wraps only along periodic axes."""
    (ay, ax), (by, bx) = a, b
    if not (0 <= by < grid.ny and 0 <= bx < grid.nx):
        raise DomainError(f"node {b} is outside the grid")
    dx, dy = bx - ax, by - ay
    if grid.periodic_x and abs(dx) == grid.nx - 1:
        dx = -int(np.sign(dx))
    if grid.periodic_y and abs(dy) == grid.ny - 1:
        dy = -int(np.sign(dy))
    if abs(dx) + abs(dy) != 1:
        raise GridError(f"nodes {a} and {b} are not adjacent")
    return ("x", dx) if dx else ("y", dy)


def path_integrate(form: FormField, path: GridPath):
    """Trapezoid quadrature of ``int P dz + Q dzbar`` along ``path``."""
    grid = form.grid
    fx = form.along_x()
    fy = form.along_y()
    total = np.zeros(form.value_shape, dtype=complex)
    iy, ix = path.start
    if not (0 <= iy < grid.ny and 0 <= ix < grid.nx):
        raise DomainError(f"node {path.start} is outside the grid")
    for a, b in zip(path.nodes[:-1], path.nodes[1:]):
        axis, sgn = _step(grid, a, b)
        if axis == "x":
            total = total + sgn * 0.5 * grid.hx * (fx[a] + fx[b])
        else:
            total = total + sgn * 0.5 * grid.hy * (fy[a] + fy[b])
    return total if total.shape else complex(total)


def integrate_canonical(form: FormField, base=None, quadrature: str = "trapezoid"):
    """Integral of ``form`` from ``base`` to every node along canonical paths.

    The canonical path to node (iy, ix) runs along the base row to column
    ``ix`` and then along that column. ``quadrature`` is ``"trapezoid"`` or
    ``"spectral"``; the latter needs a periodic grid or lattice cell and uses
    ``form.twist`` for quasi-periodic integrands.
    """
    grid = form.grid
    if base is None:
        base = grid.center_node()
    iyb, ixb = base
    vshape = form.value_shape
    fx = form.along_x().reshape(grid.shape + (-1,))
    fy = form.along_y().reshape(grid.shape + (-1,))
    if quadrature == "trapezoid":
        out = _kernels.cumtrapz_canonical(fx, fy, grid.hx, grid.hy, iyb, ixb)
    elif quadrature == "spectral":
        out = _spectral_canonical(grid, fx, fy, iyb, ixb, form.twist, vshape)
    else:
        raise ValueError(f"unknown quadrature {quadrature!r}")
    return out.reshape(grid.shape + vshape)


def _spectral_canonical(grid, fx, fy, iyb, ixb, twist, vshape):
    if grid.is_closed_cell:
        nfx, nfy = grid.nx - 1, grid.ny - 1
    elif grid.periodic_x and grid.periodic_y:
        nfx, nfy = grid.nx, grid.ny
    else:
        raise GridError("spectral quadrature needs a periodic grid or a lattice cell")
    kx, ky = (1.0, 1.0) if twist is None else twist
    c = fx.shape[-1]
    kx = np.broadcast_to(np.asarray(kx, dtype=complex), vshape).reshape(c)
    ky = np.broadcast_to(np.asarray(ky, dtype=complex), vshape).reshape(c)
    px = grid.hx * np.arange(grid.nx)
    py = grid.hy * np.arange(grid.ny)
    row = antiderivative_1d(fx[iyb, :nfx], grid.hx, kx, px)
    row = row - row[ixb]
    cols = antiderivative_1d(fy[:nfy], grid.hy, np.broadcast_to(ky, (grid.nx, c)), py)
    cols = cols - cols[iyb][None]
    return row[None] + cols


def loop_integrals(form: FormField) -> np.ndarray:
    """Counter-clockwise trapezoid loop integral around every grid cell."""
    grid = form.grid
    fx = form.along_x()
    fy = form.along_y()
    bottom = 0.5 * grid.hx * (fx[:-1, :-1] + fx[:-1, 1:])
    top = 0.5 * grid.hx * (fx[1:, :-1] + fx[1:, 1:])
    right = 0.5 * grid.hy * (fy[:-1, 1:] + fy[1:, 1:])
    left = 0.5 * grid.hy * (fy[:-1, :-1] + fy[1:, :-1])
    return bottom + right - top - left


def closedness_defect(form: FormField) -> np.ndarray:
    """Per-cell magnitude of the loop integral, shape ``(ny - 1, nx - 1)``."""
    loops = loop_integrals(form)
    if loops.ndim > 2:
        return np.sqrt(np.sum(np.abs(loops) ** 2, axis=tuple(range(2, loops.ndim))))
    return np.abs(loops)
