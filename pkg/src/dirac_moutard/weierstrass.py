"""Weierstrass representation: spinors <-> conformally immersed surfaces.

Spinor fields are complex arrays of shape ``(ny, nx, 2)``; matrix-valued
solutions ``(ny, nx, 2, 2)`` are handled column by column (the component
axis is always axis 2). Conventions:

* the conformal factor is ``e_alpha = |psi1|^2 + |psi2|^2`` and
  ``e_alpha**2 = 2 <r_z, r_zbar>``;
* the unit normal is the spinor normal, which equals ``r_x x r_y / |r_x x r_y|``;
* ``r_zzbar = e_alpha U n``, so ``U = e_alpha H / 2``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .grid import FormField, Grid2D, fd, integrate_canonical, spectral

BRANCH_EPS = 1e-12


class ConformalityError(ValueError):
    """The immersion handed to :func:`spinor_from_surface` is not conformal."""


@dataclass(frozen=True)
class DiracData:
    grid: Grid2D
    psi: np.ndarray
    U: np.ndarray

    def __post_init__(self):
        U = np.asarray(self.U)
        if np.iscomplexobj(U):
            if np.abs(U.imag).max(initial=0.0) > 1e-12:
                raise ValueError("potential must be real-valued")
            object.__setattr__(self, "U", U.real.copy())


@dataclass(frozen=True)
class SurfaceFrame:
    """Immersion ``r`` with conformal factor, unit normal and potential."""

    grid: Grid2D
    r: np.ndarray
    e_alpha: np.ndarray
    n: np.ndarray
    U: np.ndarray | None = None
    H_mean: np.ndarray | None = None
    branch: np.ndarray | None = None
    base: tuple[int, int] | None = None

    def with_potential(self, U) -> "SurfaceFrame":
        U = np.asarray(U, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            H = 2.0 * U / self.e_alpha
        return replace(self, U=U, H_mean=H)


def _derivs(grid, derivative, twist):
    if derivative == "fd":
        return (lambda f, c: fd.d_z(f, grid)), (lambda f, c: fd.d_zbar(f, grid))
    if derivative == "spectral":
        def tw(c):
            # per-component twists index the component axis
            return tuple(k if np.ndim(k) == 0 else np.asarray(k)[c] for k in twist)
        return ((lambda f, c: spectral.d_z(f, grid, tw(c))),
                (lambda f, c: spectral.d_zbar(f, grid, tw(c))))
    raise ValueError(f"unknown derivative {derivative!r}")


def dirac_apply(psi, U, grid: Grid2D, derivative: str = "fd", twist=(1.0, 1.0)):
    """``D psi = (d psi2 + U psi1, -dbar psi1 + U psi2)`` componentwise.

    Works for spinors and for matrix fields (applied to each column). For
    spectral derivatives ``twist`` gives the Bloch multipliers, either scalar
    or per component.
    """
    psi = np.asarray(psi, dtype=complex)
    dz, dzb = _derivs(grid, derivative, twist)
    U = np.asarray(U)
    Ub = U.reshape(U.shape + (1,) * (psi.ndim - 3))
    out = np.empty_like(psi)
    out[:, :, 0] = dz(psi[:, :, 1], 1) + Ub * psi[:, :, 0]
    out[:, :, 1] = -dzb(psi[:, :, 0], 0) + Ub * psi[:, :, 1]
    return out


def dirac_residual(data: DiracData, derivative: str = "fd", twist=(1.0, 1.0)):
    return dirac_apply(data.psi, data.U, data.grid, derivative, twist)


def coordinate_derivatives(psi) -> np.ndarray:
    """``(x1_z, x2_z, x3_z)`` of the immersion defined by ``psi``."""
    psi = np.asarray(psi, dtype=complex)
    p1, p2b = psi[..., 0], np.conj(psi[..., 1])
    return np.stack([0.5j * (p1**2 + p2b**2), 0.5 * (p2b**2 - p1**2), p1 * p2b], axis=-1)


def weierstrass_form(psi, grid: Grid2D) -> FormField:
    """The three real 1-forms ``dx^k = x^k_z dz + conj(x^k_z) dzbar``."""
    rz = coordinate_derivatives(psi)
    return FormField(grid, rz, np.conj(rz))


def conformal_factor(psi) -> np.ndarray:
    psi = np.asarray(psi)
    return np.abs(psi[..., 0]) ** 2 + np.abs(psi[..., 1]) ** 2


def unit_normal(psi, eps: float = BRANCH_EPS) -> np.ndarray:
    """Spinor normal; NaN at branch points (``e_alpha < eps``)."""
    psi = np.asarray(psi, dtype=complex)
    p1, p2 = psi[..., 0], psi[..., 1]
    ea = conformal_factor(psi)
    prod = p1 * p2
    n = np.stack([(1j * (prod - np.conj(prod))).real,
                  -(prod + np.conj(prod)).real,
                  np.abs(p2) ** 2 - np.abs(p1) ** 2], axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        n = n / ea[..., None]
    n[ea < eps] = np.nan
    return n


def potential_from_geometry(frame: SurfaceFrame, accuracy: int = 2) -> np.ndarray:
    """``U = e^{-alpha} <r_zzbar, n>`` by finite differences (NaN at branch points)."""
    rzz = fd.d_zzbar(frame.r, frame.grid, accuracy)
    with np.errstate(invalid="ignore", divide="ignore"):
        U = np.sum(rzz * frame.n, axis=-1) / frame.e_alpha
    if frame.branch is not None:
        U = np.where(frame.branch, np.nan, U)
    return U


def mean_curvature(frame: SurfaceFrame) -> np.ndarray:
    U = frame.U if frame.U is not None else potential_from_geometry(frame)
    with np.errstate(invalid="ignore", divide="ignore"):
        return 2.0 * U / frame.e_alpha


def integrate_surface(psi, grid: Grid2D, base=None, x0=(0.0, 0.0, 0.0), U=None,
                      quadrature: str = "trapezoid", twist=None) -> SurfaceFrame:
    """Build the surface of ``psi`` by integrating the Weierstrass forms from ``base``.

    ``r(base) = x0``. If the Dirac potential ``U`` is supplied it is stored
    in the frame (and used to warn about non-solutions); otherwise the frame
    potential is recomputed from the geometry.
    """
    psi = np.asarray(grid.check_field(psi, "psi"), dtype=complex)
    base = grid.center_node() if base is None else tuple(base)
    if U is not None:
        res = np.abs(dirac_apply(psi, U, grid)).max()
        if res > max(1e-3, 20.0 * grid.h**2) * np.abs(psi).max():
            warnings.warn(f"spinor is far from a Dirac solution (residual {res:.3e}); "
                          "the surface depends on the integration path", RuntimeWarning)
    form = weierstrass_form(psi, grid)
    if twist is not None:
        form = FormField(grid, form.P, form.Q, twist)
    r = integrate_canonical(form, base, quadrature).real + np.asarray(x0, dtype=float)
    ea = conformal_factor(psi)
    branch = ea < BRANCH_EPS
    frame = SurfaceFrame(grid=grid, r=r, e_alpha=ea, n=unit_normal(psi), branch=branch, base=base)
    return frame.with_potential(potential_from_geometry(frame) if U is None else U)


def frame_from_immersion(r, grid: Grid2D, base=None) -> SurfaceFrame:
    """Frame of a sampled conformal immersion, all quantities by finite differences."""
    r = np.asarray(grid.check_field(r, "r"), dtype=float)
    rz = fd.d_z(r, grid)
    ea = np.sqrt(2.0 * np.sum(np.abs(rz) ** 2, axis=-1))
    cross = np.cross(fd.d_dx(r, grid), fd.d_dy(r, grid))
    norm = np.linalg.norm(cross, axis=-1)
    branch = ea < BRANCH_EPS
    with np.errstate(invalid="ignore", divide="ignore"):
        n = cross / norm[..., None]
    n[branch] = np.nan
    frame = SurfaceFrame(grid=grid, r=r, e_alpha=ea, n=n, branch=branch,
                         base=grid.center_node() if base is None else tuple(base))
    return frame.with_potential(potential_from_geometry(frame))


def conformality_defect(r, grid: Grid2D) -> np.ndarray:
    """``|sum_k (x^k_z)^2| / e^{2 alpha}`` pointwise."""
    rz = fd.d_z(np.asarray(r, dtype=float), grid)
    e2a = 2.0 * np.sum(np.abs(rz) ** 2, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.abs(np.sum(rz**2, axis=-1)) / e2a


def spinor_from_surface(frame: SurfaceFrame, base=None, conformal_tol: float | None = None):
    """Recover the spinor (up to one global sign) from a conformal immersion.

    ``psi1^2 = -i x1_z - x2_z`` and ``conj(psi2)^2 = -i x1_z + x2_z``. The
    larger of the two (at least ``e_alpha / 2``) is square-rooted and the
    other component follows from ``x3_z = psi1 conj(psi2)``, which keeps
    O(h^2) accuracy where one component vanishes. The global sign is then
    propagated breadth-first from the base node so that neighbouring
    spinors point the same way. Returns ``(psi, branch_mask)``.
    """
    grid = frame.grid
    base = (frame.base or grid.center_node()) if base is None else tuple(base)
    if conformal_tol is None:
        conformal_tol = 1e-6 + 5.0 * grid.h**2
    rz = fd.d_z(frame.r, grid)
    e2a = 2.0 * np.sum(np.abs(rz) ** 2, axis=-1)
    branch = e2a < BRANCH_EPS**2
    with np.errstate(invalid="ignore", divide="ignore"):
        defect = np.where(branch, 0.0, np.abs(np.sum(rz**2, axis=-1)) / e2a)
    if defect.max() > conformal_tol:
        raise ConformalityError(
            f"conformality defect {defect.max():.3e} exceeds {conformal_tol:.3e}")
    A = -1j * rz[..., 0] - rz[..., 1]
    B = -1j * rz[..., 0] + rz[..., 1]
    x3 = rz[..., 2]
    first = np.abs(A) >= np.abs(B)
    root = np.sqrt(np.where(first, A, B))
    with np.errstate(invalid="ignore", divide="ignore"):
        other = np.where(branch, 0.0, x3 / np.where(branch, 1.0, root))
    p1 = np.where(first, root, other)
    p2b = np.where(first, other, root)
    psi = np.stack([p1, np.conj(p2b)], axis=-1)
    signs = _kernels.propagate_signs(psi, base[0], base[1], ~branch)
    psi = psi * signs[..., None]
    psi[branch] = 0.0
    return psi, branch


def metric_defect(frame: SurfaceFrame) -> np.ndarray:
    """``|2 <r_z, r_zbar> - e_alpha^2|`` with r_z by finite differences."""
    rz = fd.d_z(frame.r, frame.grid)
    return np.abs(2.0 * np.sum(np.abs(rz) ** 2, axis=-1) - frame.e_alpha**2)
