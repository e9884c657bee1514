"""Moutard transformation of Dirac operators with real potential.

Matrix fields have shape ``(ny, nx, 2, 2)``. A matrix solution
``Psi = [[psi1, -conj(psi2)], [psi2, conj(psi1)]]`` lies in H pointwise,
``S(Phi, Psi) = Gamma * int omega(Phi, Psi)`` and in the surface gauge
``S(Psi0, Psi0) = su2_embed(r)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .algebra import (E12, E21, GAMMA, GAMMA_INV, SIGMA3, SINGULAR_RTOL, embed_field,
                      matmul, transpose)
from .grid import FormField, Grid2D, GridError, fd, integrate_canonical
from .grid.paths import closedness_defect
from .moebius import inverted_spinor, real_part_checked
from .weierstrass import dirac_apply

FLOQUET_TOL = 1e-6


class NotFloquetError(ValueError):
    """The field is not quasi-periodic to the requested tolerance."""


def matrix_solution(psi) -> np.ndarray:
    """``[[psi1, -conj(psi2)], [psi2, conj(psi1)]]``."""
    psi = np.asarray(psi, dtype=complex)
    p1, p2 = psi[..., 0], psi[..., 1]
    out = np.empty(psi.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = p1
    out[..., 1, 0] = p2
    out[..., 0, 1] = -np.conj(p2)
    out[..., 1, 1] = np.conj(p1)
    return out


def _as_matrix(psi):
    psi = np.asarray(psi, dtype=complex)
    return matrix_solution(psi) if psi.shape[-1:] == (2,) and psi.ndim == 3 else psi


def omega_form(Phi, Psi, grid: Grid2D, twist=None) -> FormField:
    """``omega = -(i/2)(Phi^T s3 Psi + Phi^T Psi) dz - (i/2)(Phi^T s3 Psi - Phi^T Psi) dzbar``."""
    PhiT = transpose(Phi)
    a = matmul(PhiT, SIGMA3, Psi)
    b = matmul(PhiT, Psi)
    return FormField(grid, -0.5j * (a + b), -0.5j * (a - b), twist)


def omega_twist(mu_phi, mu_psi):
    """Per-entry quasi-periodicity factors of ``omega(Phi, Psi)`` along one period.

    ``mu_phi`` and ``mu_psi`` are the multipliers of the first columns; the
    second columns carry the conjugates.
    """
    cphi = np.array([mu_phi, np.conj(mu_phi)])
    cpsi = np.array([mu_psi, np.conj(mu_psi)])
    return np.outer(cphi, cpsi)


def s_matrix(Phi, Psi, grid: Grid2D, base=None, constant=None, quadrature: str = "trapezoid",
             twist=None, warn_tol: float | None = None) -> np.ndarray:
    """``S = Gamma * int_{base} omega(Phi, Psi) + constant`` along canonical paths.

    ``S(base) = constant``. Warns when the per-cell closedness defect of
    ``omega`` exceeds ``warn_tol`` (default ``h^2 max|omega|``), in which case
    the integral depends on the path.
    """
    form = omega_form(Phi, Psi, grid, twist)
    if warn_tol is None:
        warn_tol = grid.h**2 * max(np.abs(form.along_x()).max(), np.abs(form.along_y()).max())
    defect = closedness_defect(form).max()
    if defect > warn_tol:
        warnings.warn(f"omega is not closed (cell defect {defect:.3e}); S depends on the path",
                      RuntimeWarning)
    S = matmul(GAMMA, integrate_canonical(form, base, quadrature))
    if constant is not None:
        S = S + np.asarray(constant, dtype=complex)
    return S


def surface_gauge(x0) -> np.ndarray:
    """Integration constant placing ``S(Psi0, Psi0)`` at ``su2_embed(x0)`` on the base node."""
    return embed_field(np.asarray(x0, dtype=float))


def k_matrix(psi0, S00, rtol: float = SINGULAR_RTOL) -> np.ndarray:
    """``K = Psi0 S^{-1} Gamma Psi0^T Gamma^{-1}``."""
    return matmul(inverted_spinor(psi0, S00, rtol), GAMMA, transpose(psi0), GAMMA_INV)


def moutard_weight(K) -> np.ndarray:
    """``W = -i K_11``, checked to be real."""
    W = -1j * K[..., 0, 0]
    return real_part_checked(W, float(np.abs(W).max()), "W")


def shape_defect(K) -> float:
    """Deviation of K from ``[[iW, a], [-conj(a), -iW]]`` with W real."""
    return float(max(np.abs(K[..., 1, 1] + K[..., 0, 0]).max(),
                     np.abs(K[..., 1, 0] + np.conj(K[..., 0, 1])).max(),
                     np.abs(K[..., 0, 0].real).max()))


def moutard_potential(U, psi0, S00) -> np.ndarray:
    """``U~ = U + W``."""
    return np.asarray(U, dtype=float) + moutard_weight(k_matrix(psi0, S00))


def moutard_transform(psi, psi0, S00, grid: Grid2D, base=None, A=None, S0psi=None,
                      quadrature: str = "trapezoid", twist=None) -> np.ndarray:
    """``Psi~ = Psi - Psi0 S00^{-1} S(Psi0, Psi)``, plus ``Psi0 S00^{-1} A`` if given.

    ``S(Psi0, Psi)`` is integrated from ``base`` with zero constant unless
    supplied as ``S0psi``.
    """
    Psi = _as_matrix(psi)
    if S0psi is None:
        S0psi = s_matrix(psi0, Psi, grid, base, None, quadrature, twist)
    out = Psi - matmul(inverted_spinor(psi0, S00), S0psi)
    if A is not None:
        out = out + matmul(inverted_spinor(psi0, S00), A)
    return out


def moutard_transform_gauged(psi, psi0_tilde, S0psi, A=None) -> np.ndarray:
    """Same transform written with ``Psi0~ = Psi0 S^{-1}``: ``Psi - Psi0~ S(Psi0, Psi) + Psi0~ A``."""
    out = _as_matrix(psi) - matmul(psi0_tilde, S0psi)
    if A is not None:
        out = out + matmul(psi0_tilde, A)
    return out


def dirac0_apply(M, grid: Grid2D, derivative: str = "fd", twist=(1.0, 1.0)):
    """``D0 = [[0, d], [-dbar, 0]]`` acting on a matrix field."""
    return dirac_apply(M, np.zeros(grid.shape), grid, derivative, twist)


def leibniz_defect(A, B, grid: Grid2D) -> np.ndarray:
    """``D0(AB) - (D0 A) B - E12 A dB + E21 A dbar B`` by finite differences."""
    lhs = dirac0_apply(matmul(A, B), grid)
    rhs = (matmul(dirac0_apply(A, grid), B) + matmul(E12, A, fd.d_z(B, grid))
           - matmul(E21, A, fd.d_zbar(B, grid)))
    return lhs - rhs


@dataclass(frozen=True)
class MoutardData:
    psi0: np.ndarray
    S00: np.ndarray
    K: np.ndarray
    W: np.ndarray
    U_tilde: np.ndarray

    @property
    def psi0_tilde(self):
        return inverted_spinor(self.psi0, self.S00)


def moutard_data(psi, U, grid: Grid2D, base=None, x0=(0.0, 0.0, 0.0),
                 quadrature: str = "trapezoid", twist=None) -> MoutardData:
    """Build ``Psi0``, ``S00`` in the surface gauge, ``K``, ``W`` and ``U~``."""
    psi0 = _as_matrix(psi)
    base = grid.center_node() if base is None else tuple(base)
    S00 = s_matrix(psi0, psi0, grid, base, surface_gauge(x0), quadrature, twist)
    K = k_matrix(psi0, S00)
    W = moutard_weight(K)
    return MoutardData(psi0, S00, K, W, np.asarray(U, dtype=float) + W)


# --- Floquet functions -----------------------------------------------------

@dataclass(frozen=True)
class FloquetData:
    multipliers: tuple[complex, complex]
    lattice: tuple[complex, complex]
    defect: float

    def to_dict(self):
        return {"multipliers": [[m.real, m.imag] for m in self.multipliers],
                "lattice": [[lam.real, lam.imag] for lam in self.lattice],
                "defect": self.defect}


def _wraps(F):
    """(start, end) edge pairs of a closed lattice cell along x and y."""
    return (F[:, 0], F[:, -1]), (F[0, :], F[-1, :])


def _first_column(F):
    F = np.asarray(F, dtype=complex)
    return F[..., 0] if F.ndim == 4 else F


def _median_ratio(a, b, threshold):
    mask = np.abs(a) > threshold
    if not mask.any():
        raise NotFloquetError("field vanishes on the cell edge")
    q = b[mask] / a[mask]
    return complex(np.median(q.real), np.median(q.imag))


def floquet_defect(F, grid: Grid2D, multipliers) -> float:
    """``max |F(z + lambda_k) - mu_k F(z)| / max |F|`` on a closed lattice cell."""
    F = _first_column(F)
    scale = np.abs(F).max()
    if scale == 0.0:
        return 0.0
    d = 0.0
    for (a, b), mu in zip(_wraps(F), multipliers):
        d = max(d, float(np.abs(b - mu * a).max()))
    return d / scale


def floquet_multipliers(psi, grid: Grid2D, tol: float = FLOQUET_TOL, threshold: float = 1e-3,
                        strict: bool = True) -> FloquetData:
    """Multipliers ``psi(z + lambda_k) = mu_k psi(z)`` estimated on a closed lattice cell.

    Each ``mu_k`` is the median of the edge ratios over nodes where
    ``|psi| > threshold * max |psi|``. For matrix solutions the first column
    is used (the second carries the conjugate multipliers).
    """
    if not grid.is_closed_cell:
        raise GridError("Floquet multipliers need a closed lattice cell grid")
    F = _first_column(psi)
    cut = threshold * np.abs(F).max()
    mus = tuple(_median_ratio(a, b, cut) for a, b in _wraps(F))
    defect = floquet_defect(F, grid, mus)
    if strict and defect > tol:
        raise NotFloquetError(f"Floquet defect {defect:.3e} exceeds {tol:.1e}")
    return FloquetData(mus, tuple(grid.lattice), defect)


_H_BASIS = (np.eye(2, dtype=complex), 1j * np.diag([1.0, -1.0]).astype(complex),
            np.array([[0, 1], [-1, 0]], dtype=complex), np.array([[0, 1j], [1j, 0]]))


def fix_floquet_representative(psi_tilde, psi0_tilde, target: FloquetData, grid: Grid2D,
                               tol: float = FLOQUET_TOL, strict: bool = False):
    """Choose the constant ``A`` in H making ``Psi~ + Psi0~ A`` a Floquet function.

    Linear least squares for the four real coordinates of ``A`` on the wrap
    residuals of both periods. Returns ``(fixed, A, defect)``.
    """
    F = _first_column(psi_tilde)
    basis = [_first_column(matmul(psi0_tilde, e)) for e in _H_BASIS]

    def wrap_residual(G):
        parts = [b - mu * a for (a, b), mu in zip(_wraps(G), target.multipliers)]
        r = np.concatenate([p.ravel() for p in parts])
        return np.concatenate([r.real, r.imag])

    M = np.stack([wrap_residual(b) for b in basis], axis=1)
    coef, *_ = np.linalg.lstsq(M, -wrap_residual(F), rcond=None)
    A = sum(c * e for c, e in zip(coef, _H_BASIS))
    fixed = np.asarray(psi_tilde, dtype=complex) + matmul(psi0_tilde, A)
    defect = floquet_defect(fixed, grid, target.multipliers)
    if strict and defect > tol:
        raise NotFloquetError(f"best Floquet defect {defect:.3e} exceeds {tol:.1e}")
    return fixed, A, defect


__all__ = [
    "FLOQUET_TOL", "FloquetData", "MoutardData", "NotFloquetError",
    "dirac0_apply", "fix_floquet_representative", "floquet_defect", "floquet_multipliers",
    "k_matrix", "leibniz_defect", "matrix_solution", "moutard_data", "moutard_potential",
    "moutard_transform", "moutard_transform_gauged", "moutard_weight", "omega_form",
    "omega_twist", "s_matrix", "shape_defect", "surface_gauge",
]
