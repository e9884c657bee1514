"""The inversion ``T(x) = -x / |x|^2`` acting on points, tangents, surfaces and potentials."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import GAMMA, SINGULAR_RTOL, SingularMatrixError, inv_field, matmul, transpose
from .weierstrass import SurfaceFrame, potential_from_geometry

ORIGIN_EPS = 1e-8
REALITY_RTOL = 1e-8


class SingularityError(ValueError):
    """A point handed to the inversion lies at (or numerically at) the origin."""


def invert_point(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    r2 = np.sum(v * v, axis=-1, keepdims=True)
    if np.any(np.sqrt(r2) < ORIGIN_EPS):
        raise SingularityError("cannot invert the origin")
    return -v / r2


def invert_tangent(x, u) -> np.ndarray:
    """Push-forward ``T_* u = -u/|x|^2 + 2 x <x,u> / |x|^4`` at ``x``."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    r2 = np.sum(x * x, axis=-1, keepdims=True)
    if np.any(np.sqrt(r2) < ORIGIN_EPS):
        raise SingularityError("tangent map undefined at the origin")
    return -u / r2 + 2.0 * x * np.sum(x * u, axis=-1, keepdims=True) / r2**2


def _origin_mask(r):
    return np.linalg.norm(r, axis=-1) < ORIGIN_EPS


def invert_surface(s: SurfaceFrame, accuracy: int = 2) -> SurfaceFrame:
    """Image frame: ``r~ = T r``, ``e_alpha~ = e_alpha / |r|^2``,
    ``n~ = -n + 2 r <r,n> / |r|^2``; the potential is recomputed geometrically.

    Nodes with ``|r| < 1e-8`` are set to NaN and marked in ``branch``.
    """
    r = s.r
    bad = _origin_mask(r)
    r2 = np.sum(r * r, axis=-1)
    safe = np.where(bad, 1.0, r2)
    rt = -r / safe[..., None]
    ea = s.e_alpha / safe
    rn = np.sum(r * s.n, axis=-1)
    nt = -s.n + 2.0 * r * (rn / safe)[..., None]
    rt[bad] = np.nan
    nt[bad] = np.nan
    ea = np.where(bad, np.nan, ea)
    branch = bad if s.branch is None else (bad | s.branch)
    out = SurfaceFrame(grid=s.grid, r=rt, e_alpha=ea, n=nt, branch=branch, base=s.base)
    return out.with_potential(potential_from_geometry(out, accuracy))


def inversion_weight(s: SurfaceFrame) -> np.ndarray:
    """``W = e_alpha <r, n> / |r|^2`` (NaN where ``|r| < 1e-8``)."""
    r2 = np.sum(s.r * s.r, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        W = s.e_alpha * np.sum(s.r * s.n, axis=-1) / r2
    return np.where(_origin_mask(s.r), np.nan, W)


def inverted_potential(s: SurfaceFrame) -> np.ndarray:
    """``U~ = U + e_alpha <r, n> / |r|^2`` pointwise."""
    if s.U is None:
        raise ValueError("frame carries no potential")
    return s.U + inversion_weight(s)


def inverted_spinor(psi0, S, rtol: float = SINGULAR_RTOL) -> np.ndarray:
    """``Psi0 S^{-1}``; raises if ``S`` is singular at some node."""
    Sinv, sing = inv_field(S, rtol)
    if np.any(sing):
        raise SingularMatrixError(f"S is singular at {int(sing.sum())} node(s)",
                                  np.argwhere(sing))
    return matmul(psi0, Sinv)


def _g_matrix(psi0, S, rtol):
    return matmul(inverted_spinor(psi0, S, rtol), GAMMA, transpose(psi0))


def real_part_checked(F, scale: float, what: str = "potential", rtol: float = REALITY_RTOL):
    """Drop the imaginary part of ``F`` after checking it is at noise level."""
    imag = np.nanmax(np.abs(np.imag(F)), initial=0.0)
    if imag > rtol * max(scale, 1.0):
        raise ValueError(f"{what} has imaginary part {imag:.3e}")
    return np.real(F).copy()


def inverted_potential_matrix(psi0, S, U, rtol: float = SINGULAR_RTOL) -> np.ndarray:
    """``U~ = U - i (G_21)`` with ``G = Psi0 S^{-1} Gamma Psi0^T``.

    The two entries ``E12 G E11`` and ``E21 G E22`` of the matrix form
    coincide; their average is used.
    """
    G = _g_matrix(psi0, S, rtol)
    U = np.asarray(U, dtype=float)
    Ut = U - 0.5j * (G[..., 0, 1] + G[..., 1, 0])
    return real_part_checked(Ut, float(np.abs(Ut).max()), "inverted potential")


@dataclass
class InversionReport:
    surface_in: SurfaceFrame
    surface_out: SurfaceFrame
    U_formula: np.ndarray
    U_geometric: np.ndarray
    max_discrepancy: float
    excluded_nodes: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "max_discrepancy": self.max_discrepancy,
            "excluded_nodes": [list(map(int, p)) for p in self.excluded_nodes],
            "U_formula_max": float(np.nanmax(np.abs(self.U_formula))),
            "U_geometric_max": float(np.nanmax(np.abs(self.U_geometric))),
        }


def inversion_report(s: SurfaceFrame, accuracy: int = 2) -> InversionReport:
    """Compare the closed-form inverted potential with the geometric one."""
    out = invert_surface(s, accuracy)
    Uf = inverted_potential(s)
    Ug = out.U
    diff = np.abs(Uf - Ug)
    excluded = np.argwhere(~np.isfinite(diff))
    md = float(np.nanmax(diff)) if np.isfinite(diff).any() else float("nan")
    return InversionReport(s, out, Uf, Ug, md, [tuple(p) for p in excluded])
