"""The modified Novikov-Veselov (mNV) layer.

``U_t = (U_zzz + 3 U_z V + 3/2 U V_z) + (U_zbar^3 + 3 U_zbar conj(V) + 3/2 U conj(V)_zbar)``
with ``V_zbar = (U^2)_z``, its Manakov triple ``D_t + [D, A] - B D = 0``
and the time-extended Moutard data. All derivatives are spectral, so the
grid must be doubly periodic or a closed lattice cell; quasi-periodic test
fields pass their Bloch multipliers as ``twist``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .algebra import (GAMMA, GAMMA_INV, SIGMA2, SIGMA3, extract_field, inv_field, matmul,
                      transpose)
from .grid import Grid2D, GridError, fd, solve_dbar, spectral
from .moutard import k_matrix, moutard_data, moutard_weight
from .weierstrass import dirac_apply

C_STAB = 0.1
CONSTRAINT_TOL = 1e-8


class ConstraintError(ValueError):
    """``V_zbar = (U^2)_z`` does not hold to tolerance."""


class InstabilityError(RuntimeError):
    """The explicit time step blew up (NaN or norm growth above 10x)."""


def _require_spectral(grid: Grid2D):
    if not (grid.is_closed_cell or (grid.periodic_x and grid.periodic_y)):
        raise GridError("the mNV layer needs a doubly periodic grid or a lattice cell")


@dataclass(frozen=True)
class MnvState:
    grid: Grid2D
    U: np.ndarray
    V: np.ndarray
    t: float = 0.0

    def constraint_residual(self) -> float:
        return constraint_residual(self.grid, self.U, self.V)


def constraint_residual(grid: Grid2D, U, V) -> float:
    """``max |V_zbar - (U^2)_z|`` with spectral derivatives."""
    _require_spectral(grid)
    U = np.asarray(U)
    return float(np.abs(spectral.d_zbar(V, grid) - spectral.d_z(U * U, grid)).max())


def solve_v(U, grid: Grid2D) -> np.ndarray:
    """Zero-mean ``V`` with ``V_zbar = (U^2)_z``."""
    _require_spectral(grid)
    U = np.asarray(U, dtype=float)
    return solve_dbar(spectral.d_z(U * U, grid), grid)


def mnv_state(U, grid: Grid2D, t: float = 0.0) -> MnvState:
    U = np.asarray(U, dtype=float)
    return MnvState(grid, U, solve_v(U, grid), t)


def _rhs_groups(state: MnvState):
    g = state.grid
    U, V = state.U, state.V
    Vb = np.conj(V)
    first = (spectral.d_z(U, g, order=3) + 3.0 * spectral.d_z(U, g) * V
             + 1.5 * U * spectral.d_z(V, g))
    second = (spectral.d_zbar(U, g, order=3) + 3.0 * spectral.d_zbar(U, g) * Vb
              + 1.5 * U * spectral.d_zbar(Vb, g))
    return first, second


def mnv_rhs(state: MnvState, tol: float = CONSTRAINT_TOL, check: bool = True) -> np.ndarray:
    """Right-hand side of the mNV equation (real)."""
    _require_spectral(state.grid)
    scale = max(1.0, float(np.abs(state.U).max()) ** 2)
    if check:
        res = state.constraint_residual()
        if res > tol * scale:
            raise ConstraintError(f"constraint residual {res:.3e} exceeds {tol * scale:.1e}")
    first, second = _rhs_groups(state)
    out = first + second
    imag = float(np.abs(out.imag).max())
    if check and imag > tol * max(1.0, float(np.abs(out).max())):
        raise ConstraintError(f"mNV right-hand side has imaginary part {imag:.3e}")
    return out.real.copy()


# --- operators -------------------------------------------------------------

def _component_twist(twist):
    return tuple(np.asarray(k, dtype=complex) for k in twist)


def _coef_apply(C, F):
    """Pointwise ``C @ F`` for coefficient matrices C and spinor or matrix fields F."""
    if F.ndim == 3:
        return np.einsum("...ij,...j->...i", C, F)
    return matmul(C, F)


def _mat(a, b, c, d):
    a, b, c, d = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (a, b, c, d)))
    return np.stack([np.stack([a, b], -1), np.stack([c, d], -1)], -2)


def _fields(state: MnvState):
    g = state.grid
    U, V = state.U, state.V
    Vb = np.conj(V)
    return dict(U=U, V=V, Vb=Vb, Uz=spectral.d_z(U, g), Uzb=spectral.d_zbar(U, g),
                Vz=spectral.d_z(V, g), Vbzb=spectral.d_zbar(Vb, g))


def _derivs(F, grid, twist, orders=(1, 3)):
    return {(which, k): (spectral.d_z if which == "z" else spectral.d_zbar)(F, grid, twist, k)
            for which in ("z", "zb") for k in orders}


def a_apply(psi, state: MnvState, twist=(1.0, 1.0)) -> np.ndarray:
    """``A psi = (d^3 + dbar^3) psi + 3 C1 d psi + 3 C2 dbar psi + 3/2 C0 psi``."""
    g = state.grid
    _require_spectral(g)
    psi = np.asarray(psi, dtype=complex)
    tw = _component_twist(twist)
    f = _fields(state)
    d = _derivs(psi, g, tw)
    zero = np.zeros_like(f["U"])
    C1 = _mat(f["V"], zero, f["Uz"], zero)
    C2 = _mat(zero, -f["Uzb"], zero, f["Vb"])
    C0 = _mat(f["Vz"], 2.0 * f["U"] * f["Vb"], -2.0 * f["U"] * f["V"], f["Vbzb"])
    return (d["z", 3] + d["zb", 3] + 3.0 * _coef_apply(C1, d["z", 1])
            + 3.0 * _coef_apply(C2, d["zb", 1]) + 1.5 * _coef_apply(C0, psi))


def b_apply(psi, state: MnvState, twist=(1.0, 1.0)) -> np.ndarray:
    """``B psi = 3 B1 d psi + 3 B2 dbar psi + 3/2 B0 psi``."""
    g = state.grid
    _require_spectral(g)
    psi = np.asarray(psi, dtype=complex)
    tw = _component_twist(twist)
    f = _fields(state)
    zero = np.zeros_like(f["U"])
    Uzz = spectral.d_z(f["U"], g, order=2)
    Uzbzb = spectral.d_zbar(f["U"], g, order=2)
    B1 = _mat(-f["V"], zero, -2.0 * f["Uz"], f["V"])
    B2 = _mat(f["Vb"], 2.0 * f["Uzb"], zero, -f["Vb"])
    B0 = _mat(f["Vbzb"] - f["Vz"], 2.0 * Uzbzb, -2.0 * Uzz, f["Vz"] - f["Vbzb"])
    return (3.0 * _coef_apply(B1, spectral.d_z(psi, g, tw))
            + 3.0 * _coef_apply(B2, spectral.d_zbar(psi, g, tw)) + 1.5 * _coef_apply(B0, psi))


def dirac_spectral(psi, U, grid: Grid2D, twist=(1.0, 1.0)):
    return dirac_apply(psi, U, grid, "spectral", _component_twist(twist))


def manakov_residual_field(state: MnvState, psi, U_t=None, twist=(1.0, 1.0)) -> np.ndarray:
    """``(D_t + D A - A D - B D) psi`` with ``D_t psi = U_t psi``."""
    if U_t is None:
        U_t = mnv_rhs(state)
    psi = np.asarray(psi, dtype=complex)
    g = state.grid
    Ut = np.asarray(U_t).reshape(np.shape(U_t) + (1,) * (psi.ndim - 2))
    Dpsi = dirac_spectral(psi, state.U, g, twist)
    return (Ut * psi + dirac_spectral(a_apply(psi, state, twist), state.U, g, twist)
            - a_apply(Dpsi, state, twist) - b_apply(Dpsi, state, twist))


def manakov_residual(state: MnvState, psi, U_t=None, twist=(1.0, 1.0)) -> float:
    return float(np.abs(manakov_residual_field(state, psi, U_t, twist)).max())


def l_apply(psi, U, grid: Grid2D, twist=(1.0, 1.0)):
    """``L = [[d, -U], [U, dbar]]``."""
    psi = np.asarray(psi, dtype=complex)
    tw = _component_twist(twist)
    U = np.asarray(U).reshape(np.shape(U) + (1,) * (psi.ndim - 3))
    out = np.empty_like(psi)
    kx0, ky0 = (k[0] if k.ndim else k for k in tw)
    kx1, ky1 = (k[1] if k.ndim else k for k in tw)
    out[:, :, 0] = spectral.d_z(psi[:, :, 0], grid, (kx0, ky0)) - U * psi[:, :, 1]
    out[:, :, 1] = U * psi[:, :, 0] + spectral.d_zbar(psi[:, :, 1], grid, (kx1, ky1))
    return out


def dirac_via_l_gamma(psi, U, grid: Grid2D, twist=(1.0, 1.0)):
    """``L (Gamma psi)``; ``Gamma`` swaps components, so their twists swap too."""
    psi = np.asarray(psi, dtype=complex)
    gpsi = _coef_apply(np.broadcast_to(GAMMA, grid.shape + (2, 2)), psi)
    tw = tuple(k[::-1] if k.ndim else k for k in _component_twist(twist))
    return l_apply(gpsi, U, grid, tw)


# --- time-extended Moutard data -------------------------------------------

def _dy(F, grid, twist):
    return spectral.d_dy(F, grid, twist)


def omega_hat_dt(Phi, Psi, state: MnvState, twist_phi=(1.0, 1.0), twist_psi=(1.0, 1.0),
                 form: str = "y") -> np.ndarray:
    """The ``dt`` coefficient of the time-extended form.

    ``form="y"`` assembles the y-derivative display with spectral ``d/dy``;
    ``form="z"`` the Wirtinger display with ``d/dy`` written as ``i(d - dbar)``.
    """
    g = state.grid
    U, V = state.U, state.V
    Phi = np.asarray(Phi, dtype=complex)
    Psi = np.asarray(Psi, dtype=complex)
    tf, tp = _component_twist(twist_phi), _component_twist(twist_psi)
    T = transpose
    if form == "y":
        Phy, Psy = _dy(Phi, g, tf), _dy(Psi, g, tp)
        Phyy, Psyy = _dy(Phy, g, tf), _dy(Psy, g, tp)
        Ux = spectral.d_dx(U, g)
        out = 1j * (matmul(T(Phyy), SIGMA3, Psi) + matmul(T(Phi), SIGMA3, Psyy)
                    - matmul(T(Phy), SIGMA3, Psy))
        out = out + 2j * U[..., None, None] * (matmul(T(Phy), SIGMA2, Psi)
                                               - matmul(T(Phi), SIGMA2, Psy))
    elif form == "z":
        def dd(F, tw):
            return spectral.d_z(F, g, tw), spectral.d_zbar(F, g, tw)

        def second(F, tw):
            return (spectral.d_z(F, g, tw, 2) + spectral.d_zbar(F, g, tw, 2)
                    - 2.0 * spectral.d_zzbar(F, g, tw))

        fz, fzb = dd(Phi, tf)
        pz, pzb = dd(Psi, tp)
        dPh, dPs = fz - fzb, pz - pzb
        out = -1j * (matmul(T(second(Phi, tf)), SIGMA3, Psi)
                     + matmul(T(Phi), SIGMA3, second(Psi, tp))
                     - matmul(T(dPh), SIGMA3, dPs))
        out = out - 2.0 * U[..., None, None] * (matmul(T(dPh), SIGMA2, Psi)
                                                - matmul(T(Phi), SIGMA2, dPs))
        Ux = spectral.d_z(U, g) + spectral.d_zbar(U, g)
    else:
        raise ValueError(f"unknown form {form!r}")
    C = _mat(1j * U**2 - 3j * V, -1j * Ux, -1j * Ux, -1j * U**2 + 3j * np.conj(V))
    return out + matmul(T(Phi), C, Psi)


def matrix_twist(mu):
    """Component twist of a matrix solution whose first column has multiplier ``mu``."""
    mu = complex(mu)
    return np.array([[mu, np.conj(mu)], [mu, np.conj(mu)]])


def m_matrix(Psi, grid: Grid2D, twist=(1.0, 1.0), form: str = "y",
             derivative: str = "spectral") -> np.ndarray:
    """``M = Gamma Psi_y Psi^{-1} Gamma^{-1}`` (``form="z"``: ``Psi_y = i(Psi_z - Psi_zbar)``)."""
    Psi = np.asarray(Psi, dtype=complex)
    tw = _component_twist(twist)
    if derivative == "spectral":
        if form == "y":
            Py = spectral.d_dy(Psi, grid, tw)
        else:
            Py = 1j * (spectral.d_z(Psi, grid, tw) - spectral.d_zbar(Psi, grid, tw))
    elif derivative == "fd":
        Py = fd.d_dy(Psi, grid) if form == "y" else 1j * (fd.d_z(Psi, grid) - fd.d_zbar(Psi, grid))
    else:
        raise ValueError(f"unknown derivative {derivative!r}")
    Pinv, sing = inv_field(Psi)
    if np.any(sing):
        raise ZeroDivisionError(f"Psi is singular at {int(sing.sum())} node(s)")
    return matmul(GAMMA, Py, Pinv, GAMMA_INV)


def m_shape_defect(M) -> float:
    """Deviation of M from ``[[b, c], [-conj(c), conj(b)]]``."""
    return float(max(np.abs(M[..., 1, 1] - np.conj(M[..., 0, 0])).max(),
                     np.abs(M[..., 1, 0] + np.conj(M[..., 0, 1])).max()))


def extended_moutard_v(state: MnvState, W, a, b, c) -> np.ndarray:
    """``V~ = V + 2 U W + a^2 + 2 (a conj(b) - i conj(c) W)``."""
    return state.V + 2.0 * state.U * W + a**2 + 2.0 * (a * np.conj(b) - 1j * np.conj(c) * W)


@dataclass(frozen=True)
class ExtendedMoutardData:
    K: np.ndarray
    M: np.ndarray
    W: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    U_tilde: np.ndarray
    V_tilde: np.ndarray

    def constraint_residual(self, grid: Grid2D) -> float:
        return constraint_residual(grid, self.U_tilde, self.V_tilde)


def extended_moutard(state: MnvState, psi0, S00, twist=(1.0, 1.0)) -> ExtendedMoutardData:
    """``K``, ``M``, ``W``, ``a``, ``b``, ``c`` and ``(U~, V~)`` from a matrix solution ``psi0``.

    The entries are used pointwise (field by field).
    """
    K = k_matrix(psi0, S00)
    W = moutard_weight(K)
    M = m_matrix(psi0, state.grid, twist)
    a, b, c = K[..., 0, 1], M[..., 0, 0], M[..., 0, 1]
    return ExtendedMoutardData(K, M, W, a, b, c, state.U + W,
                               extended_moutard_v(state, W, a, b, c))


# --- time stepping ---------------------------------------------------------

def max_stable_dt(grid: Grid2D, c_stab: float = C_STAB) -> float:
    return c_stab * grid.h**3


def mnv_step(state: MnvState, dt: float, c_stab: float = C_STAB) -> MnvState:
    """One classical Runge-Kutta step of U; V is re-solved at every stage."""
    g = state.grid
    if abs(dt) > max_stable_dt(g, c_stab) * (1 + 1e-12):
        raise ValueError(f"|dt| = {abs(dt):.3e} exceeds the stability bound "
                         f"{max_stable_dt(g, c_stab):.3e} (c_stab h^3)")

    def f(U):
        return mnv_rhs(MnvState(g, U, solve_v(U, g)), check=False)

    U = state.U
    k1 = f(U)
    k2 = f(U + 0.5 * dt * k1)
    k3 = f(U + 0.5 * dt * k2)
    k4 = f(U + dt * k3)
    Un = U + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    n0, n1 = np.abs(U).max(), np.abs(Un).max()
    if not np.all(np.isfinite(Un)) or (n0 > 0 and n1 > 10.0 * n0):
        raise InstabilityError(f"norm grew from {n0:.3e} to {n1:.3e} at t = {state.t + dt:.3e}")
    return replace(state, U=Un, V=solve_v(Un, g), t=state.t + dt)


def evolve(state: MnvState, dt: float, steps: int, every: int = 0, callback=None) -> MnvState:
    """Repeated :func:`mnv_step`; ``callback(k, state)`` every ``every`` steps."""
    for k in range(1, steps + 1):
        state = mnv_step(state, dt)
        if callback is not None and every and k % every == 0:
            callback(k, state)
    return state


def blowup_probe(psi, U, grid: Grid2D, base, x0, direction, distances, **kw) -> list[dict]:
    """Translate the surface along ``direction`` by each distance; record ``sup |U~|``.

    Demonstrates the growth of the Moutard potential as the surface nears the origin.
    """
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    rows = []
    for s in distances:
        x = np.asarray(x0, dtype=float) + s * direction
        md = moutard_data(psi, U, grid, base, x, **kw)
        rmin = float(np.linalg.norm(extract_field(md.S00), axis=-1).min())
        rows.append({"shift": float(s), "min_r": rmin,
                     "sup_U_tilde": float(np.abs(md.U_tilde).max())})
    return rows
