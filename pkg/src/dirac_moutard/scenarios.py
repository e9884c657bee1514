"""Analytic surface families with closed-form spinors, potentials and immersions.

Every family samples its data on a grid and names the oracle that makes it
checkable:

===================== ===================================================
plane                 hand integration, r = (-y, -x, c)
sphere_offset         stereographic sphere, Moebius image-sphere
enneper               classical Weierstrass minimal surface (U = 0)
cylinder              conformal cylinder, H = 1/(2 rho)
torus_of_revolution   conformal torus, spin-structure multipliers (-1, -1)
===================== ===================================================
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import quat_field
from .grid import Grid2D


@dataclass(frozen=True)
class SurfaceScenario:
    name: str
    grid: Grid2D
    psi: np.ndarray
    U: np.ndarray | None
    r_exact: np.ndarray | None
    base: tuple[int, int]
    oracle: str
    multipliers: tuple[complex, complex] | None = None
    params: dict = field(default_factory=dict)
    x0_value: np.ndarray | None = None

    @property
    def x0(self) -> np.ndarray:
        if self.x0_value is not None:
            return np.asarray(self.x0_value, dtype=float)
        if self.r_exact is None:
            return np.zeros(3)
        return self.r_exact[self.base]

    @property
    def min_radius(self) -> float:
        """``min |r|`` of the analytic surface (NaN when there is none)."""
        if self.r_exact is None:
            return float("nan")
        return float(np.linalg.norm(self.r_exact, axis=-1).min())


def _finish(name, grid, psi, U, r, oracle, multipliers=None, **params):
    return SurfaceScenario(name=name, grid=grid, psi=psi, U=np.asarray(U, dtype=float)
                           * np.ones(grid.shape), r_exact=r, base=grid.center_node(),
                           oracle=oracle, multipliers=multipliers, params=params)


def plane(n: int = 64, half: float = 1.0, height: float = 1.0) -> SurfaceScenario:
    grid = Grid2D.box(-half, half, -half, half, n)
    X, Y = grid.xy
    psi = np.stack([np.ones(grid.shape, complex), np.zeros(grid.shape, complex)], axis=-1)
    r = np.stack([-Y, -X, np.full(grid.shape, height)], axis=-1)
    return _finish("plane", grid, psi, 0.0, r, "hand integration r = (-y, -x, c)",
                   half=half, height=height)


def _sphere_spinor(z, radius=1.0):
    d = 1.0 + np.abs(z) ** 2
    c = (1 + 1j) * np.sqrt(radius)
    return np.stack([c * np.conj(z) / d, c / d], axis=-1), 1.0 / d


def stereographic_sphere(z, radius=1.0, center=(0.0, 0.0, 0.0)):
    d = 1.0 + np.abs(z) ** 2
    r = np.stack([2 * z.real / d, 2 * z.imag / d, (np.abs(z) ** 2 - 1) / d], axis=-1)
    return radius * r + np.asarray(center, dtype=float)


def sphere_offset(n: int = 128, half: float = 2.0, radius: float = 1.0,
                  center=(0.0, 0.0, 2.0)) -> SurfaceScenario:
    grid = Grid2D.box(-half, half, -half, half, n)
    z = grid.z
    psi, U = _sphere_spinor(z, radius)
    r = stereographic_sphere(z, radius, center)
    return _finish("sphere_offset", grid, psi, U, r, "stereographic sphere / Moebius image sphere",
                   half=half, radius=radius, center=list(center))


def sphere_companion(z, degree: int = 2, radius: float = 1.0):
    """Second solution ``(zbar^n, n zbar^(n-1) + (n-1) z zbar^n) / (1 + |z|^2)`` of the sphere operator."""
    d = 1.0 + np.abs(z) ** 2
    zb = np.conj(z)
    c = (1 + 1j) * np.sqrt(radius)
    p1 = zb**degree
    p2 = degree * zb ** (degree - 1) + (degree - 1) * z * zb**degree
    return c * np.stack([p1 / d, p2 / d], axis=-1)


def enneper(n: int = 64, half: float = 1.0, offset=(0.0, 0.0, 2.0)) -> SurfaceScenario:
    grid = Grid2D.box(-half, half, -half, half, n)
    z = grid.z
    psi = np.stack([np.ones(grid.shape, complex), np.conj(z)], axis=-1)
    w = z + z**3 / 3
    r = np.stack([-w.imag, (z**3 / 3 - z).real, (z**2).real], axis=-1) + np.asarray(offset)
    return _finish("enneper", grid, psi, 0.0, r, "classical Weierstrass minimal surface",
                   half=half, offset=list(offset))


def cylinder(n: int = 64, rho: float = 1.0, half: float = 1.0) -> SurfaceScenario:
    grid = Grid2D.box(-half, half, -half, half, n)
    X, Y = grid.xy
    ph = np.exp(-0.5j * X / rho)
    psi = np.stack([1j * ph, -ph], axis=-1) / np.sqrt(2.0)
    r = np.stack([rho * np.cos(X / rho), rho * np.sin(X / rho), Y], axis=-1)
    return _finish("cylinder", grid, psi, -1.0 / (4.0 * rho), r,
                   "mean curvature H = 1/(2 rho)", rho=rho, half=half)


# --- torus of revolution ---------------------------------------------------

def torus_angles(t, a):
    """Tube angle theta (unwrapped along t) of the conformal torus parameter t."""
    s = np.sqrt(a * a - 1.0)
    k = np.sqrt((a + 1.0) / (a - 1.0))
    half = s * np.asarray(t, dtype=float) / 2.0
    # continuous branch of 2 atan(k tan(half)): shift half into [-pi/2, pi/2]
    m = np.round(half / np.pi)
    u = half - m * np.pi
    return 2.0 * (m * np.pi + np.arctan2(k * np.sin(u), np.cos(u)))


def torus_period(a: float) -> float:
    return 2.0 * np.pi / np.sqrt(a * a - 1.0)


def torus_immersion(x, y, a):
    th = torus_angles(y, a)
    rho = a + np.cos(th)
    return np.stack([rho * np.cos(x), rho * np.sin(x), np.sin(th)], axis=-1)


def torus_spinor(x, y, a):
    th = torus_angles(y, a)
    rho = a + np.cos(th)
    c, s = np.cos(th / 2), np.sin(th / 2)
    ph = np.exp(-0.5j * x)
    amp = np.sqrt(rho / 2.0)
    return np.stack([-1j * amp * (c - s) * ph, amp * (c + s) * ph], axis=-1)


def torus_potential(y, a):
    return -(a + 2.0 * np.cos(torus_angles(y, a))) / 4.0


def torus_floquet_companion(x, y, a):
    """x-independent solution ``exp(-i Phi(y)) (1, 1)`` with ``Phi' = 2U``.

    Multipliers: 1 along ``lambda_1 = 2 pi`` and ``exp(-i a T / 2)`` along
    ``lambda_2 = i T``.
    """
    phi = -torus_angles(y, a) + a * np.asarray(y) / 2.0
    f = np.exp(-1j * phi) * np.ones(np.broadcast_shapes(np.shape(x), np.shape(y)))
    return np.stack([f, f], axis=-1)


def torus_of_revolution(cells: int = 128, a: float = 2.0) -> SurfaceScenario:
    if not a > 1.0:
        raise ValueError("torus needs a > 1 to be embedded")
    T = torus_period(a)
    grid = Grid2D.lattice_cell(2.0 * np.pi, T, cells)
    X, Y = grid.xy
    psi = torus_spinor(X, Y, a)
    r = torus_immersion(X, Y, a)
    return _finish("torus_of_revolution", grid, psi, torus_potential(Y, a), r,
                   "spin structure: multipliers (-1, -1); separable V = mean(U^2) - U^2",
                   multipliers=(-1.0 + 0j, -1.0 + 0j), a=a, period=T)


def rotation_quaternion(axis, angle: float) -> np.ndarray:
    """Unit element of H acting on spinors as a rotation (``Psi -> Psi g``)."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    # i sigma_1, i sigma_2, i sigma_3 components
    return quat_field(c + 1j * s * axis[2], 1j * s * axis[0] + s * axis[1])


BUILTIN = {
    "plane": plane,
    "sphere_offset": sphere_offset,
    "enneper": enneper,
    "cylinder": cylinder,
    "torus_of_revolution": torus_of_revolution,
}


def builtin_scenarios() -> list[dict]:
    """Names, oracles and lattice data of the built-in families."""
    out = []
    for name, make in BUILTIN.items():
        sc = make(16)
        out.append({
            "name": name,
            "oracle": sc.oracle,
            "periodic": sc.grid.lattice is not None,
            "lattice": None if sc.grid.lattice is None else
            [[lam.real, lam.imag] for lam in sc.grid.lattice],
            "multipliers": None if sc.multipliers is None else
            [[m.real, m.imag] for m in sc.multipliers],
        })
    out.append({"name": "custom_spinor_file", "oracle": "user supplied", "periodic": False,
                "lattice": None, "multipliers": None})
    return out
