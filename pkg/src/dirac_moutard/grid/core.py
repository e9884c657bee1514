"""Rectangular conformal grids and the value types living on them.

Arrays are indexed ``[iy, ix, ...]``: rows run along y, columns along x, and
any trailing axes hold the components of vector/spinor/matrix fields.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MIN_NODES = 8


class GridError(ValueError):
    pass


class DomainError(GridError):
    """A path or operation left a non-periodic grid."""


@dataclass(frozen=True)
class Grid2D:
    """Uniform grid with optional periodic axes and an optional period lattice.

    Periodic axes hold ``n`` nodes per period (period ``n * h``). A grid built
    by :meth:`lattice_cell` is not periodic in the stencil sense: it stores
    the closed fundamental domain, nodes on both opposite edges included, and
    records the lattice generators so that wrap ratios can be read off the
    edges.
    """

    nx: int
    ny: int
    hx: float
    hy: float
    origin: complex = 0j
    periodic_x: bool = False
    periodic_y: bool = False
    lattice: tuple[complex, complex] | None = None

    def __post_init__(self):
        if self.nx < MIN_NODES or self.ny < MIN_NODES:
            raise GridError(f"grid needs at least {MIN_NODES} nodes per axis")
        if not (self.hx > 0 and self.hy > 0):
            raise GridError("grid spacings must be positive")

    @classmethod
    def box(cls, xmin, xmax, ymin, ymax, nx, ny=None) -> "Grid2D":
        """Non-periodic grid with nodes on both ends of each interval."""
        ny = nx if ny is None else ny
        return cls(nx=nx, ny=ny, hx=(xmax - xmin) / (nx - 1), hy=(ymax - ymin) / (ny - 1),
                   origin=complex(xmin, ymin))

    @classmethod
    def periodic(cls, lx, ly, nx, ny=None, origin=0j) -> "Grid2D":
        """Doubly periodic grid on ``[0, lx) x [0, ly)`` shifted by ``origin``."""
        ny = nx if ny is None else ny
        return cls(nx=nx, ny=ny, hx=lx / nx, hy=ly / ny, origin=complex(origin),
                   periodic_x=True, periodic_y=True,
                   lattice=(complex(lx, 0.0), complex(0.0, ly)))

    @classmethod
    def lattice_cell(cls, lx, ly, cells_x, cells_y=None, origin=0j) -> "Grid2D":
        """Closed fundamental domain of the rectangular lattice ``(lx, i ly)``."""
        cells_y = cells_x if cells_y is None else cells_y
        return cls(nx=cells_x + 1, ny=cells_y + 1, hx=lx / cells_x, hy=ly / cells_y,
                   origin=complex(origin), lattice=(complex(lx, 0.0), complex(0.0, ly)))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def x(self) -> np.ndarray:
        return self.origin.real + self.hx * np.arange(self.nx)

    @property
    def y(self) -> np.ndarray:
        return self.origin.imag + self.hy * np.arange(self.ny)

    @property
    def xy(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y)

    @property
    def z(self) -> np.ndarray:
        X, Y = self.xy
        return X + 1j * Y

    @property
    def is_closed_cell(self) -> bool:
        return self.lattice is not None and not (self.periodic_x or self.periodic_y)

    @property
    def h(self) -> float:
        return max(self.hx, self.hy)

    def center_node(self) -> tuple[int, int]:
        """Node nearest the centre of the domain, as ``(iy, ix)``."""
        iy = self.ny // 2 if self.periodic_y else (self.ny - 1) // 2
        ix = self.nx // 2 if self.periodic_x else (self.nx - 1) // 2
        return iy, ix

    def node_z(self, node) -> complex:
        iy, ix = node
        return complex(self.origin.real + ix * self.hx, self.origin.imag + iy * self.hy)

    def refined(self, factor: int = 2) -> "Grid2D":
        """Same domain with the spacing divided by ``factor``."""
        if self.periodic_x or self.periodic_y:
            return Grid2D.periodic(self.nx * self.hx, self.ny * self.hy, self.nx * factor,
                                   self.ny * factor, self.origin)
        if self.is_closed_cell:
            return Grid2D.lattice_cell(self.lattice[0].real, self.lattice[1].imag,
                                       (self.nx - 1) * factor, (self.ny - 1) * factor,
                                       self.origin)
        return Grid2D.box(self.origin.real, self.origin.real + (self.nx - 1) * self.hx,
                          self.origin.imag, self.origin.imag + (self.ny - 1) * self.hy,
                          (self.nx - 1) * factor + 1, (self.ny - 1) * factor + 1)

    def to_dict(self) -> dict:
        return {
            "nx": self.nx, "ny": self.ny, "hx": self.hx, "hy": self.hy,
            "origin": [self.origin.real, self.origin.imag],
            "periodic_x": self.periodic_x, "periodic_y": self.periodic_y,
            "lattice": None if self.lattice is None else
            [[lam.real, lam.imag] for lam in self.lattice],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Grid2D":
        lat = d.get("lattice")
        return cls(nx=int(d["nx"]), ny=int(d["ny"]), hx=float(d["hx"]), hy=float(d["hy"]),
                   origin=complex(*d.get("origin", (0.0, 0.0))),
                   periodic_x=bool(d.get("periodic_x", False)),
                   periodic_y=bool(d.get("periodic_y", False)),
                   lattice=None if lat is None else tuple(complex(*p) for p in lat))

    def check_field(self, f, name="field"):
        f = np.asarray(f)
        if f.shape[:2] != self.shape:
            raise GridError(f"{name} has shape {f.shape[:2]}, grid is {self.shape}")
        return f


@dataclass(frozen=True)
class FormField:
    """The 1-form ``P dz + Q dzbar`` sampled on a grid.

    ``P`` and ``Q`` share the shape ``(ny, nx, ...)``; trailing axes make it
    vector- or matrix-valued. ``twist`` optionally gives, per lattice
    direction, the multiplier of each component under translation by the
    lattice generator (used by spectral quadrature on lattice cells).
    """

    grid: Grid2D
    P: np.ndarray
    Q: np.ndarray
    twist: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        P = self.grid.check_field(self.P, "P")
        Q = self.grid.check_field(self.Q, "Q")
        if P.shape != Q.shape:
            raise GridError("P and Q must have the same shape")

    @property
    def value_shape(self) -> tuple[int, ...]:
        return np.shape(self.P)[2:]

    def along_x(self) -> np.ndarray:
        """Integrand of a step in +x (dz = dzbar = dx)."""
        return np.asarray(self.P) + np.asarray(self.Q)

    def along_y(self) -> np.ndarray:
        """Integrand of a step in +y (dz = i dy, dzbar = -i dy)."""
        return 1j * (np.asarray(self.P) - np.asarray(self.Q))

    def __add__(self, other: "FormField") -> "FormField":
        return FormField(self.grid, self.P + other.P, self.Q + other.Q)

    def scaled(self, c) -> "FormField":
        return FormField(self.grid, c * self.P, c * self.Q, self.twist)


@dataclass(frozen=True)
class GridPath:
    """Grid nodes ``(iy, ix)`` joined by axis-aligned unit steps."""

    nodes: tuple

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple((int(a), int(b)) for a, b in self.nodes))
        if len(self.nodes) == 0:
            raise GridError("empty path")

    @property
    def start(self):
        return self.nodes[0]

    @property
    def end(self):
        return self.nodes[-1]

    def reversed(self) -> "GridPath":
        return GridPath(self.nodes[::-1])

    def __add__(self, other: "GridPath") -> "GridPath":
        if self.end != other.start:
            raise GridError("paths do not meet")
        return GridPath(self.nodes + other.nodes[1:])


def canonical_path(grid: Grid2D, start, end) -> GridPath:
    """x-leg along the start row, then y-leg along the end column."""
    (sy, sx), (ey, ex) = start, end
    step = 1 if ex >= sx else -1
    nodes = [(sy, ix) for ix in range(sx, ex + step, step)]
    step = 1 if ey >= sy else -1
    nodes += [(iy, ex) for iy in range(sy + step, ey + step, step)]
    return GridPath(nodes)


def rectangle_loop(grid: Grid2D, corner0, corner1) -> GridPath:
    """Counter-clockwise loop around the node rectangle spanned by two corners."""
    (y0, x0), (y1, x1) = corner0, corner1
    y0, y1 = sorted((y0, y1))
    x0, x1 = sorted((x0, x1))
    nodes = [(y0, ix) for ix in range(x0, x1 + 1)]
    nodes += [(iy, x1) for iy in range(y0 + 1, y1 + 1)]
    nodes += [(y1, ix) for ix in range(x1 - 1, x0 - 1, -1)]
    nodes += [(iy, x0) for iy in range(y1 - 1, y0 - 1, -1)]
    return GridPath(nodes)
