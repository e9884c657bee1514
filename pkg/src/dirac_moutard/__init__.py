"""Spinor surfaces in R^3, the Moebius inversion and Moutard transformations of
two-dimensional Dirac operators, with the modified Novikov-Veselov layer."""

__version__ = "0.1.0"

from . import algebra, grid, mnv, moebius, moutard, scenarios, weierstrass  # noqa: E402
from ._kernels import BACKEND  # noqa: E402

__all__ = ["BACKEND", "algebra", "grid", "mnv", "moebius", "moutard", "scenarios",
           "weierstrass", "__version__"]
