"""Discretisation of the conformal domain: grids, derivatives, quadrature."""
from . import fd, spectral
from .core import (DomainError, FormField, Grid2D, GridError, GridPath, canonical_path,
                   rectangle_loop)
from .fd import d_z, d_zbar, d_zzbar
from .io import dump_field, load_field
from .paths import closedness_defect, integrate_canonical, loop_integrals, path_integrate
from .spectral import IncompatibleSourceError, solve_dbar

__all__ = [
    "DomainError", "FormField", "Grid2D", "GridError", "GridPath", "IncompatibleSourceError",
    "canonical_path", "closedness_defect", "d_z", "d_zbar", "d_zzbar", "dump_field", "fd",
    "integrate_canonical", "load_field", "loop_integrals", "path_integrate", "rectangle_loop",
    "solve_dbar", "spectral",
]
