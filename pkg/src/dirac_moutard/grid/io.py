"""Field dumps: one CSV of nodal values plus a JSON header with grid metadata.

CSV rows are row-major over the grid (y outer, x inner) with columns
``x, y`` followed by ``re, im`` for scalar fields or ``re_k, im_k`` per
component ``k`` of the flattened trailing axes.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import Grid2D, GridError


def dump_field(directory, name: str, grid: Grid2D, values, extra: dict | None = None):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    values = np.asarray(grid.check_field(values, name), dtype=complex)
    comp_shape = values.shape[2:]
    flat = values.reshape(grid.ny * grid.nx, -1)
    X, Y = grid.xy
    cols = [X.ravel(), Y.ravel()]
    if comp_shape:
        header = ["x", "y"]
        for k in range(flat.shape[1]):
            cols += [flat[:, k].real, flat[:, k].imag]
            header += [f"re_{k}", f"im_{k}"]
    else:
        cols += [flat[:, 0].real, flat[:, 0].imag]
        header = ["x", "y", "re", "im"]
    data = np.column_stack(cols)
    csv_path = directory / f"{name}.csv"
    np.savetxt(csv_path, data, delimiter=",", header=",".join(header), comments="", fmt="%.17g")
    meta = {"name": name, "grid": grid.to_dict(), "components": list(comp_shape),
            "csv": csv_path.name}
    if extra:
        meta.update(extra)
    (directory / f"{name}.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    return csv_path


def load_field(header_path):
    """Read a field written by :func:`dump_field`; returns ``(grid, values)``."""
    header_path = Path(header_path)
    meta = json.loads(header_path.read_text())
    grid = Grid2D.from_dict(meta["grid"])
    data = np.loadtxt(header_path.parent / meta["csv"], delimiter=",", skiprows=1, ndmin=2)
    if data.shape[0] != grid.nx * grid.ny:
        raise GridError("CSV row count does not match the grid")
    vals = data[:, 2::2] + 1j * data[:, 3::2]
    comp = tuple(meta.get("components", []))
    return grid, vals.reshape(grid.shape + comp)
