"""Wavefront OBJ export of sampled surfaces."""
from __future__ import annotations

from pathlib import Path

import numpy as np


def write_obj(path, r, normals=None, name: str = "surface") -> Path:
    """Write the node grid ``r`` (shape ``(ny, nx, 3)``) as a triangulated mesh.

    Each grid cell becomes two triangles; cells touching a non-finite
    vertex (excluded or singular nodes) are skipped. Vertex indices follow
    row-major node order.
    """
    path = Path(path)
    r = np.asarray(r, dtype=float)
    ny, nx = r.shape[:2]
    ok = np.all(np.isfinite(r), axis=-1)
    pts = np.where(ok[..., None], r, 0.0).reshape(-1, 3)
    lines = [f"# {name}: {ny} x {nx} nodes", f"o {name}"]
    lines += [f"v {x:.12g} {y:.12g} {z:.12g}" for x, y, z in pts]
    use_n = normals is not None
    if use_n:
        nrm = np.asarray(normals, dtype=float)
        ok &= np.all(np.isfinite(nrm), axis=-1)
        nrm = np.where(np.isfinite(nrm), nrm, 0.0).reshape(-1, 3)
        lines += [f"vn {x:.12g} {y:.12g} {z:.12g}" for x, y, z in nrm]
    idx = np.arange(ny * nx).reshape(ny, nx) + 1
    for iy in range(ny - 1):
        for ix in range(nx - 1):
            if not (ok[iy, ix] and ok[iy, ix + 1] and ok[iy + 1, ix] and ok[iy + 1, ix + 1]):
                continue
            a, b = idx[iy, ix], idx[iy, ix + 1]
            c, d = idx[iy + 1, ix + 1], idx[iy + 1, ix]
            for tri in ((a, b, c), (a, c, d)):
                if use_n:
                    lines.append("f " + " ".join(f"{v}//{v}" for v in tri))
                else:
                    lines.append("f " + " ".join(str(v) for v in tri))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_obj_vertices(path) -> np.ndarray:
    """Vertex coordinates of an OBJ file (for round-trip checks)."""
    rows = [line.split()[1:4] for line in Path(path).read_text().splitlines()
            if line.startswith("v ")]
    return np.asarray(rows, dtype=float)
