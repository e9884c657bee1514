"""NumPy reference implementations of the hot kernels.

These mirror ``_ckernels.pyx`` one-to-one and are used when the compiled
extension is unavailable or ``DIRAC_MOUTARD_PURE=1`` is set.
"""
from collections import deque

import numpy as np

# neighbour visiting order shared with the compiled kernel
_STEPS = ((0, 1), (0, -1), (1, 0), (-1, 0))


def propagate_signs(vec, base_iy, base_ix, active):
    """Breadth-first sign propagation for a field defined up to sign.

    ``vec`` has shape (ny, nx, m). Starting from the base node (sign +1),
    every newly reached active node takes the sign that makes its vector
    point along the already-fixed neighbour it was reached from
    (non-negative real part of the Hermitian inner product). Inactive nodes
    get sign +1 and do not propagate.
    """
    vec = np.ascontiguousarray(vec, dtype=complex)
    ny, nx = vec.shape[:2]
    signs = np.zeros((ny, nx), dtype=np.int8)
    signs[base_iy, base_ix] = 1
    queue = deque([(base_iy, base_ix)])
    while queue:
        iy, ix = queue.popleft()
        cur = vec[iy, ix] * signs[iy, ix]
        for dy, dx in _STEPS:
            jy, jx = iy + dy, ix + dx
            if jy < 0 or jy >= ny or jx < 0 or jx >= nx or signs[jy, jx] != 0:
                continue
            if not active[jy, jx]:
                signs[jy, jx] = 1
                continue
            inner = np.vdot(cur, vec[jy, jx]).real
            signs[jy, jx] = 1 if inner >= 0.0 else -1
            queue.append((jy, jx))
    signs[signs == 0] = 1
    return signs


def _cumtrapz_from(f, h, b):
    """Trapezoid integral of samples ``f`` (axis 0) from index ``b``."""
    out = np.zeros_like(f)
    seg = 0.5 * h * (f[1:] + f[:-1])
    fwd = np.cumsum(seg[b:], axis=0)
    out[b + 1:] = fwd
    if b > 0:
        back = np.cumsum(seg[:b][::-1], axis=0)[::-1]
        out[:b] = -back
    return out


def cumtrapz_canonical(fx, fy, hx, hy, base_iy, base_ix):
    """Integrate along the canonical path tree rooted at the base node.

    ``fx`` and ``fy`` are the integrands of the x- and y-steps, shaped
    (ny, nx, c). The result at node (iy, ix) is the trapezoid integral along
    the base row from ``base_ix`` to ``ix`` followed by column ``ix`` from
    ``base_iy`` to ``iy``.
    """
    fx = np.ascontiguousarray(fx, dtype=complex)
    fy = np.ascontiguousarray(fy, dtype=complex)
    row = _cumtrapz_from(fx[base_iy], hx, base_ix)
    cols = _cumtrapz_from(fy, hy, base_iy)
    return row[None, :, :] + cols


def mat2_mul(a, b):
    return np.matmul(a, b)


def mat2_inv(m, rel_tol):
    """Batched inverse of 2x2 complex matrices.

    Returns ``(inverse, singular)``. A matrix is singular when
    ``|det| < rel_tol * ||m||_F**2``; its inverse entries are set to NaN.
    """
    m = np.asarray(m, dtype=complex)
    a, b = m[..., 0, 0], m[..., 0, 1]
    c, d = m[..., 1, 0], m[..., 1, 1]
    det = a * d - b * c
    fro2 = np.sum(np.abs(m) ** 2, axis=(-2, -1))
    singular = np.abs(det) <= rel_tol * fro2
    safe = np.where(singular, 1.0, det)
    inv = np.empty_like(m)
    inv[..., 0, 0] = d / safe
    inv[..., 0, 1] = -b / safe
    inv[..., 1, 0] = -c / safe
    inv[..., 1, 1] = a / safe
    inv[singular] = np.nan
    return inv, singular
