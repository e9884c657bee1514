# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see ``_pykernels`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, NAN

cnp.import_array()

ctypedef double complex cplx


def propagate_signs(vec, Py_ssize_t base_iy, Py_ssize_t base_ix, active):
    cdef const cplx[:, :, ::1] v = np.ascontiguousarray(vec, dtype=np.complex128)
    cdef const cnp.uint8_t[:, ::1] act = np.ascontiguousarray(active, dtype=np.uint8)
    cdef Py_ssize_t ny = v.shape[0], nx = v.shape[1], m = v.shape[2]
    out = np.zeros((ny, nx), dtype=np.int8)
    cdef cnp.int8_t[:, ::1] signs = out
    cdef Py_ssize_t[::1] qy = np.empty(ny * nx, dtype=np.intp)
    cdef Py_ssize_t[::1] qx = np.empty(ny * nx, dtype=np.intp)
    cdef Py_ssize_t head = 0, tail = 0, iy, ix, jy, jx, k, s
    cdef int dys[4]
    cdef int dxs[4]
    cdef double inner
    cdef cnp.int8_t sc
    dys[:] = [0, 0, 1, -1]
    dxs[:] = [1, -1, 0, 0]
    signs[base_iy, base_ix] = 1
    qy[tail] = base_iy
    qx[tail] = base_ix
    tail += 1
    while head < tail:
        iy = qy[head]
        ix = qx[head]
        head += 1
        sc = signs[iy, ix]
        for s in range(4):
            jy = iy + dys[s]
            jx = ix + dxs[s]
            if jy < 0 or jy >= ny or jx < 0 or jx >= nx or signs[jy, jx] != 0:
                continue
            if not act[jy, jx]:
                signs[jy, jx] = 1
                continue
            inner = 0.0
            for k in range(m):
                inner += (v[iy, ix, k].conjugate() * v[jy, jx, k]).real
            inner *= sc
            signs[jy, jx] = 1 if inner >= 0.0 else -1
            qy[tail] = jy
            qx[tail] = jx
            tail += 1
    for iy in range(ny):
        for ix in range(nx):
            if signs[iy, ix] == 0:
                signs[iy, ix] = 1
    return out


def cumtrapz_canonical(fx, fy, double hx, double hy, Py_ssize_t base_iy, Py_ssize_t base_ix):
    cdef const cplx[:, :, ::1] gx = np.ascontiguousarray(fx, dtype=np.complex128)
    cdef const cplx[:, :, ::1] gy = np.ascontiguousarray(fy, dtype=np.complex128)
    cdef Py_ssize_t ny = gx.shape[0], nx = gx.shape[1], c = gx.shape[2]
    out = np.zeros((ny, nx, c), dtype=np.complex128)
    cdef cplx[:, :, ::1] o = out
    cdef cplx[:, ::1] row = np.zeros((nx, c), dtype=np.complex128)
    cdef Py_ssize_t iy, ix, k
    for ix in range(base_ix + 1, nx):
        for k in range(c):
            row[ix, k] = row[ix - 1, k] + 0.5 * hx * (gx[base_iy, ix - 1, k] + gx[base_iy, ix, k])
    for ix in range(base_ix - 1, -1, -1):
        for k in range(c):
            row[ix, k] = row[ix + 1, k] - 0.5 * hx * (gx[base_iy, ix + 1, k] + gx[base_iy, ix, k])
    for ix in range(nx):
        for k in range(c):
            o[base_iy, ix, k] = row[ix, k]
        for iy in range(base_iy + 1, ny):
            for k in range(c):
                o[iy, ix, k] = o[iy - 1, ix, k] + 0.5 * hy * (gy[iy - 1, ix, k] + gy[iy, ix, k])
        for iy in range(base_iy - 1, -1, -1):
            for k in range(c):
                o[iy, ix, k] = o[iy + 1, ix, k] - 0.5 * hy * (gy[iy + 1, ix, k] + gy[iy, ix, k])
    return out


def mat2_mul(a, b):
    a_arr = np.asarray(a, dtype=np.complex128)
    b_arr = np.asarray(b, dtype=np.complex128)
    a_arr, b_arr = np.broadcast_arrays(a_arr, b_arr)
    shape = a_arr.shape
    cdef const cplx[:, :, ::1] x = np.ascontiguousarray(a_arr.reshape(-1, 2, 2))
    cdef const cplx[:, :, ::1] y = np.ascontiguousarray(b_arr.reshape(-1, 2, 2))
    cdef Py_ssize_t n = x.shape[0], i
    out = np.empty((n, 2, 2), dtype=np.complex128)
    cdef cplx[:, :, ::1] o = out
    for i in range(n):
        o[i, 0, 0] = x[i, 0, 0] * y[i, 0, 0] + x[i, 0, 1] * y[i, 1, 0]
        o[i, 0, 1] = x[i, 0, 0] * y[i, 0, 1] + x[i, 0, 1] * y[i, 1, 1]
        o[i, 1, 0] = x[i, 1, 0] * y[i, 0, 0] + x[i, 1, 1] * y[i, 1, 0]
        o[i, 1, 1] = x[i, 1, 0] * y[i, 0, 1] + x[i, 1, 1] * y[i, 1, 1]
    return out.reshape(shape)


def mat2_inv(m, double rel_tol):
    m_arr = np.asarray(m, dtype=np.complex128)
    shape = m_arr.shape
    cdef const cplx[:, :, ::1] x = np.ascontiguousarray(m_arr.reshape(-1, 2, 2))
    cdef Py_ssize_t n = x.shape[0], i
    out = np.empty((n, 2, 2), dtype=np.complex128)
    sing = np.zeros(n, dtype=bool)
    cdef cplx[:, :, ::1] o = out
    cdef cnp.uint8_t[::1] sg = sing.view(np.uint8)
    cdef cplx det
    cdef double fro2, adet
    for i in range(n):
        det = x[i, 0, 0] * x[i, 1, 1] - x[i, 0, 1] * x[i, 1, 0]
        fro2 = 0.0
        fro2 += (x[i, 0, 0] * x[i, 0, 0].conjugate()).real
        fro2 += (x[i, 0, 1] * x[i, 0, 1].conjugate()).real
        fro2 += (x[i, 1, 0] * x[i, 1, 0].conjugate()).real
        fro2 += (x[i, 1, 1] * x[i, 1, 1].conjugate()).real
        adet = abs(det)
        if adet <= rel_tol * fro2:
            sg[i] = 1
            o[i, 0, 0] = NAN
            o[i, 0, 1] = NAN
            o[i, 1, 0] = NAN
            o[i, 1, 1] = NAN
            continue
        o[i, 0, 0] = x[i, 1, 1] / det
        o[i, 0, 1] = -x[i, 0, 1] / det
        o[i, 1, 0] = -x[i, 1, 0] / det
        o[i, 1, 1] = x[i, 0, 0] / det
    return out.reshape(shape), sing.reshape(shape[:-2])
