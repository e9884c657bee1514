"""The quaternionic matrix algebra H, su(2) and the R^3 <-> su(2) identification.

Single values are :class:`QuatMatrix` instances storing only the pair
``(a, b)`` of the matrix ``[[a, b], [-conj(b), conj(a)]]``. Fields of
matrices are plain complex arrays of shape ``(..., 2, 2)``; the helpers at
the bottom of this module operate on those.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels

#: scale-invariant singularity cutoff: det < SINGULAR_RTOL * ||M||_F^2
SINGULAR_RTOL = 1e-14


class SingularMatrixError(ArithmeticError):
    """Raised when a matrix in H (or a point of R^3) is not invertible."""


class StructureError(ValueError):
    """Raised when a matrix does not have the required algebraic form."""


@dataclass(frozen=True)
class QuatMatrix:
    """An element ``[[a, b], [-conj(b), conj(a)]]`` of the algebra H."""

    a: complex
    b: complex

    @classmethod
    def from_matrix(cls, m, atol: float = 1e-12) -> "QuatMatrix":
        m = np.asarray(m, dtype=complex)
        scale = max(1.0, float(np.abs(m).max()))
        if (abs(m[1, 0] + np.conj(m[0, 1])) > atol * scale
                or abs(m[1, 1] - np.conj(m[0, 0])) > atol * scale):
            raise StructureError(f"matrix is not in H: {m!r}")
        return cls(complex(m[0, 0]), complex(m[0, 1]))

    @property
    def matrix(self) -> np.ndarray:
        a, b = self.a, self.b
        return np.array([[a, b], [-b.conjugate(), a.conjugate()]], dtype=complex)

    def det(self) -> float:
        a, b = self.a, self.b
        return a.real * a.real + a.imag * a.imag + b.real * b.real + b.imag * b.imag

    def trace(self) -> float:
        return 2.0 * self.a.real

    def __add__(self, other: "QuatMatrix") -> "QuatMatrix":
        return QuatMatrix(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "QuatMatrix") -> "QuatMatrix":
        return QuatMatrix(self.a - other.a, self.b - other.b)

    def __neg__(self) -> "QuatMatrix":
        return QuatMatrix(-self.a, -self.b)

    def __mul__(self, other):
        if isinstance(other, QuatMatrix):
            # [[a, b], [-b*, a*]] [[c, d], [-d*, c*]]
            a, b, c, d = self.a, self.b, other.a, other.b
            return QuatMatrix(a * c - b * d.conjugate(), a * d + b * c.conjugate())
        if np.isrealobj(other) and np.ndim(other) == 0:
            return QuatMatrix(self.a * other, self.b * other)
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self) -> "QuatMatrix":
        return quat_inverse(self)


def is_in_h(m, atol: float = 1e-10) -> np.ndarray:
    """Pointwise test that ``m`` (shape ``(..., 2, 2)``) lies in H."""
    m = np.asarray(m)
    scale = np.maximum(1.0, np.abs(m).max(axis=(-2, -1)))
    dev = np.maximum(np.abs(m[..., 1, 0] + np.conj(m[..., 0, 1])),
                     np.abs(m[..., 1, 1] - np.conj(m[..., 0, 0])))
    return dev <= atol * scale


def pauli(k: int) -> np.ndarray:
    """Pauli matrix sigma_k for k in 0..3 (sigma_0 is the identity)."""
    if k == 0:
        return np.eye(2, dtype=complex)
    if k == 1:
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if k == 2:
        return np.array([[0, -1j], [1j, 0]], dtype=complex)
    if k == 3:
        return np.array([[1, 0], [0, -1]], dtype=complex)
    raise IndexError(f"Pauli index must be in 0..3, got {k}")


SIGMA0 = pauli(0)
SIGMA1 = pauli(1)
SIGMA2 = pauli(2)
SIGMA3 = pauli(3)
GAMMA = 1j * SIGMA2  # [[0, 1], [-1, 0]]
GAMMA_INV = -GAMMA
E11 = np.array([[1, 0], [0, 0]], dtype=complex)
E12 = np.array([[0, 1], [0, 0]], dtype=complex)
E21 = np.array([[0, 0], [1, 0]], dtype=complex)
E22 = np.array([[0, 0], [0, 1]], dtype=complex)


def levi_civita(a: int, b: int, c: int) -> int:
    return int(np.sign((b - a) * (c - a) * (c - b)))


# --- single values ---------------------------------------------------------

def su2_embed(v) -> QuatMatrix:
    """Map x in R^3 to ``[[i x3, -x1 - i x2], [x1 - i x2, -i x3]]``."""
    x1, x2, x3 = (float(c) for c in v)
    return QuatMatrix(complex(0.0, x3), complex(-x1, -x2))


def su2_extract(m, atol: float = 1e-12) -> np.ndarray:
    """Inverse of :func:`su2_embed`; rejects matrices with nonzero trace."""
    q = m if isinstance(m, QuatMatrix) else QuatMatrix.from_matrix(m)
    scale = max(1.0, abs(q.a), abs(q.b))
    if abs(q.a.real) > atol * scale:
        raise StructureError(f"matrix is not trace-free (Re a = {q.a.real:g})")
    return np.array([-q.b.real, -q.b.imag, q.a.imag])


def quat_inverse(m: QuatMatrix) -> QuatMatrix:
    det = m.det()
    fro2 = 2.0 * det  # ||M||_F^2 = 2(|a|^2 + |b|^2) in H
    if det <= SINGULAR_RTOL * fro2 or det == 0.0:
        raise SingularMatrixError("matrix in H is singular")
    return QuatMatrix(m.a.conjugate() / det, -m.b / det)


# --- fields of matrices ----------------------------------------------------

def embed_field(r) -> np.ndarray:
    """Vectorised :func:`su2_embed` for arrays of shape ``(..., 3)``."""
    r = np.asarray(r, dtype=float)
    x1, x2, x3 = r[..., 0], r[..., 1], r[..., 2]
    out = np.empty(r.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = 1j * x3
    out[..., 0, 1] = -x1 - 1j * x2
    out[..., 1, 0] = x1 - 1j * x2
    out[..., 1, 1] = -1j * x3
    return out


def extract_field(m) -> np.ndarray:
    """Vectorised :func:`su2_extract` (no structural check; see :func:`is_in_h`)."""
    m = np.asarray(m)
    return np.stack([-m[..., 0, 1].real, -m[..., 0, 1].imag, m[..., 0, 0].imag], axis=-1)


def quat_field(a, b) -> np.ndarray:
    """Build an H-valued field from its ``a`` and ``b`` entries."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    out = np.empty(np.broadcast_shapes(a.shape, b.shape) + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = -np.conj(b)
    out[..., 1, 1] = np.conj(a)
    return out


def matmul(*mats) -> np.ndarray:
    """Pointwise product of 2x2 matrix fields, left to right."""
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = _kernels.mat2_mul(out, np.asarray(m, dtype=complex))
    return out


def inv_field(m, rel_tol: float = SINGULAR_RTOL):
    """Pointwise inverse. Returns ``(inverse, singular_mask)``; singular entries are NaN."""
    return _kernels.mat2_inv(np.asarray(m, dtype=complex), rel_tol)


def transpose(m) -> np.ndarray:
    """Plain (non-conjugating) transpose of a matrix field."""
    return np.swapaxes(np.asarray(m), -1, -2)


def det_field(m) -> np.ndarray:
    m = np.asarray(m)
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
