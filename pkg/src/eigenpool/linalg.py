"""Dense linear algebra for small matrices.

Products and validation are thin wrappers over numpy.  The symmetric
eigensolver is a cyclic Jacobi iteration: it sweeps all off-diagonal
pairs with Givens rotations until the off-diagonal Frobenius norm drops
below 1e-12 of the input norm.  For the matrix sizes used here (a few
dozen rows) this is robust and accurate to near machine precision.

Eigenvector sign convention: each eigenvector is flipped, if necessary,
so that its entry of largest absolute value is positive (ties go to the
earliest index).  Eigenvalues are returned in descending order with a
stable sort, so degenerate eigenvalues keep a deterministic column
order.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["ShapeError", "as_matrix", "matmul", "symmetric_eigh"]

_MAX_SWEEPS = 100
_OFFDIAG_TOL = 1e-12


class ShapeError(ValueError):
    """Operand shapes are incompatible with the requested operation."""


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array, rejecting non-finite entries."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def matmul(a, b) -> np.ndarray:
    """Matrix product with an explicit inner-dimension check."""
    left = as_matrix(a, "left operand")
    right = as_matrix(b, "right operand")
    if left.shape[1] != right.shape[0]:
        raise ShapeError(
            f"cannot multiply {left.shape[0]}x{left.shape[1]} by "
            f"{right.shape[0]}x{right.shape[1]}"
        )
    return left @ right


def _offdiag_norm(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def symmetric_eigh(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.

    The input is symmetrized as (M + M^T)/2 before iterating, which
    absorbs any asymmetry within the caller's tolerance.  Returns
    ``(eigenvalues, eigenvectors)`` with eigenvalues descending and the
    j-th eigenvector in column j, signed per the module convention.
    """
    a = as_matrix(m, "matrix")
    n, cols = a.shape
    if n != cols:
        raise ShapeError(f"matrix must be square, got shape {a.shape}")
    a = 0.5 * (a + a.T)
    vecs = np.eye(n)
    target = _OFFDIAG_TOL * np.linalg.norm(a, "fro")
    for _ in range(_MAX_SWEEPS):
        if _offdiag_norm(a) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.array([[c, -s], [s, c]])
                a[[p, q], :] = rot @ a[[p, q], :]
                a[:, [p, q]] = a[:, [p, q]] @ rot.T
                a[p, q] = a[q, p] = 0.0
                vecs[:, [p, q]] = vecs[:, [p, q]] @ rot.T

    eigenvalues = np.diagonal(a).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vecs = vecs[:, order]
    for j in range(n):
        lead = int(np.argmax(np.abs(vecs[:, j])))
        if vecs[lead, j] < 0.0:
            vecs[:, j] = -vecs[:, j]
    return eigenvalues, vecs
