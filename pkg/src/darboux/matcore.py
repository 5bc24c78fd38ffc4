"""Dense complex linear algebra kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  All functions
are pure: inputs are never modified in place.

Norms are Frobenius norms unless stated otherwise; condition estimates use
the LAPACK 1-norm estimator (``zgecon``), which is what singularity flagging
needs.  Definiteness is decided from the eigenvalues of the Hermitian part
computed by ``numpy.linalg.eigvalsh`` (Householder tridiagonalization
followed by implicit QL/QR).
"""
from __future__ import annotations

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import DimensionError, SingularMatrixError

__all__ = [
    "as_matrix", "adjoint", "norm", "expm", "solve_with_cond", "cond_estimate",
    "is_hermitian", "is_nonneg_definite", "min_eig", "max_eig",
    "relative_residual", "J_STANDARD", "symplectic_J",
]


def as_matrix(a, rows=None, cols=None) -> np.ndarray:
    """Coerce ``a`` to a 2-D complex128 array, optionally checking its shape."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise DimensionError(f"expected a matrix, got array of shape {m.shape}")
    if rows is not None and m.shape[0] != rows:
        raise DimensionError(f"expected {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise DimensionError(f"expected {cols} columns, got {m.shape[1]}")
    return m


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def norm(m) -> float:
    return float(np.linalg.norm(m))


def _require_square(m: np.ndarray, what="matrix"):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{what} must be square, got shape {m.shape}")


def expm(m) -> np.ndarray:
    """Matrix exponential (scaling and squaring with a degree-13 Pade kernel)."""
    m = np.asarray(m, dtype=np.complex128)
    _require_square(m)
    return scipy.linalg.expm(m)


def _lu(s: np.ndarray):
    lu, piv, info = lapack.zgetrf(s)
    if info < 0:
        raise ValueError(f"zgetrf: illegal argument {-info}")
    return lu, piv, info


def cond_estimate(s) -> float:
    """1-norm condition estimate; ``inf`` for an exactly singular matrix."""
    s = np.asarray(s, dtype=np.complex128)
    _require_square(s)
    if s.size == 0:
        return 1.0
    lu, _, info = _lu(s)
    if info > 0:
        return float("inf")
    anorm = float(np.max(np.sum(np.abs(s), axis=0)))
    rcond, info = lapack.zgecon(lu, anorm, norm="1")
    if rcond == 0.0 or not np.isfinite(rcond):
        return float("inf")
    return float(1.0 / rcond)


def solve_with_cond(s, b):
    """Solve ``s @ x = b``; return ``(x, cond_estimate)``.

    The caller decides whether the condition estimate is acceptable.  An
    exactly zero pivot raises :class:`SingularMatrixError` with the (0-based)
    pivot index.
    """
    s = np.asarray(s, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    _require_square(s, "S")
    vector = b.ndim == 1
    if vector:
        b = b.reshape(-1, 1)
    if b.shape[0] != s.shape[0]:
        raise DimensionError(f"B has {b.shape[0]} rows, S has {s.shape[0]}")
    lu, piv, info = _lu(s)
    if info > 0:
        raise SingularMatrixError(f"zero pivot at index {info - 1}", pivot=info - 1,
                                  cond=float("inf"))
    x, info = lapack.zgetrs(lu, piv, b)
    anorm = float(np.max(np.sum(np.abs(s), axis=0)))
    rcond, _ = lapack.zgecon(lu, anorm, norm="1")
    cond = float("inf") if rcond == 0.0 else float(1.0 / rcond)
    return (x.ravel() if vector else x), cond


def _hermitian_tol(m, tol):
    return tol * (1.0 + norm(m))


def is_hermitian(m, tol=1e-12) -> bool:
    m = np.asarray(m, dtype=np.complex128)
    _require_square(m)
    return norm(m - adjoint(m)) <= _hermitian_tol(m, tol)


def min_eig(m) -> float:
    """Smallest eigenvalue of the Hermitian part of ``m``."""
    m = np.asarray(m, dtype=np.complex128)
    if m.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(0.5 * (m + adjoint(m)))[0])


def max_eig(m) -> float:
    m = np.asarray(m, dtype=np.complex128)
    if m.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(0.5 * (m + adjoint(m)))[-1])


def is_nonneg_definite(m, tol=1e-12) -> bool:
    m = np.asarray(m, dtype=np.complex128)
    if not is_hermitian(m, tol):
        return False
    return min_eig(m) >= -_hermitian_tol(m, tol)


def relative_residual(residual, *operands) -> float:
    """``|residual| / (1 + max |operand|)``."""
    scale = max((norm(op) for op in operands), default=0.0)
    return norm(residual) / (1.0 + scale)


def symplectic_J(r: int) -> np.ndarray:
    """``[[0, I_r], [-I_r, 0]]``."""
    eye = np.eye(r, dtype=np.complex128)
    zero = np.zeros((r, r), dtype=np.complex128)
    return np.block([[zero, eye], [-eye, zero]])


# i * sigma_2
J_STANDARD = symplectic_J(1)
J_STANDARD.setflags(write=False)
