"""Fundamental solutions, Weyl disks and the Darboux-induced Moebius map.

Systems here are Hamiltonian with ``m = 2r`` and ``J = [[0, I_r], [-I_r, 0]]``.
Only the upper half-plane ``Im(lam) > 0`` is handled.  A candidate ``M``
belongs to the Weyl disk on ``[0, l']`` when the Hermitian form

    i [I, M*] Y(l')* J Y(l') [I; M]

is nonpositive; the form's largest eigenvalue is reported so that interior
and boundary points can be told apart.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _ode
from .errors import (DenominatorSingularError, DimensionError, NormalizationError,
                     UsageError)
from .gbdt import DarbouxNode, DarbouxPath, _resolvent_apply, darboux_matrix
from .matcore import adjoint, as_matrix, max_eig, norm, solve_with_cond
from .systems import SystemCoefficients

__all__ = [
    "FundamentalSolution", "check_normalization", "fundamental_solution",
    "weyl_disk_form", "disk_membership", "MoebiusBlocks", "moebius_blocks",
    "moebius_map", "j_form_identity_residual", "transformed_fundamental",
]


@dataclass
class FundamentalSolution:
    x: np.ndarray
    Y: np.ndarray          # (N, m, m)
    lam: complex
    E: np.ndarray

    def at(self, x: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.x - x)))
        if abs(self.x[i] - x) > 1e-12 * (1 + abs(x)):
            raise UsageError(f"x={x} is not a sample node")
        return self.Y[i]


def check_normalization(E, J, tol: float = 1e-12) -> np.ndarray:
    """Validate ``E J = J E`` and ``E* E = I``."""
    E, J = as_matrix(E), as_matrix(J)
    if E.shape != J.shape:
        raise DimensionError(f"E has shape {E.shape}, J has shape {J.shape}")
    if norm(E @ J - J @ E) > tol * (1 + norm(J)) or \
            norm(adjoint(E) @ E - np.eye(E.shape[0])) > tol * E.shape[0]:
        raise NormalizationError("E must commute with J and be unitary")
    return E


def fundamental_solution(sys: SystemCoefficients, lam: complex, ell: float, E=None,
                         grid=None, steps: int = 1000) -> FundamentalSolution:
    """RK4 solution of ``Y' = F(x, lam) Y``, ``Y(0) = E`` on ``[0, ell]``.

    ``grid`` (ascending nodes starting at 0) takes precedence over ``steps``.
    """
    m = sys.m
    J = getattr(sys, "J", None)
    if E is None:
        E = np.eye(m, dtype=np.complex128)
    elif J is not None:
        E = check_normalization(E, J)
    else:
        E = as_matrix(E, m, m)
    lo, hi = sys.interval
    if not 0 < ell <= hi + 1e-12:
        raise UsageError(f"l'={ell} outside (0, {hi}]")
    x = np.linspace(0.0, ell, steps + 1) if grid is None else np.asarray(grid, float)
    if x[0] != 0.0:
        raise UsageError("grid must start at 0")
    states = _ode.integrate_from_origin(
        lambda xx, y, side: (sys.F(xx, lam, side) @ y[0],), (E,), x)
    return FundamentalSolution(x, np.array([s[0] for s in states]), complex(lam), E)


def _split(J_or_m):
    m = J_or_m.shape[0] if hasattr(J_or_m, "shape") else int(J_or_m)
    if m % 2:
        raise DimensionError(f"m={m} is odd; Weyl disks need m = 2r")
    return m // 2


def weyl_disk_form(Y, J, M) -> np.ndarray:
    """``i [I, M*] Y* J Y [I; M]`` (Hermitian, r x r)."""
    Y, J, M = as_matrix(Y), as_matrix(J), as_matrix(M)
    r = _split(J)
    if Y.shape != J.shape or M.shape != (r, r):
        raise DimensionError(f"need Y {J.shape} and M {(r, r)}, got {Y.shape} and {M.shape}")
    col = np.vstack([np.eye(r), M])
    f = 1j * adjoint(col) @ adjoint(Y) @ J @ Y @ col
    return 0.5 * (f + adjoint(f))


def disk_membership(form, tol: float = 1e-9):
    """``(max_eigenvalue, member)`` with tolerance ``tol * (1 + |form|)``."""
    lam_max = max_eig(form)
    return lam_max, bool(lam_max <= tol * (1.0 + norm(form)))


@dataclass(frozen=True)
class MoebiusBlocks:
    U: np.ndarray

    @property
    def r(self) -> int:
        return self.U.shape[0] // 2

    @property
    def U11(self):
        return self.U[:self.r, :self.r]

    @property
    def U12(self):
        return self.U[:self.r, self.r:]

    @property
    def U21(self):
        return self.U[self.r:, :self.r]

    @property
    def U22(self):
        return self.U[self.r:, self.r:]

    def inverse(self) -> "MoebiusBlocks":
        return MoebiusBlocks(np.linalg.inv(self.U))

    def __matmul__(self, other: "MoebiusBlocks") -> "MoebiusBlocks":
        return MoebiusBlocks(self.U @ other.U)


def moebius_blocks(node: DarbouxNode, lam: complex, E=None) -> MoebiusBlocks:
    """``U = E* w_A(0, lam) E`` split into r x r blocks."""
    m = node.Pi1.shape[1]
    _split(m)
    if node.x != 0.0:
        raise UsageError("Moebius blocks are taken at x = 0")
    E = np.eye(m, dtype=np.complex128) if E is None else as_matrix(E, m, m)
    return MoebiusBlocks(adjoint(E) @ darboux_matrix(node, lam) @ E)


def moebius_map(U: MoebiusBlocks, M, tol: float = 1e-12) -> np.ndarray:
    """``(U21 + U22 M)(U11 + U12 M)^{-1}``."""
    M = as_matrix(M, U.r, U.r)
    den = U.U11 + U.U12 @ M
    num = U.U21 + U.U22 @ M
    scale = max(1.0, norm(U.U11), norm(U.U12 @ M)) ** U.r
    if abs(np.linalg.det(den)) < tol * scale:
        raise DenominatorSingularError("U11 + U12 M is singular")
    return np.linalg.solve(den.T, num.T).T


def j_form_identity_residual(node: DarbouxNode, lam: complex) -> float:
    """Relative residual of
    ``i w* J w = i J + i (lam - conj lam) Pi* (A* - conj lam)^{-1} S^{-1} (A - lam)^{-1} Pi``.
    """
    if node.mode != "symmetric":
        raise UsageError("the J-form identity is stated for symmetric triples")
    J = node.J
    w = darboux_matrix(node, lam)
    lhs = 1j * adjoint(w) @ J @ w
    R = _resolvent_apply(node.A, lam, node.Pi)           # (A - lam)^{-1} Pi
    SR, _ = solve_with_cond(node.S, R)
    corr = 1j * (lam - np.conj(lam)) * adjoint(R) @ SR
    rhs = 1j * J + corr
    return norm(lhs - rhs) / (1.0 + max(norm(lhs), norm(J), norm(corr)))


def transformed_fundamental(path: DarbouxPath, Y: FundamentalSolution,
                            E=None) -> FundamentalSolution:
    """``Y~(x) = w_A(x) Y(x) E* w_A(0)^{-1} E`` on the nodes of ``Y``."""
    lam = Y.lam
    E = Y.E if E is None else as_matrix(E)
    idx = [path.index_of(float(x)) for x in Y.x]
    w0 = darboux_matrix(path.node(path.index_of(0.0)), lam)
    right = adjoint(E) @ np.linalg.solve(w0, E)
    out = np.empty_like(Y.Y)
    for k, i in enumerate(idx):
        out[k] = darboux_matrix(path.node(i), lam) @ Y.Y[k] @ right
    return FundamentalSolution(Y.x.copy(), out, lam, E)
