"""Closed-form GBDT for the indefinite model ``w = sign(x)``, ``p = 1``, ``q = r = 0``.

The triple is ``A = alpha^2``, ``S(0) = 0``, ``Pi(0) = [-2i alpha g, 2 mu alpha g]``
with ``mu`` purely imaginary.  The columns of ``Pi(x)`` are known explicitly on
each half-line and ``S(x)`` is the integral of ``Lambda2 Lambda2*`` from 0,
computed here by composite 5-point Gauss-Legendre quadrature.  Everything is
defined off ``x = 0``; ``S(0) = 0`` is singular by construction.

Square roots of the spectral parameter use the principal branch.  The
transformed potential does not depend on the branch, the solutions ``y~`` do.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import (DegenerateSpectralParameterError, DimensionError, SingularMatrixError,
                     UsageError)
from .gbdt import COND_LIMIT, DarbouxNode, GBDTTriple, darboux_matrix
from .matcore import J_STANDARD, adjoint, as_matrix, cond_estimate, min_eig
from .systems import Constant, ShinZettlSystem, Sign

__all__ = [
    "IndefModelParams", "lambda_columns", "s_quadrature", "controllability_check",
    "initial_solution", "IndefiniteTransform", "transformed_indefinite",
    "near_origin_report", "model_system",
]

CELLS_PER_UNIT = 100
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class IndefModelParams:
    alpha: np.ndarray
    mu: complex
    g: np.ndarray

    def __post_init__(self):
        alpha = as_matrix(self.alpha)
        n = alpha.shape[0]
        if alpha.shape != (n, n):
            raise DimensionError("alpha must be square")
        g = np.asarray(self.g, dtype=np.complex128).reshape(-1)
        if g.size != n:
            raise DimensionError(f"g must have {n} entries")
        mu = complex(self.mu)
        if abs(mu.real) > 1e-14:
            raise UsageError(f"mu={mu} must be purely imaginary")
        mu = complex(0.0, mu.imag)
        eye = np.eye(n)
        for shift in (1, -1, 1j, -1j):
            if abs(np.linalg.det(mu * alpha + shift * eye)) <= 1e-12:
                raise UsageError(f"det(mu alpha + {shift} I) vanishes")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "mu", mu)

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    @property
    def Pi0(self) -> np.ndarray:
        ag = self.alpha @ self.g
        return np.column_stack([-2j * ag, 2 * self.mu * ag])

    def triple(self) -> GBDTTriple:
        return GBDTTriple.symmetric(self.alpha @ self.alpha, np.zeros((self.n, self.n)),
                                    self.Pi0, J_STANDARD)

    def to_dict(self) -> dict:
        mj = lambda a: {"re": np.real(a).tolist(), "im": np.imag(a).tolist()}
        return {"alpha": mj(self.alpha), "mu": [self.mu.real, self.mu.imag],
                "g": mj(self.g.reshape(-1, 1))}


def model_system(interval=(-1.0, 1.0)) -> ShinZettlSystem:
    zero = Constant(0.0)
    return ShinZettlSystem(zero, zero, Constant(1.0), zero, Sign(), interval=interval)


def _expm_stack(M: np.ndarray, s: np.ndarray) -> np.ndarray:
    """``expm(s_k M)`` for every scalar ``s_k``."""
    return scipy.linalg.expm(s[:, None, None] * M[None])


def lambda_columns(params: IndefModelParams, x):
    """``(Lambda1, Lambda2)`` at ``x``; arrays of shape (n,) or (len(x), n)."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    a, g, mu = params.alpha, params.g, params.mu
    eye = np.eye(params.n)
    L1 = np.empty((xs.size, params.n), dtype=np.complex128)
    L2 = np.empty_like(L1)
    pos = xs >= 0
    for sel, c, shift in ((pos, 1j, 1.0), (~pos, 1.0, 1j)):
        if not sel.any():
            continue
        ep = _expm_stack(c * a, xs[sel])          # e^{c x alpha}
        em = _expm_stack(-c * a, xs[sel])
        u = (mu * a + shift * eye) @ g
        v = (mu * a - shift * eye) @ g
        epu, emv = ep @ u, em @ v
        L1[sel] = -c * (epu - emv) @ a.T
        L2[sel] = epu + emv
    if np.ndim(x) == 0:
        return L1[0], L2[0]
    return L1, L2


def _segment_integral(params, a, b):
    """``int_a^b Lambda2 Lambda2* dt`` with Gauss-Legendre on equal cells."""
    length = abs(b - a)
    cells = max(1, int(np.ceil(CELLS_PER_UNIT * length - 1e-9)))
    edges = np.linspace(a, b, cells + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = (mids[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    wts = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    _, L2 = lambda_columns(params, pts)
    return np.einsum("k,ki,kj->ij", wts, L2, L2.conj())


def s_quadrature(params: IndefModelParams, x):
    """``S(x) = int_0^x Lambda2 Lambda2*`` (x > 0), ``int_x^0`` (x < 0).

    Vectorized over ``x``: points on each side are accumulated outward from 0
    so the total cost is proportional to the covered length.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    n = params.n
    out = np.zeros((xs.size, n, n), dtype=np.complex128)
    for sign in (1.0, -1.0):
        idx = np.flatnonzero(sign * xs > 0)
        if idx.size == 0:
            continue
        order = idx[np.argsort(sign * xs[idx])]
        acc = np.zeros((n, n), dtype=np.complex128)
        prev = 0.0
        for k in order:
            if xs[k] != prev:
                # orientation: S grows on both half-lines
                lo, hi = sorted((prev, xs[k]))
                acc = acc + _segment_integral(params, lo, hi)
                prev = xs[k]
            out[k] = acc
    if np.ndim(x) == 0:
        return out[0]
    return out


def controllability_check(params: IndefModelParams, rtol: float = 1e-10) -> bool:
    """Kalman rank test for ``(blockdiag(alpha, -alpha), [g; g])``."""
    n = params.n
    a_hat = scipy.linalg.block_diag(params.alpha, -params.alpha)
    col = np.concatenate([params.g, params.g])
    cols = []
    for _ in range(2 * n):
        cols.append(col)
        col = a_hat @ col
    K = np.column_stack(cols)
    sv = np.linalg.svd(K, compute_uv=False)
    if sv[0] == 0.0:
        return False
    return int(np.sum(sv > rtol * sv[0])) == 2 * n


def initial_solution(lam: complex, x: float, h) -> np.ndarray:
    """Solution of the untransformed model system with ``y(0) = h``."""
    lam = complex(lam)
    if lam == 0:
        raise DegenerateSpectralParameterError("lambda = 0 is excluded")
    h = np.asarray(h, dtype=np.complex128).reshape(2)
    if x == 0:
        return h.copy()
    s = np.sqrt(lam)
    k = 1j * s if x > 0 else s
    T = np.array([[1, 1], [k, -k]])
    D = np.exp(np.array([k, -k]) * x)
    return T @ (D * np.linalg.solve(T, h))


@dataclass
class IndefiniteTransform:
    params: IndefModelParams
    x: np.ndarray
    Pi: np.ndarray         # (N, n, 2)
    S: np.ndarray          # (N, n, n)
    X: np.ndarray          # (N, 2, 2)
    valid: np.ndarray
    s_cond: np.ndarray

    @cached_property
    def sign(self) -> np.ndarray:
        return np.sign(self.x)

    @property
    def r_tilde(self) -> np.ndarray:
        return -self.sign * self.X[:, 0, 1]

    @property
    def q_tilde(self) -> np.ndarray:
        X11 = self.X[:, 0, 0]
        return self.sign * (X11 + np.conj(X11))

    @property
    def q_breve(self) -> np.ndarray:
        X = self.X
        return 2 * self.sign * (X[:, 0, 0] - X[:, 1, 1]) + 2 * X[:, 0, 1] ** 2

    @property
    def det_S(self) -> np.ndarray:
        return np.linalg.det(self.S)

    @property
    def min_eig_S(self) -> np.ndarray:
        return np.array([min_eig(s) for s in self.S])

    def node(self, i: int) -> DarbouxNode:
        p = self.params
        return DarbouxNode.symmetric(self.x[i], p.alpha @ p.alpha, self.Pi[i], self.S[i],
                                     J_STANDARD)

    def darboux_matrix(self, i: int, lam: complex) -> np.ndarray:
        if not self.valid[i]:
            raise SingularMatrixError(f"S(x) is singular at x={self.x[i]}")
        return darboux_matrix(self.node(i), lam)

    def y_tilde(self, lam: complex, h) -> np.ndarray:
        """``w_A(x, lam) y(x, lam)`` at every node, shape (N, 2)."""
        out = np.full((len(self.x), 2), np.nan, dtype=np.complex128)
        for i in np.flatnonzero(self.valid):
            out[i] = self.darboux_matrix(i, lam) @ initial_solution(lam, self.x[i], h)
        return out


def transformed_indefinite(params: IndefModelParams, grid, strict: bool = False,
                           cond_limit: float = COND_LIMIT) -> IndefiniteTransform:
    """Closed-form ``X = J Pi* S^{-1} Pi`` and derived coefficients on ``grid``.

    ``grid`` must not contain 0.  With ``strict`` a singular ``S`` at any
    node raises; otherwise such nodes are reported through ``valid``.
    """
    x = np.asarray(grid, dtype=float).reshape(-1)
    if np.any(x == 0.0):
        raise UsageError("x = 0 is not an evaluation node of the model")
    L1, L2 = lambda_columns(params, x)
    Pi = np.stack([L1, L2], axis=-1)
    S = s_quadrature(params, x)
    N = x.size
    X = np.full((N, 2, 2), np.nan, dtype=np.complex128)
    valid = np.zeros(N, bool)
    conds = np.empty(N)
    for i in range(N):
        conds[i] = cond_estimate(S[i])
        if conds[i] > cond_limit:
            if strict:
                raise SingularMatrixError(f"S(x) is singular at x={x[i]}", cond=conds[i])
            continue
        valid[i] = True
        X[i] = J_STANDARD @ adjoint(Pi[i]) @ np.linalg.solve(S[i], Pi[i])
    return IndefiniteTransform(params, x, Pi, S, X, valid, conds)


def near_origin_report(params: IndefModelParams, xs=(1e-1, 1e-2, 1e-3, 1e-4)):
    """Rows ``(x, x^2 |q_breve(x)|)`` for both signs of x; informational only."""
    pts = np.array([s * v for v in xs for s in (1.0, -1.0)])
    tr = transformed_indefinite(params, pts)
    return [(float(x), float(x * x * abs(q)) if ok else float("nan"))
            for x, q, ok in zip(tr.x, tr.q_breve, tr.valid)]
