"""Explicit solutions of the transformed dynamical system
``dz/dx = J(-H1 dz/dt + H0~ z)`` and of the two-way diffusion equation.

The solutions are ``z~(x, t) = J Pi(x)* S(x)^{-1} exp(-t A) h`` built from a
symmetric-mode Darboux path.  Residuals are checked with second-order
finite differences: central three-point stencils in the interior and
one-sided three-point stencils at the ends of each run of valid nodes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from . import _ode
from .errors import InvariantViolationError, SingularMatrixError, UsageError
from .gbdt import DarbouxPath, _sl_parts, transformed_sl_potential
from .matcore import adjoint, expm, solve_with_cond
from .systems import hamiltonian_form

__all__ = [
    "DynamicalSolution", "dynamical_solution", "dynamical_residual",
    "derivative_law_residual", "energy_formula", "energy_quadrature",
    "TwoWaySolution", "two_way_solution",
]


@dataclass
class DynamicalSolution:
    path: DarbouxPath
    h: np.ndarray
    t: np.ndarray
    z: np.ndarray          # (Nx, Nt, m); NaN at singular nodes
    valid: np.ndarray      # (Nx,)

    @property
    def x(self):
        return self.path.x


def _symmetric(path):
    if path.mode != "symmetric":
        raise UsageError("dynamical solutions need a symmetric-mode path")
    return path.triple


def _h_vector(path, h):
    h = np.asarray(h, dtype=np.complex128).reshape(-1)
    if h.size != path.triple.n:
        raise UsageError(f"h must have n={path.triple.n} entries")
    return h


def _kernel(path, i):
    """``J Pi* S^{-1}`` at node i (m x n)."""
    node = path.node(i)
    sinv, _ = solve_with_cond(node.S, np.eye(node.S.shape[0]))
    return node.J @ adjoint(node.Pi1) @ sinv


def dynamical_solution(path: DarbouxPath, h, t_grid, require_all: bool = False
                       ) -> DynamicalSolution:
    t = _symmetric(path)
    h = _h_vector(path, h)
    ts = np.asarray(t_grid, dtype=float).reshape(-1)
    if require_all and not path.invertible.all():
        i = int(np.flatnonzero(~path.invertible)[0])
        raise SingularMatrixError(f"S(x) is singular at x={path.x[i]}")
    eth = np.array([expm(-tk * t.A) @ h for tk in ts])        # (Nt, n)
    z = np.full((len(path), len(ts), t.m), np.nan, dtype=np.complex128)
    for i in np.flatnonzero(path.invertible):
        z[i] = eth @ _kernel(path, i).T
    return DynamicalSolution(path, h, ts, z, path.invertible.copy())


def _H0_tilde(sys, x, X):
    H1 = sys.H1(x)
    return sys.H0(x) - adjoint(X) @ H1 - H1 @ X


def _dzdt(sol, dt):
    """Second-order d/dt of the samples: on the t grid, or locally with step ``dt``."""
    if dt is None:
        if len(sol.t) < 3:
            raise UsageError("need >= 3 time samples or an explicit dt")
        d, _ = _ode.fd_first(np.swapaxes(np.nan_to_num(sol.z), 0, 1), sol.t)
        return np.swapaxes(d, 0, 1)
    plus = dynamical_solution(sol.path, sol.h, sol.t + dt).z
    minus = dynamical_solution(sol.path, sol.h, sol.t - dt).z
    return (plus - minus) / (2.0 * dt)


def dynamical_residual(sol: DynamicalSolution, sys=None, dt=None):
    """Relative residual of ``dz/dx - J(-H1 dz/dt + H0~ z)`` per (x, t) sample.

    Returns ``(residual, mask)``; both of shape ``(Nx, Nt)``.
    """
    path = sol.path
    ham = hamiltonian_form(path.system if sys is None else sys)
    J = ham.J
    ex = ham.exceptional()
    valid = sol.valid & np.array([x not in ex for x in path.x])
    dzdx, okx = _ode.fd_first(sol.z, path.x, valid)
    dzdt = _dzdt(sol, dt)
    nt = len(sol.t)
    res = np.full((len(path), nt), np.nan)
    mask = np.zeros((len(path), nt), bool)
    for i in np.flatnonzero(okx):
        x = float(path.x[i])
        H1 = ham.H1(x)
        H0t = _H0_tilde(ham, x, path.X[i])
        for k in range(nt):
            lhs = dzdx[i, k]
            a = -J @ H1 @ dzdt[i, k]
            b = J @ H0t @ sol.z[i, k]
            scale = 1.0 + max(np.linalg.norm(lhs), np.linalg.norm(a), np.linalg.norm(b))
            res[i, k] = np.linalg.norm(lhs - a - b) / scale
            mask[i, k] = True
    return res, mask


def derivative_law_residual(path: DarbouxPath, sys=None):
    """Residual of ``(J Pi* S^{-1})' = J(H1 J Pi* S^{-1} A + H0~ J Pi* S^{-1})``.

    Returns ``(residual, mask)`` over the nodes; FD derivative in x.
    """
    t = _symmetric(path)
    ham = hamiltonian_form(path.system if sys is None else sys)
    J = ham.J
    ex = ham.exceptional()
    valid = path.invertible & np.array([x not in ex for x in path.x])
    K = np.full((len(path), t.m, t.n), np.nan, dtype=np.complex128)
    for i in np.flatnonzero(valid):
        K[i] = _kernel(path, i)
    dK, ok = _ode.fd_first(K, path.x, valid)
    res = np.full(len(path), np.nan)
    for i in np.flatnonzero(ok):
        x = float(path.x[i])
        rhs = J @ (ham.H1(x) @ K[i] @ t.A + _H0_tilde(ham, x, path.X[i]) @ K[i])
        res[i] = np.linalg.norm(dK[i] - rhs) / (1.0 + max(np.linalg.norm(dK[i]),
                                                           np.linalg.norm(rhs)))
    return res, ok


def _radicand(path, h, t, a):
    tr = _symmetric(path)
    h = _h_vector(path, h)
    i0 = path.index_of(0.0)
    ia = path.index_of(a)
    if a <= 0:
        raise UsageError("energy needs a > 0")
    if not (path.invertible[i0] and path.invertible[ia]):
        raise SingularMatrixError("S(0) and S(a) must be invertible")
    v = expm(-t * tr.A) @ h
    s0inv, _ = solve_with_cond(path.S[i0], v)
    sainv, _ = solve_with_cond(path.S[ia], v)
    return float(np.real(np.vdot(v, s0inv - sainv)))


def energy_formula(path: DarbouxPath, h, t: float, a: float,
                   fail_tol: float = 1e-9) -> float:
    """``sqrt(h* exp(-tA*) (S(0)^{-1} - S(a)^{-1}) exp(-tA) h)``.

    A slightly negative radicand (>= -fail_tol) is clamped to 0; anything
    below signals that ``S`` was not monotone on ``[0, a]``.
    """
    rad = _radicand(path, h, t, a)
    if rad < -fail_tol:
        raise InvariantViolationError(f"energy radicand {rad:.3g} < 0")
    if rad < 0:
        rad = 0.0
    return float(np.sqrt(rad))


def energy_quadrature(path: DarbouxPath, h, t: float, a: float, sys=None) -> float:
    """Trapezoid rule for ``int_0^a z~* H1 z~ dx`` over the path nodes, square-rooted."""
    ham = hamiltonian_form(path.system if sys is None else sys)
    i0, ia = path.index_of(0.0), path.index_of(a)
    sol = dynamical_solution(path, h, [t])
    idx = np.arange(i0, ia + 1)
    if not sol.valid[idx].all():
        raise SingularMatrixError("S(x) must be invertible on [0, a]")
    ex = ham.exceptional()
    vals = []
    for i in idx:
        x = float(path.x[i])
        side = 1 if (x in ex and i == i0) else (-1 if x in ex else 0)
        z = sol.z[i, 0]
        vals.append(np.real(np.vdot(z, ham.H1(x, side) @ z)))
    return float(np.sqrt(max(trapezoid(vals, path.x[idx]), 0.0)))


@dataclass
class TwoWaySolution:
    x: np.ndarray
    t: np.ndarray
    z1: np.ndarray          # (Nx, Nt)
    q_breve: np.ndarray     # (Nx,)
    residual: np.ndarray    # (Nx, Nt); NaN where no stencil
    mask: np.ndarray        # (Nx,) nodes where the residual is defined


def two_way_solution(path: DarbouxPath, h, t_grid, sys=None, dt=None) -> TwoWaySolution:
    """First entry of ``z~`` and the residual of ``w dz/dt = (p z')' - q_breve z``.

    The x-derivative uses the compact stencil with ``p`` at cell midpoints;
    the t-derivative uses second-order finite differences, on the t grid or
    locally with step ``dt``.
    Nodes next to singular or exceptional nodes carry no residual.
    """
    sys = path.system if sys is None else sys
    p, _, w = _sl_parts(sys)
    qb = transformed_sl_potential(sys, path)
    sol = dynamical_solution(path, h, t_grid)
    z1 = sol.z[:, :, 0]
    ts = sol.t
    dzdt = _dzdt(sol, dt)[:, :, 0]
    x = path.x
    N = len(x)
    ok = qb.valid
    res = np.full((N, len(ts)), np.nan)
    mask = np.zeros(N, bool)
    for i in range(1, N - 1):
        if not (ok[i - 1] and ok[i] and ok[i + 1]):
            continue
        hm, hp = x[i] - x[i - 1], x[i + 1] - x[i]
        pm, pp = p(0.5 * (x[i] + x[i - 1])), p(0.5 * (x[i] + x[i + 1]))
        flux = (pp * (z1[i + 1] - z1[i]) / hp - pm * (z1[i] - z1[i - 1]) / hm) * 2 / (hm + hp)
        lhs = w(x[i]) * dzdt[i]
        pot = qb.values[i] * z1[i]
        scale = 1.0 + np.maximum(np.abs(lhs), np.maximum(np.abs(flux), np.abs(pot)))
        res[i] = np.abs(lhs - flux + pot) / scale
        mask[i] = True
    return TwoWaySolution(x.copy(), ts, z1, qb.values, res, mask)
