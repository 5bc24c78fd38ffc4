"""GBDT engine: parameter triples, propagation along x, Darboux matrices and
transformed coefficients.

A general triple consists of ``A1, A2, S0`` (n x n) and ``Pi1_0, Pi2_0``
(n x m) tied by ``A1 S0 - S0 A2 = Pi1_0 Pi2_0*``.  For systems of the form
``J (lam H1 + H0)`` the symmetric reduction uses ``A1 = A, A2 = A*,
Pi2 = -Pi J`` and a Hermitian ``S0``, so only ``(A, S0, Pi0)`` is free and
the identity becomes ``A S - S A* = Pi J Pi*``.

``propagate`` integrates the linear equations for ``Pi1, Pi2, S`` with
classical RK4 on the grid, outward from 0.  The identity is monitored at
every node (never re-projected); nodes whose ``S`` has a 1-norm condition
estimate above ``cond_limit`` are flagged singular and carry no ``X``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from . import _ode
from .errors import (DialectError, DimensionError, InvariantViolationError,
                     PropagationDriftError, ResolventError, SingularMatrixError,
                     TripleIdentityError, UsageError)
from .matcore import (adjoint, as_matrix, cond_estimate, norm,
                      relative_residual, solve_with_cond)
from .systems import (HamiltonianSystem, ShinZettlSystem, SturmLiouvilleSystem,
                      SystemCoefficients, hamiltonian_form)

__all__ = [
    "GBDTTriple", "TripleReport", "validate_triple", "DarbouxNode", "DarbouxPath",
    "propagate", "x_matrix", "darboux_matrix", "transformed_Q0", "transformed_F",
    "intertwining_residual", "TransformedSystem", "transform_coefficients",
    "SLPotential", "transformed_sl_potential", "sl_potential_chain_form",
    "x12_derivative_identity", "GaugeNormalization", "gauge_normalize",
]

IDENTITY_TOL = 1e-10
DRIFT_TOL = 1e-7
COND_LIMIT = 1e12


@dataclass(frozen=True)
class GBDTTriple:
    """Parameter matrices of a GBDT.  Always stored in general form."""

    A1: np.ndarray
    A2: np.ndarray
    S0: np.ndarray
    Pi1_0: np.ndarray
    Pi2_0: np.ndarray
    mode: str = "general"
    J: Optional[np.ndarray] = None

    @classmethod
    def general(cls, A1, A2, S0, Pi1_0, Pi2_0) -> "GBDTTriple":
        return cls(*(as_matrix(a) for a in (A1, A2, S0, Pi1_0, Pi2_0)), mode="general")

    @classmethod
    def symmetric(cls, A, S0, Pi0, J) -> "GBDTTriple":
        A, S0, Pi0, J = (as_matrix(a) for a in (A, S0, Pi0, J))
        if Pi0.shape[1] != J.shape[0]:
            raise DimensionError(f"Pi0 has {Pi0.shape[1]} columns but J is {J.shape[0]} x {J.shape[1]}")
        return cls(A, adjoint(A), S0, Pi0, -Pi0 @ J, mode="symmetric", J=J)

    @classmethod
    def general_from_sylvester(cls, A1, A2, Pi1_0, Pi2_0) -> "GBDTTriple":
        """Solve ``A1 S0 - S0 A2 = Pi1_0 Pi2_0*`` for ``S0`` (spectra must be disjoint)."""
        A1, A2, Pi1_0, Pi2_0 = (as_matrix(a) for a in (A1, A2, Pi1_0, Pi2_0))
        S0 = scipy.linalg.solve_sylvester(A1, -A2, Pi1_0 @ adjoint(Pi2_0))
        return cls.general(A1, A2, S0, Pi1_0, Pi2_0)

    @classmethod
    def symmetric_from_S0(cls, S0, Pi0, J, K=None) -> "GBDTTriple":
        """Pick ``A = (K + Pi0 J Pi0*/2) S0^{-1}`` so that the identity holds.

        ``K`` must be Hermitian (default 0); ``S0`` Hermitian and invertible.
        """
        S0, Pi0, J = as_matrix(S0), as_matrix(Pi0), as_matrix(J)
        K = np.zeros_like(S0) if K is None else as_matrix(K)
        A = np.linalg.solve(S0.T, (K + 0.5 * Pi0 @ J @ adjoint(Pi0)).T).T
        return cls.symmetric(A, S0, Pi0, J)

    @property
    def n(self) -> int:
        return self.A1.shape[0]

    @property
    def m(self) -> int:
        return self.Pi1_0.shape[1]

    @property
    def A(self) -> np.ndarray:
        return self.A1

    @property
    def Pi0(self) -> np.ndarray:
        return self.Pi1_0

    def to_dict(self) -> dict:
        mj = lambda a: {"re": a.real.tolist(), "im": a.imag.tolist()}
        if self.mode == "symmetric":
            return {"mode": "symmetric", "A": mj(self.A1), "S0": mj(self.S0),
                    "Pi0": mj(self.Pi1_0)}
        return {"mode": "general", "A1": mj(self.A1), "A2": mj(self.A2), "S0": mj(self.S0),
                "Pi1_0": mj(self.Pi1_0), "Pi2_0": mj(self.Pi2_0)}


@dataclass(frozen=True)
class TripleReport:
    valid: bool
    residual: float
    relative: float
    hermitian_residual: float = 0.0
    message: str = ""


def _check_dims(t: GBDTTriple):
    n = t.A1.shape[0]
    for name, a, shape in (("A1", t.A1, (n, n)), ("A2", t.A2, (n, n)), ("S0", t.S0, (n, n))):
        if a.shape != shape:
            raise DimensionError(f"{name} has shape {a.shape}, expected {shape}")
    m = t.Pi1_0.shape[1]
    for name, a in (("Pi1_0", t.Pi1_0), ("Pi2_0", t.Pi2_0)):
        if a.shape != (n, m):
            raise DimensionError(f"{name} has shape {a.shape}, expected {(n, m)}")
    if t.mode == "symmetric":
        if t.J is None or t.J.shape != (m, m):
            raise DimensionError("symmetric triple needs an m x m J")
    elif t.mode != "general":
        raise UsageError(f"unknown triple mode {t.mode!r}")


def validate_triple(t: GBDTTriple, tol: float = IDENTITY_TOL) -> TripleReport:
    """Check the defining identity; dimension problems raise instead."""
    _check_dims(t)
    lhs = t.A1 @ t.S0 - t.S0 @ t.A2
    rhs = t.Pi1_0 @ adjoint(t.Pi2_0)
    res = norm(lhs - rhs)
    scale = 1.0 + max(norm(t.A1 @ t.S0), norm(t.S0 @ t.A2), norm(rhs))
    rel = res / scale
    herm = 0.0
    msg = ""
    valid = rel <= tol
    if not valid:
        msg = f"triple identity A1 S0 - S0 A2 = Pi1 Pi2* violated (residual {res:.3g})"
    if t.mode == "symmetric":
        herm = norm(t.S0 - adjoint(t.S0))
        if herm > tol * (1.0 + norm(t.S0)):
            valid = False
            msg = (msg + "; " if msg else "") + "S0 is not Hermitian"
    return TripleReport(valid, res, rel, herm, msg)


# ---------------------------------------------------------------------------
# propagation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DarbouxNode:
    x: float
    A1: np.ndarray
    A2: np.ndarray
    Pi1: np.ndarray
    Pi2: np.ndarray
    S: np.ndarray
    s_cond: float
    invertible: bool
    mode: str = "general"
    J: Optional[np.ndarray] = None

    @property
    def Pi(self) -> np.ndarray:
        return self.Pi1

    @property
    def A(self) -> np.ndarray:
        return self.A1

    @classmethod
    def symmetric(cls, x, A, Pi, S, J, cond_limit=COND_LIMIT) -> "DarbouxNode":
        """Node built from closed-form data rather than propagation."""
        A, Pi, S, J = (as_matrix(a) for a in (A, Pi, S, J))
        c = cond_estimate(S)
        return cls(float(x), A, adjoint(A), Pi, -Pi @ J, S, c, bool(c <= cond_limit),
                   "symmetric", J)


@dataclass
class DarbouxPath:
    triple: GBDTTriple
    system: SystemCoefficients
    x: np.ndarray
    Pi1: np.ndarray            # (N, n, m)
    Pi2: np.ndarray            # (N, n, m)
    S: np.ndarray              # (N, n, n)
    identity_residual: np.ndarray
    s_cond: np.ndarray
    invertible: np.ndarray
    X: np.ndarray              # (N, m, m); NaN where S is flagged singular
    hermitian_residual: Optional[np.ndarray] = None

    @property
    def mode(self) -> str:
        return self.triple.mode

    def __len__(self):
        return len(self.x)

    def index_of(self, x: float, tol: float = 1e-12) -> int:
        i = int(np.argmin(np.abs(self.x - x)))
        if abs(self.x[i] - x) > tol * (1.0 + abs(x)):
            raise UsageError(f"x={x} is not a grid node")
        return i

    def node(self, i: int) -> DarbouxNode:
        t = self.triple
        return DarbouxNode(float(self.x[i]), t.A1, t.A2, self.Pi1[i], self.Pi2[i], self.S[i],
                           float(self.s_cond[i]), bool(self.invertible[i]), t.mode, t.J)

    @property
    def Pi(self) -> np.ndarray:
        return self.Pi1


def _grid(grid) -> np.ndarray:
    if isinstance(grid, dict):
        return _ode.make_grid(grid["x_min"], grid["x_max"], grid["steps"])
    if isinstance(grid, tuple) and len(grid) == 3:
        return _ode.make_grid(*grid)
    return np.asarray(grid, dtype=float)


class _Cache:
    """Memoize coefficient matrices per (x, side) within one integration."""

    def __init__(self, fn):
        self.fn = fn
        self.store = {}

    def __call__(self, x, side):
        key = (x, side)
        v = self.store.get(key)
        if v is None:
            v = self.fn(x, side)
            self.store[key] = v
        return v


def _symmetric_rhs(t: GBDTTriple, ham: HamiltonianSystem):
    A, J = t.A1, t.J
    JH1Js = _Cache(lambda x, s: J @ ham.H1(x, s) @ adjoint(J))
    JH1 = _Cache(lambda x, s: J @ ham.H1(x, s))
    JH0 = _Cache(lambda x, s: J @ ham.H0(x, s))

    def rhs(x, y, side):
        Pi, S = y
        dPi = -A @ Pi @ JH1(x, side) - Pi @ JH0(x, side)
        dS = Pi @ JH1Js(x, side) @ adjoint(Pi)
        return dPi, dS

    return rhs


def _general_rhs(t: GBDTTriple, sys: SystemCoefficients):
    A1, A2 = t.A1, t.A2
    Q1 = _Cache(sys.Q1)
    Q0 = _Cache(sys.Q0)

    def rhs(x, y, side):
        P1, P2s, S = y
        q1, q0 = Q1(x, side), Q0(x, side)
        dP1 = A1 @ P1 @ q1 + P1 @ q0
        dP2s = -q1 @ P2s @ A2 - q0 @ P2s
        dS = P1 @ q1 @ P2s
        return dP1, dP2s, dS

    return rhs


def _check_system_J(t: GBDTTriple, sys: SystemCoefficients) -> HamiltonianSystem:
    try:
        ham = hamiltonian_form(sys)
    except DialectError as exc:
        raise DialectError(f"symmetric triple needs a system with a J-form: {exc}") from exc
    if not np.allclose(ham.J, t.J, rtol=0, atol=1e-14):
        raise UsageError("triple J differs from the system J")
    return ham


def propagate(t: GBDTTriple, sys: SystemCoefficients, grid, tol: float = DRIFT_TOL,
              cond_limit: float = COND_LIMIT, check: bool = True) -> DarbouxPath:
    """Integrate ``Pi1, Pi2, S`` over ``grid`` (nodes incl. 0, or a grid spec).

    Raises :class:`TripleIdentityError` for an invalid triple and
    :class:`PropagationDriftError` if the relative identity residual exceeds
    ``tol`` at any node (refine the grid).
    """
    report = validate_triple(t)
    if not report.valid:
        raise TripleIdentityError(report.message, report.residual)
    if t.m != sys.m:
        raise DimensionError(f"triple has m={t.m}, system has m={sys.m}")
    x = _grid(grid)
    lo, hi = sys.interval
    if x[0] < lo - 1e-12 or x[-1] > hi + 1e-12:
        raise UsageError(f"grid [{x[0]}, {x[-1]}] leaves the system interval {sys.interval}")

    if t.mode == "symmetric":
        ham = _check_system_J(t, sys)
        states = _ode.integrate_from_origin(_symmetric_rhs(t, ham), (t.Pi1_0, t.S0), x)
        Pi1 = np.array([s[0] for s in states])
        S = np.array([s[1] for s in states])
        Pi2 = -Pi1 @ t.J
    else:
        states = _ode.integrate_from_origin(_general_rhs(t, sys),
                                            (t.Pi1_0, adjoint(t.Pi2_0), t.S0), x)
        Pi1 = np.array([s[0] for s in states])
        Pi2 = adjoint(np.array([s[1] for s in states]))
        S = np.array([s[2] for s in states])

    N, m = len(x), t.m
    resid = np.empty(N)
    conds = np.empty(N)
    inv = np.zeros(N, bool)
    X = np.full((N, m, m), np.nan, dtype=np.complex128)
    herm = np.zeros(N) if t.mode == "symmetric" else None
    for i in range(N):
        R = t.A1 @ S[i] - S[i] @ t.A2 - Pi1[i] @ adjoint(Pi2[i])
        resid[i] = norm(R) / (1.0 + norm(S[i]))
        if herm is not None:
            herm[i] = norm(S[i] - adjoint(S[i])) / (1.0 + norm(S[i]))
        try:
            sol, c = solve_with_cond(S[i], Pi1[i])
        except SingularMatrixError:
            conds[i] = np.inf
            continue
        conds[i] = c
        if c <= cond_limit:
            inv[i] = True
            X[i] = adjoint(Pi2[i]) @ sol
    path = DarbouxPath(t, sys, x, Pi1, Pi2, S, resid, conds, inv, X, herm)
    if check:
        bad = np.flatnonzero(resid > tol)
        if bad.size:
            i = int(bad[0])
            raise PropagationDriftError(
                f"identity residual {resid[i]:.3g} > {tol:g} at x={x[i]}; refine the grid",
                x=float(x[i]), residual=float(resid[i]))
        if herm is not None:
            bad = np.flatnonzero(herm > 1e-9)
            if bad.size:
                i = int(bad[0])
                raise PropagationDriftError(f"S lost Hermiticity at x={x[i]}", x=float(x[i]),
                                            residual=float(herm[i]))
    return path


# ---------------------------------------------------------------------------
# node-level quantities
# ---------------------------------------------------------------------------

def _require_invertible(node: DarbouxNode):
    if not node.invertible:
        raise SingularMatrixError(f"S(x) is singular at x={node.x} (cond {node.s_cond:.3g})",
                                  cond=node.s_cond)


def x_matrix(node: DarbouxNode) -> np.ndarray:
    """``X = Pi2* S^{-1} Pi1`` (equal to ``J Pi* S^{-1} Pi`` in symmetric mode)."""
    _require_invertible(node)
    sol, _ = solve_with_cond(node.S, node.Pi1)
    if node.mode == "symmetric":
        return node.J @ adjoint(node.Pi1) @ sol
    return adjoint(node.Pi2) @ sol


def _resolvent_apply(A, lam, B):
    n = A.shape[0]
    ev = np.linalg.eigvals(A) if n else np.array([])
    if ev.size and np.min(np.abs(ev - lam)) <= 1e-12 * (1.0 + abs(lam)):
        raise ResolventError(f"lambda={lam} lies in the spectrum of A")
    return np.linalg.solve(A - lam * np.eye(n), B)


def darboux_matrix(node: DarbouxNode, lam: complex) -> np.ndarray:
    """``w_A(x, lam) = I - Pi2* S^{-1} (A1 - lam)^{-1} Pi1``."""
    _require_invertible(node)
    m = node.Pi1.shape[1]
    R = _resolvent_apply(node.A1, lam, node.Pi1)
    sol, _ = solve_with_cond(node.S, R)
    left = node.J @ adjoint(node.Pi1) if node.mode == "symmetric" else adjoint(node.Pi2)
    return np.eye(m, dtype=np.complex128) - left @ sol


def transformed_Q0(sys: SystemCoefficients, x: float, X: np.ndarray, side: int = 0):
    q1 = sys.Q1(x, side)
    return sys.Q0(x, side) - (q1 @ X - X @ q1)


def transformed_F(sys: SystemCoefficients, x: float, X: np.ndarray, lam: complex, side=0):
    return -(lam * sys.Q1(x, side) + transformed_Q0(sys, x, X, side))


def _fd_weights(x, i):
    return _ode._lagrange_deriv_weights(x[[i - 1, i, i + 1]], x[i])


def intertwining_residual(path: DarbouxPath, lam: complex, i: int,
                          sys: Optional[SystemCoefficients] = None) -> float:
    """Relative residual of ``w' = F~ w - w F`` at interior node ``i`` (central FD)."""
    sys = path.system if sys is None else sys
    if not 0 < i < len(path) - 1:
        raise IndexError(f"node {i} is not an interior node")
    ws = [darboux_matrix(path.node(k), lam) for k in (i - 1, i, i + 1)]
    wa, wb, wc = _fd_weights(path.x, i)
    dw = wa * ws[0] + wb * ws[1] + wc * ws[2]
    x = float(path.x[i])
    w = ws[1]
    rhs1 = transformed_F(sys, x, path.X[i], lam) @ w
    rhs2 = w @ sys.F(x, lam)
    return relative_residual(dw - (rhs1 - rhs2), dw, rhs1, rhs2)


# ---------------------------------------------------------------------------
# transformed coefficients
# ---------------------------------------------------------------------------

@dataclass
class TransformedSystem:
    """Transformed coefficients sampled at the path nodes.

    ``fields`` holds the dialect's coefficients (``Q0``; ``H0``/``H1``;
    ``r1``/``r2``/``q``/``p_inv``/``omega``; ``p``/``q``/``omega`` where ``q``
    is the transformed Sturm-Liouville potential).  Every dialect also keeps
    the general ``Q1``/``Q0`` so :meth:`F` works uniformly.  Entries at
    singular or exceptional nodes are NaN and ``valid`` is False there.
    """

    dialect: str
    x: np.ndarray
    valid: np.ndarray
    fields: dict
    base: SystemCoefficients
    hermitian_residual: Optional[np.ndarray] = None

    def F(self, i: int, lam: complex) -> np.ndarray:
        if not self.valid[i]:
            raise SingularMatrixError(f"no transformed coefficients at x={self.x[i]}")
        return -(lam * self.fields["Q1"][i] + self.fields["Q0"][i])

    def _flag(self, check, tol):
        for i in np.flatnonzero(self.valid):
            if not check(i, tol):
                return False
        return True

    def lagrange_symmetric(self, tol=1e-9) -> bool:
        if "r1" not in self.fields:
            raise UsageError("Lagrange flags apply to Shin-Zettl coefficients")
        f = self.fields

        def ok(i, tol):
            scale = 1 + max(abs(f[k][i]) for k in ("r1", "r2", "q", "p_inv", "omega"))
            real = all(abs(f[k][i].imag) <= tol * scale for k in ("q", "p_inv", "omega"))
            return real and abs(f["r1"][i] + np.conj(f["r2"][i])) <= tol * scale

        return self._flag(ok, tol)

    def lagrange_j_symmetric(self, tol=1e-9) -> bool:
        f = self.fields
        return self._flag(
            lambda i, tol: abs(f["r1"][i] + f["r2"][i]) <= tol * (1 + abs(f["r1"][i])), tol)


def _node_side(sys, x):
    # exceptional points are never evaluation nodes for transformed data
    return x in sys.exceptional()


def _pi_star_sinv_pi(node: DarbouxNode):
    sol, _ = solve_with_cond(node.S, node.Pi1)
    return adjoint(node.Pi1) @ sol


def transform_coefficients(sys: SystemCoefficients, path: DarbouxPath) -> TransformedSystem:
    """Coefficients of the transformed system at every invertible node of ``path``."""
    N, m = len(path), path.triple.m
    dialect = sys.dialect
    if dialect in ("Hamiltonian", "SturmLiouville") and path.mode != "symmetric":
        raise UsageError(f"{dialect} transform needs a symmetric-mode path")
    if dialect == "SturmLiouville":
        if not sys.lagrange_symmetric:
            raise DialectError("Sturm-Liouville transform needs real p, q, w")
    valid = path.invertible.copy()
    for i in range(N):
        if valid[i] and _node_side(sys, float(path.x[i])):
            valid[i] = False
    nanm = lambda: np.full((N, m, m), np.nan, dtype=np.complex128)
    nans = lambda: np.full(N, np.nan, dtype=np.complex128)
    Q1s, Q0s = nanm(), nanm()
    fields = {"Q1": Q1s, "Q0": Q0s}
    herm = None
    if dialect == "Hamiltonian":
        fields.update(H1=nanm(), H0=nanm(), Z=nanm())
        herm = np.full(N, np.nan)
    elif dialect in ("ShinZettl", "SturmLiouville"):
        fields.update({k: nans() for k in ("r1", "r2", "q", "p_inv", "omega")})
    for i in np.flatnonzero(valid):
        x = float(path.x[i])
        X = path.X[i]
        Q1s[i] = sys.Q1(x)
        Q0s[i] = transformed_Q0(sys, x, X)
        if dialect == "Hamiltonian":
            J, H1 = sys.J, sys.H1(x)
            P = _pi_star_sinv_pi(path.node(i))
            Z = P @ J @ H1 + H1 @ adjoint(J) @ P
            H0t = sys.H0(x) + Z
            fields["H1"][i], fields["H0"][i], fields["Z"][i] = H1, H0t, Z
            herm[i] = norm(H0t - adjoint(H0t)) / (1.0 + norm(H0t))
        elif dialect in ("ShinZettl", "SturmLiouville"):
            sz = sys.first_order if dialect == "SturmLiouville" else sys
            w = sz.omega(x)
            fields["r1"][i] = sz.r1(x) - w * X[0, 1]
            fields["r2"][i] = sz.r2(x) + w * X[0, 1]
            fields["q"][i] = sz.q(x) + w * (X[0, 0] - X[1, 1])
            fields["p_inv"][i] = sz.p_inv(x)
            fields["omega"][i] = w
    if dialect == "SturmLiouville":
        fields["q_breve"] = transformed_sl_potential(sys, path).values
    return TransformedSystem(dialect, path.x.copy(), valid, fields, sys, herm)


# ---------------------------------------------------------------------------
# Sturm-Liouville potential
# ---------------------------------------------------------------------------

@dataclass
class SLPotential:
    x: np.ndarray
    values: np.ndarray   # complex; NaN where unavailable
    valid: np.ndarray

    @property
    def max_imag(self) -> float:
        v = self.values[self.valid]
        return float(np.max(np.abs(v.imag))) if v.size else 0.0


def _sl_parts(sys):
    """(p, q, w) scalar fields of a real Sturm-Liouville / Shin-Zettl (r = 0) system."""
    if isinstance(sys, SturmLiouvilleSystem):
        p, q, w = sys.p, sys.q, sys.omega
        first = sys.first_order
    elif isinstance(sys, ShinZettlSystem):
        first = sys
        p, q, w = sys.p(), sys.q, sys.omega
    else:
        raise DialectError("transformed potential needs a Sturm-Liouville or Shin-Zettl system")
    if not first.r_vanishes:
        raise DialectError("transformed potential needs r1 = r2 = 0")
    if not first.lagrange_symmetric:
        raise DialectError("transformed potential needs real p, q, w")
    return p, q, w


def _sl_valid(sys, path):
    if path.mode != "symmetric":
        raise UsageError("transformed potential needs a symmetric-mode path")
    valid = path.invertible.copy()
    ex = sys.exceptional()
    for i in range(len(path)):
        if float(path.x[i]) in ex:
            valid[i] = False
    return valid


def transformed_sl_potential(sys, path: DarbouxPath) -> SLPotential:
    """``q + 2w(X11 - X22) + 2p(w X12)^2 - (p w)' X12`` at invertible nodes."""
    p, q, w = _sl_parts(sys)
    valid = _sl_valid(sys, path)
    out = np.full(len(path), np.nan, dtype=np.complex128)
    for i in np.flatnonzero(valid):
        x = float(path.x[i])
        X = path.X[i]
        pv, wv = p(x), w(x)
        dpw = p.derivative(x) * wv + pv * w.derivative(x)
        out[i] = (q(x) + 2 * wv * (X[0, 0] - X[1, 1]) + 2 * pv * (wv * X[0, 1]) ** 2
                  - dpw * X[0, 1])
    return SLPotential(path.x.copy(), out, valid)


def sl_potential_chain_form(sys, path: DarbouxPath) -> SLPotential:
    """Same potential via the unsimplified form with a finite-difference ``X12'``.

    ``q + w(X11 - X22) + p(w X12)^2 - (p w)' X12 - p w X12'``
    """
    p, q, w = _sl_parts(sys)
    valid = _sl_valid(sys, path)
    dX12, ok = _ode.fd_first(path.X[:, 0, 1], path.x, valid)
    valid = valid & ok
    out = np.full(len(path), np.nan, dtype=np.complex128)
    for i in np.flatnonzero(valid):
        x = float(path.x[i])
        X = path.X[i]
        pv, wv = p(x), w(x)
        dpw = p.derivative(x) * wv + pv * w.derivative(x)
        out[i] = (q(x) + wv * (X[0, 0] - X[1, 1]) + pv * (wv * X[0, 1]) ** 2
                  - dpw * X[0, 1] - pv * wv * dX12[i])
    return SLPotential(path.x.copy(), out, valid)


def x12_derivative_identity(sys, path: DarbouxPath):
    """Return ``(fd, formula, mask)`` for ``X12' = (X22 - X11)/p - w X12^2``."""
    p, _, w = _sl_parts(sys)
    valid = _sl_valid(sys, path)
    fd, ok = _ode.fd_first(path.X[:, 0, 1], path.x, valid)
    mask = valid & ok
    formula = np.full(len(path), np.nan, dtype=np.complex128)
    for i in np.flatnonzero(mask):
        x = float(path.x[i])
        X = path.X[i]
        formula[i] = (X[1, 1] - X[0, 0]) / p(x) - w(x) * X[0, 1] ** 2
    fd = np.where(mask, fd, np.nan)
    return fd, formula, mask


# ---------------------------------------------------------------------------
# gauge normalization
# ---------------------------------------------------------------------------

@dataclass
class GaugeNormalization:
    x: np.ndarray
    w_hat: np.ndarray        # (N, m, m)
    H1_hat: np.ndarray
    H0_hat: np.ndarray
    symplectic_residual: np.ndarray
    J: np.ndarray

    def F(self, i: int, lam: complex) -> np.ndarray:
        return self.J @ (lam * self.H1_hat[i] + self.H0_hat[i])

    def v(self, path: DarbouxPath, i: int, lam: complex) -> np.ndarray:
        """``v(x, lam) = w_hat(x) w_A(x, lam)``."""
        return self.w_hat[i] @ darboux_matrix(path.node(i), lam)


def gauge_normalize(path: DarbouxPath, sys: Optional[HamiltonianSystem] = None,
                    tol: float = 1e-8) -> GaugeNormalization:
    """Integrate ``w_hat' = -w_hat J Z`` with ``w_hat(0) = I`` alongside ``Pi, S``.

    ``Z = Pi* S^{-1} Pi J H1 + H1 J* Pi* S^{-1} Pi`` is recomputed at every RK4
    stage, so ``S`` must stay invertible along the grid.
    """
    sys = path.system if sys is None else sys
    if not isinstance(sys, HamiltonianSystem):
        raise UsageError("gauge normalization needs a Hamiltonian system")
    if path.mode != "symmetric":
        raise UsageError("gauge normalization needs a symmetric-mode path")
    if not sys.j_invertible:
        raise UsageError("gauge normalization needs an invertible J")
    t, J = path.triple, sys.J
    base = _symmetric_rhs(t, sys)
    H1c = _Cache(sys.H1)

    def rhs(x, y, side):
        Pi, S, W = y
        dPi, dS = base(x, (Pi, S), side)
        H1 = H1c(x, side)
        P = adjoint(Pi) @ np.linalg.solve(S, Pi)
        Z = P @ J @ H1 + H1 @ adjoint(J) @ P
        return dPi, dS, -W @ J @ Z

    m = t.m
    states = _ode.integrate_from_origin(rhs, (t.Pi1_0, t.S0, np.eye(m)), path.x)
    W = np.array([s[2] for s in states])
    Jinv = np.linalg.inv(J)
    Jsinv = np.linalg.inv(adjoint(J))
    N = len(path)
    H1h = np.full((N, m, m), np.nan, dtype=np.complex128)
    H0h = np.full((N, m, m), np.nan, dtype=np.complex128)
    res = np.empty(N)
    ex = sys.exceptional()
    for i in range(N):
        w = W[i]
        res[i] = norm(w @ J @ adjoint(w) - J) / (1.0 + norm(J))
        x = float(path.x[i])
        if x in ex:
            continue
        H1h[i] = Jinv @ w @ J @ sys.H1(x) @ adjoint(J) @ adjoint(w) @ Jsinv
        H0h[i] = Jinv @ w @ J @ sys.H0(x) @ adjoint(J) @ adjoint(w) @ Jsinv
    if np.max(res) > tol:
        i = int(np.argmax(res))
        raise InvariantViolationError(
            f"w_hat J w_hat* deviates from J by {res[i]:.3g} at x={path.x[i]}")
    return GaugeNormalization(path.x.copy(), W, H1h, H0h, res, J)
