"""Coefficient fields and the four system dialects.

A system is ``y'(x) = F(x, lam) y(x)`` on an interval containing 0.  Four
dialects are supported:

* ``General``         F = -(lam Q1 + Q0)
* ``Hamiltonian``     F = J (lam H1 + H0),  J* = -J,  H1, H0 Hermitian
* ``ShinZettl``       F = [[r1, 1/p], [q - lam w, r2]]
* ``SturmLiouville``  -(p u')' + q u = lam w u, i.e. ShinZettl with r1 = r2 = 0

Scalar coefficients come from a closed catalog (constant, sign, cubic
polynomial, exponential, trigonometric, piecewise constant, reciprocal) so a
system serializes to JSON exactly.  Every field can be evaluated as a
one-sided limit with ``side=+1`` / ``side=-1``; this is how propagation
starts at a jump located at x = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DialectError, DimensionError, EvaluationError, UsageError
from .matcore import J_STANDARD, adjoint, as_matrix, is_hermitian, norm

__all__ = [
    "ScalarField", "Constant", "Sign", "Polynomial", "Exponential", "Trig",
    "PiecewiseConstant", "Reciprocal", "MatrixField",
    "SystemCoefficients", "GeneralSystem", "HamiltonianSystem", "ShinZettlSystem",
    "SturmLiouvilleSystem", "eval_F", "shin_zettl_to_hamiltonian",
    "sturm_liouville_to_first_order", "to_general", "hamiltonian_form",
    "field_from_dict", "matrix_field_from_dict", "system_from_dict",
]

_SAMPLE_TOL = 1e-12


def _cplx(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1] if len(v) > 1 else 0.0)
    return complex(v)


def _cjson(z: complex):
    z = complex(z)
    return [z.real, z.imag]


# ---------------------------------------------------------------------------
# scalar fields
# ---------------------------------------------------------------------------

class ScalarField:
    """A complex-valued function of x from the closed catalog."""

    kind = ""

    def __call__(self, x: float, side: int = 0) -> complex:
        x = float(x)
        if side == 0 and self.is_exceptional(x):
            raise EvaluationError(x, self.kind)
        return self._value(x, side)

    def derivative(self, x: float, side: int = 0) -> complex:
        x = float(x)
        if side == 0 and self.is_exceptional(x):
            raise EvaluationError(x, self.kind)
        return self._deriv(x, side)

    def exceptional(self) -> tuple:
        return ()

    def is_exceptional(self, x: float) -> bool:
        return any(x == e for e in self.exceptional())

    def is_real(self) -> bool:
        return False

    def to_dict(self) -> dict:
        raise NotImplementedError

    def _value(self, x, side):
        raise NotImplementedError

    def _deriv(self, x, side):
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(ScalarField):
    value: complex = 0.0
    kind = "constant"

    def _value(self, x, side):
        return complex(self.value)

    def _deriv(self, x, side):
        return 0j

    def is_real(self):
        return complex(self.value).imag == 0.0

    def to_dict(self):
        return {"kind": self.kind, "value": _cjson(self.value)}


@dataclass(frozen=True)
class Sign(ScalarField):
    """``scale * sign(x)``; never evaluated at 0 except as a one-sided limit."""

    scale: complex = 1.0
    kind = "sign"

    def exceptional(self):
        return (0.0,)

    def _value(self, x, side):
        s = np.sign(x) if x != 0.0 else float(side)
        return complex(self.scale) * s

    def _deriv(self, x, side):
        return 0j

    def is_real(self):
        return complex(self.scale).imag == 0.0

    def to_dict(self):
        return {"kind": self.kind, "scale": _cjson(self.scale)}


@dataclass(frozen=True)
class Polynomial(ScalarField):
    """``c0 + c1 x + c2 x^2 + c3 x^3`` (lowest degree first)."""

    coeffs: tuple = (0.0,)
    kind = "poly"

    def __post_init__(self):
        if not 1 <= len(self.coeffs) <= 4:
            raise DimensionError("polynomial fields have degree at most 3")
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))

    def _value(self, x, side):
        return complex(np.polynomial.polynomial.polyval(x, self.coeffs))

    def _deriv(self, x, side):
        d = np.polynomial.polynomial.polyder(self.coeffs)
        return complex(np.polynomial.polynomial.polyval(x, d))

    def is_real(self):
        return all(c.imag == 0.0 for c in self.coeffs)

    def to_dict(self):
        return {"kind": self.kind, "coeffs": [_cjson(c) for c in self.coeffs]}


@dataclass(frozen=True)
class Exponential(ScalarField):
    """``a * exp(b x)``."""

    a: complex = 1.0
    b: complex = 0.0
    kind = "exp"

    def _value(self, x, side):
        return complex(self.a) * np.exp(complex(self.b) * x)

    def _deriv(self, x, side):
        return complex(self.a) * complex(self.b) * np.exp(complex(self.b) * x)

    def is_real(self):
        return complex(self.a).imag == 0.0 and complex(self.b).imag == 0.0

    def to_dict(self):
        return {"kind": self.kind, "a": _cjson(self.a), "b": _cjson(self.b)}


@dataclass(frozen=True)
class Trig(ScalarField):
    """``a cos(b x) + c sin(b x)``."""

    a: complex = 1.0
    b: complex = 1.0
    c: complex = 0.0
    kind = "trig"

    def _value(self, x, side):
        bx = complex(self.b) * x
        return complex(self.a) * np.cos(bx) + complex(self.c) * np.sin(bx)

    def _deriv(self, x, side):
        b = complex(self.b)
        return b * (complex(self.c) * np.cos(b * x) - complex(self.a) * np.sin(b * x))

    def is_real(self):
        return all(complex(v).imag == 0.0 for v in (self.a, self.b, self.c))

    def to_dict(self):
        return {"kind": self.kind, "a": _cjson(self.a), "b": _cjson(self.b),
                "c": _cjson(self.c)}


@dataclass(frozen=True)
class PiecewiseConstant(ScalarField):
    """``values[k]`` on ``(breaks[k-1], breaks[k])``; ``len(values) == len(breaks) + 1``."""

    breaks: tuple = ()
    values: tuple = (0.0,)
    kind = "piecewise"

    def __post_init__(self):
        br = tuple(float(b) for b in self.breaks)
        if list(br) != sorted(set(br)):
            raise DimensionError("breakpoints must be strictly increasing")
        if len(self.values) != len(br) + 1:
            raise DimensionError("piecewise field needs len(breaks) + 1 values")
        object.__setattr__(self, "breaks", br)
        object.__setattr__(self, "values", tuple(complex(v) for v in self.values))

    def exceptional(self):
        return self.breaks

    def _value(self, x, side):
        idx = int(np.searchsorted(self.breaks, x, side="right" if side >= 0 else "left"))
        return self.values[idx]

    def _deriv(self, x, side):
        return 0j

    def is_real(self):
        return all(v.imag == 0.0 for v in self.values)

    def to_dict(self):
        return {"kind": self.kind, "breaks": list(self.breaks),
                "values": [_cjson(v) for v in self.values]}


@dataclass(frozen=True)
class Reciprocal(ScalarField):
    """``1 / inner(x)``; produced by dialect conversions (p <-> 1/p)."""

    inner: ScalarField = field(default_factory=lambda: Constant(1.0))
    kind = "reciprocal"

    def exceptional(self):
        return self.inner.exceptional()

    def _value(self, x, side):
        v = self.inner._value(x, side)
        if v == 0:
            raise EvaluationError(x, "reciprocal")
        return 1.0 / v

    def _deriv(self, x, side):
        v = self.inner._value(x, side)
        return -self.inner._deriv(x, side) / v**2

    def is_real(self):
        return self.inner.is_real()

    def to_dict(self):
        return {"kind": self.kind, "inner": self.inner.to_dict()}


def reciprocal(f: ScalarField) -> ScalarField:
    if isinstance(f, Reciprocal):
        return f.inner
    if isinstance(f, Constant):
        return Constant(1.0 / complex(f.value))
    return Reciprocal(f)


def field_from_dict(d) -> ScalarField:
    if isinstance(d, (int, float, complex, list)):
        return Constant(_cplx(d))
    kind = d.get("kind")
    if kind == "constant":
        return Constant(_cplx(d.get("value", 0.0)))
    if kind == "sign":
        return Sign(_cplx(d.get("scale", 1.0)))
    if kind == "poly":
        return Polynomial(tuple(_cplx(c) for c in d["coeffs"]))
    if kind == "exp":
        return Exponential(_cplx(d.get("a", 1.0)), _cplx(d.get("b", 0.0)))
    if kind == "trig":
        return Trig(_cplx(d.get("a", 1.0)), _cplx(d.get("b", 1.0)), _cplx(d.get("c", 0.0)))
    if kind == "piecewise":
        return PiecewiseConstant(tuple(d["breaks"]), tuple(_cplx(v) for v in d["values"]))
    if kind == "reciprocal":
        return Reciprocal(field_from_dict(d["inner"]))
    raise UsageError(f"unknown coefficient kind {kind!r}")


def _zero_in_interval(f: ScalarField, interval) -> bool:
    lo, hi = interval
    if isinstance(f, Constant):
        return f.value == 0
    if isinstance(f, Polynomial):
        c = np.trim_zeros(np.array(f.coeffs), "b")
        if c.size == 0:
            return True
        roots = np.polynomial.polynomial.polyroots(c) if c.size > 1 else []
        return any(abs(r.imag) < 1e-12 and lo <= r.real <= hi for r in roots)
    xs = np.linspace(lo, hi, 2001)
    vals = [f(x, side=1 if x < hi else -1) for x in xs]
    return min(abs(v) for v in vals) < 1e-12


# ---------------------------------------------------------------------------
# matrix fields
# ---------------------------------------------------------------------------

class MatrixField:
    """``M(x) = sum_k f_k(x) C_k`` with scalar catalog fields ``f_k``."""

    def __init__(self, terms: Sequence, size: int | None = None):
        self.terms = []
        for f, c in terms:
            c = as_matrix(c)
            if c.shape[0] != c.shape[1]:
                raise DimensionError("matrix field terms must be square")
            self.terms.append((f, c))
        if size is None:
            if not self.terms:
                raise DimensionError("empty matrix field needs an explicit size")
            size = self.terms[0][1].shape[0]
        for _, c in self.terms:
            if c.shape[0] != size:
                raise DimensionError("matrix field terms have inconsistent sizes")
        self.size = size

    @classmethod
    def constant(cls, m) -> "MatrixField":
        m = as_matrix(m)
        return cls([(Constant(1.0), m)], size=m.shape[0])

    @classmethod
    def zeros(cls, size: int) -> "MatrixField":
        return cls([], size=size)

    def __call__(self, x: float, side: int = 0) -> np.ndarray:
        out = np.zeros((self.size, self.size), dtype=np.complex128)
        for f, c in self.terms:
            out += f(x, side) * c
        return out

    def derivative(self, x: float, side: int = 0) -> np.ndarray:
        out = np.zeros((self.size, self.size), dtype=np.complex128)
        for f, c in self.terms:
            out += f.derivative(x, side) * c
        return out

    def exceptional(self) -> tuple:
        return tuple(sorted({e for f, _ in self.terms for e in f.exceptional()}))

    def premultiplied(self, left: np.ndarray) -> "MatrixField":
        return MatrixField([(f, left @ c) for f, c in self.terms], size=self.size)

    def to_dict(self) -> dict:
        return {"size": self.size,
                "terms": [{"field": f.to_dict(), "matrix": _mjson(c)} for f, c in self.terms]}


def _mjson(m) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(d) -> np.ndarray:
    if isinstance(d, dict):
        re = np.array(d["re"], dtype=float)
        im = np.array(d.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise DimensionError("re and im parts have different shapes")
        return as_matrix(re + 1j * im)
    return as_matrix(d)


def matrix_field_from_dict(d) -> MatrixField:
    if "terms" not in d:
        return MatrixField.constant(matrix_from_json(d))
    terms = [(field_from_dict(t["field"]), matrix_from_json(t["matrix"])) for t in d["terms"]]
    return MatrixField(terms, size=d.get("size"))


def _unit(m, i, j) -> np.ndarray:
    e = np.zeros((m, m), dtype=np.complex128)
    e[i, j] = 1.0
    return e


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------

class SystemCoefficients:
    """Common interface: Q1, Q0 of the general form and F(x, lam)."""

    dialect = ""
    m = 0

    def __init__(self, interval=(-1.0, 1.0)):
        lo, hi = (float(v) for v in interval)
        if not lo <= 0.0 <= hi or lo == hi:
            raise UsageError(f"interval {interval} must contain 0 and be nondegenerate")
        self.interval = (lo, hi)

    def Q1(self, x, side=0) -> np.ndarray:
        raise NotImplementedError

    def Q0(self, x, side=0) -> np.ndarray:
        raise NotImplementedError

    def F(self, x, lam, side=0) -> np.ndarray:
        return -(lam * self.Q1(x, side) + self.Q0(x, side))

    def exceptional(self) -> tuple:
        return ()

    def check_point(self, x):
        lo, hi = self.interval
        if not lo - 1e-12 <= x <= hi + 1e-12:
            raise EvaluationError(x, "system (outside interval)")

    def sample_points(self, count=33) -> np.ndarray:
        return np.linspace(*self.interval, count)

    def to_dict(self) -> dict:
        raise NotImplementedError


class GeneralSystem(SystemCoefficients):
    dialect = "General"

    def __init__(self, Q1: MatrixField, Q0: MatrixField, interval=(-1.0, 1.0)):
        super().__init__(interval)
        if Q1.size != Q0.size:
            raise DimensionError("Q1 and Q0 sizes differ")
        self.q1_field, self.q0_field = Q1, Q0
        self.m = Q1.size

    def Q1(self, x, side=0):
        return self.q1_field(x, side)

    def Q0(self, x, side=0):
        return self.q0_field(x, side)

    def exceptional(self):
        return tuple(sorted(set(self.q1_field.exceptional()) | set(self.q0_field.exceptional())))

    def to_dict(self):
        return {"dialect": self.dialect, "interval": list(self.interval),
                "Q1": self.q1_field.to_dict(), "Q0": self.q0_field.to_dict()}


class HamiltonianSystem(SystemCoefficients):
    dialect = "Hamiltonian"

    def __init__(self, J, H1: MatrixField, H0: MatrixField, interval=(-1.0, 1.0)):
        super().__init__(interval)
        J = as_matrix(J)
        m = J.shape[0]
        if J.shape != (m, m) or H1.size != m or H0.size != m:
            raise DimensionError("J, H1, H0 must all be m x m")
        if not np.array_equal(adjoint(J), -J):
            raise DialectError("J must satisfy J* = -J exactly")
        self.J = J
        self.h1_field, self.h0_field = H1, H0
        self.m = m
        for x in self.sample_points():
            for side in (-1, 1):
                if not (is_hermitian(H1(x, side), _SAMPLE_TOL)
                        and is_hermitian(H0(x, side), _SAMPLE_TOL)):
                    raise DialectError(f"H1 and H0 must be Hermitian (fails at x={x})")

    def H1(self, x, side=0):
        return self.h1_field(x, side)

    def H0(self, x, side=0):
        return self.h0_field(x, side)

    def Q1(self, x, side=0):
        return -self.J @ self.H1(x, side)

    def Q0(self, x, side=0):
        return -self.J @ self.H0(x, side)

    def F(self, x, lam, side=0):
        return self.J @ (lam * self.H1(x, side) + self.H0(x, side))

    def exceptional(self):
        return tuple(sorted(set(self.h1_field.exceptional()) | set(self.h0_field.exceptional())))

    @cached_property
    def h1_nonneg(self) -> bool:
        """H1(x) >= 0 at every sample point (both one-sided limits)."""
        for x in self.sample_points():
            for side in (-1, 1):
                h = self.H1(x, side)
                if np.linalg.eigvalsh(0.5 * (h + adjoint(h)))[0] < -_SAMPLE_TOL * (1 + norm(h)):
                    return False
        return True

    @cached_property
    def j_invertible(self) -> bool:
        return np.linalg.matrix_rank(self.J) == self.m

    def to_dict(self):
        return {"dialect": self.dialect, "interval": list(self.interval),
                "J": _mjson(self.J), "H1": self.h1_field.to_dict(), "H0": self.h0_field.to_dict()}


class ShinZettlSystem(SystemCoefficients):
    dialect = "ShinZettl"
    m = 2

    def __init__(self, r1: ScalarField, r2: ScalarField, p_inv: ScalarField, q: ScalarField,
                 omega: ScalarField, interval=(-1.0, 1.0)):
        super().__init__(interval)
        self.r1, self.r2, self.p_inv, self.q, self.omega = r1, r2, p_inv, q, omega

    @property
    def fields(self) -> dict:
        return {"r1": self.r1, "r2": self.r2, "p_inv": self.p_inv, "q": self.q,
                "omega": self.omega}

    def Q1(self, x, side=0):
        return np.array([[0, 0], [self.omega(x, side), 0]], dtype=np.complex128)

    def Q0(self, x, side=0):
        return -np.array([[self.r1(x, side), self.p_inv(x, side)],
                          [self.q(x, side), self.r2(x, side)]], dtype=np.complex128)

    def F(self, x, lam, side=0):
        return np.array([[self.r1(x, side), self.p_inv(x, side)],
                         [self.q(x, side) - lam * self.omega(x, side), self.r2(x, side)]],
                        dtype=np.complex128)

    def exceptional(self):
        return tuple(sorted({e for f in self.fields.values() for e in f.exceptional()}))

    def p(self) -> ScalarField:
        return reciprocal(self.p_inv)

    def _samples(self, f):
        return np.array([f(x, s) for x in self.sample_points() for s in (-1, 1)])

    @cached_property
    def lagrange_symmetric(self) -> bool:
        """w, p, q real and r1 = -conj(r2) at every sample point."""
        for name in ("omega", "p_inv", "q"):
            v = self._samples(self.fields[name])
            if np.any(np.abs(v.imag) > _SAMPLE_TOL * (1 + np.abs(v))):
                return False
        d = self._samples(self.r1) + np.conj(self._samples(self.r2))
        return bool(np.all(np.abs(d) <= _SAMPLE_TOL))

    @cached_property
    def lagrange_j_symmetric(self) -> bool:
        d = self._samples(self.r1) + self._samples(self.r2)
        return bool(np.all(np.abs(d) <= _SAMPLE_TOL))

    @cached_property
    def r_vanishes(self) -> bool:
        return bool(np.all(np.abs(self._samples(self.r1)) <= _SAMPLE_TOL)
                    and np.all(np.abs(self._samples(self.r2)) <= _SAMPLE_TOL))

    def to_dict(self):
        d = {"dialect": self.dialect, "interval": list(self.interval)}
        d.update({k: f.to_dict() for k, f in self.fields.items()})
        return d


class SturmLiouvilleSystem(SystemCoefficients):
    """``-(p u')' + q u = lam w u``; first-order form has y = (u, p u')."""

    dialect = "SturmLiouville"
    m = 2

    def __init__(self, p: ScalarField, q: ScalarField, omega: ScalarField,
                 interval=(-1.0, 1.0)):
        super().__init__(interval)
        self.p, self.q, self.omega = p, q, omega
        self._first = None

    @property
    def first_order(self) -> ShinZettlSystem:
        if self._first is None:
            self._first = sturm_liouville_to_first_order(self)
        return self._first

    def Q1(self, x, side=0):
        return self.first_order.Q1(x, side)

    def Q0(self, x, side=0):
        return self.first_order.Q0(x, side)

    def F(self, x, lam, side=0):
        return self.first_order.F(x, lam, side)

    def exceptional(self):
        return tuple(sorted({e for f in (self.p, self.q, self.omega) for e in f.exceptional()}))

    @property
    def lagrange_symmetric(self) -> bool:
        return self.first_order.lagrange_symmetric

    lagrange_j_symmetric = True

    def to_dict(self):
        return {"dialect": self.dialect, "interval": list(self.interval),
                "p": self.p.to_dict(), "q": self.q.to_dict(), "omega": self.omega.to_dict()}


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def eval_F(sys: SystemCoefficients, x: float, lam: complex, side: int = 0) -> np.ndarray:
    sys.check_point(x)
    return sys.F(x, lam, side)


def shin_zettl_to_hamiltonian(sys) -> HamiltonianSystem:
    """Lagrange-symmetric Shin-Zettl system as ``J (lam H1 + H0)`` with ``J = i sigma_2``.

    H1 = diag(w, 0), H0 = [[-q, conj r], [r, 1/p]] where r = r1 = -conj(r2).
    """
    if isinstance(sys, SturmLiouvilleSystem):
        sys = sys.first_order
    if not isinstance(sys, ShinZettlSystem):
        raise DialectError("expected a Shin-Zettl system")
    if not sys.lagrange_symmetric:
        raise DialectError("Shin-Zettl system is not Lagrange-symmetric")
    H1 = MatrixField([(sys.omega, _unit(2, 0, 0))], size=2)
    # conj(r1) == -r2 under Lagrange symmetry
    H0 = MatrixField([(sys.q, -_unit(2, 0, 0)), (sys.r2, -_unit(2, 0, 1)),
                      (sys.r1, _unit(2, 1, 0)), (sys.p_inv, _unit(2, 1, 1))], size=2)
    return HamiltonianSystem(J_STANDARD.copy(), H1, H0, interval=sys.interval)


def sturm_liouville_to_first_order(sys: SturmLiouvilleSystem) -> ShinZettlSystem:
    if _zero_in_interval(sys.p, sys.interval):
        raise DialectError("p vanishes in the interval; no first-order form")
    zero = Constant(0.0)
    return ShinZettlSystem(zero, zero, reciprocal(sys.p), sys.q, sys.omega,
                           interval=sys.interval)


def to_general(sys: SystemCoefficients) -> GeneralSystem:
    if isinstance(sys, GeneralSystem):
        return sys
    if isinstance(sys, HamiltonianSystem):
        return GeneralSystem(sys.h1_field.premultiplied(-sys.J),
                             sys.h0_field.premultiplied(-sys.J), sys.interval)
    if isinstance(sys, SturmLiouvilleSystem):
        sys = sys.first_order
    if isinstance(sys, ShinZettlSystem):
        Q1 = MatrixField([(sys.omega, _unit(2, 1, 0))], size=2)
        Q0 = MatrixField([(sys.r1, -_unit(2, 0, 0)), (sys.p_inv, -_unit(2, 0, 1)),
                          (sys.q, -_unit(2, 1, 0)), (sys.r2, -_unit(2, 1, 1))], size=2)
        return GeneralSystem(Q1, Q0, sys.interval)
    raise DialectError(f"unknown dialect {type(sys).__name__}")


def hamiltonian_form(sys: SystemCoefficients) -> HamiltonianSystem:
    """The Hamiltonian representation needed by symmetric-mode GBDT."""
    if isinstance(sys, HamiltonianSystem):
        return sys
    if isinstance(sys, (ShinZettlSystem, SturmLiouvilleSystem)):
        return shin_zettl_to_hamiltonian(sys)
    raise DialectError(f"{sys.dialect} system has no Hamiltonian form")


def system_from_dict(d: dict) -> SystemCoefficients:
    dialect = d["dialect"]
    interval = tuple(d.get("interval", (-1.0, 1.0)))
    f = lambda key, default=0.0: field_from_dict(d.get(key, default))
    if dialect == "General":
        return GeneralSystem(matrix_field_from_dict(d["Q1"]), matrix_field_from_dict(d["Q0"]),
                             interval)
    if dialect == "Hamiltonian":
        return HamiltonianSystem(matrix_from_json(d["J"]), matrix_field_from_dict(d["H1"]),
                                 matrix_field_from_dict(d["H0"]), interval)
    if dialect == "ShinZettl":
        if "p_inv" not in d and "p" in d:
            p_inv = reciprocal(f("p"))
        else:
            p_inv = f("p_inv", 1.0)
        return ShinZettlSystem(f("r1"), f("r2"), p_inv, f("q"), f("omega", 1.0), interval)
    if dialect == "SturmLiouville":
        return SturmLiouvilleSystem(f("p", 1.0), f("q"), f("omega", 1.0), interval)
    raise UsageError(f"unknown dialect {dialect!r}")
