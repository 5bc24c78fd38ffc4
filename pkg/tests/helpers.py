"""Shared builders and independent oracles for the test suite."""
import numpy as np

from darboux.gbdt import GBDTTriple
from darboux.matcore import J_STANDARD
from darboux.systems import (Constant, HamiltonianSystem, MatrixField, Polynomial,
                             ShinZettlSystem, Sign, SturmLiouvilleSystem, Trig)


def taylor_expm(m, terms=30):
    """Truncated power series; accurate for small norms."""
    m = np.asarray(m, dtype=complex)
    out = np.eye(m.shape[0], dtype=complex)
    term = out.copy()
    for k in range(1, terms):
        term = term @ m / k
        out = out + term
    return out


def kalman_rank(A, b):
    n = A.shape[0]
    cols = [b]
    for _ in range(n - 1):
        cols.append(A @ cols[-1])
    return np.linalg.matrix_rank(np.column_stack(cols))


def s1_model_exact():
    """S(1) = int_0^1 (cos t + 2 sin t)^2 dt in closed form."""
    return 1 + 1.5 * (1 - np.sin(1) * np.cos(1)) + (1 - np.cos(2))


def rand_complex(rng, *shape, scale=1.0):
    return scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape))


def rand_hermitian(rng, n, scale=1.0):
    a = rand_complex(rng, n, n, scale=scale)
    return 0.5 * (a + a.conj().T)


def canonical_system(interval=(-1.0, 1.0)):
    return HamiltonianSystem(J_STANDARD, MatrixField.constant(np.eye(2)),
                             MatrixField.constant(np.zeros((2, 2))), interval)


def random_hamiltonian(rng, m=2, interval=(-1.0, 1.0), varying=False):
    """Constant or catalog-expression Hamiltonian system with H1 >= 0."""
    from darboux.matcore import symplectic_J
    J = symplectic_J(m // 2)
    B = rand_complex(rng, m, m, scale=0.5)
    H1 = B @ B.conj().T + 0.2 * np.eye(m)
    H0 = rand_hermitian(rng, m, scale=0.5)
    if varying:
        H0b = rand_hermitian(rng, m, scale=0.3)
        h1 = MatrixField([(Constant(1.0), H1), (Polynomial((0.0, 0.0, 1.0)), 0.1 * np.eye(m))])
        h0 = MatrixField([(Constant(1.0), H0), (Trig(1.0, 2.0, 0.5), H0b)])
    else:
        h1, h0 = MatrixField.constant(H1), MatrixField.constant(H0)
    return HamiltonianSystem(J, h1, h0, interval)


def random_symmetric_triple(rng, n, J, K_scale=1.0):
    m = J.shape[0]
    Pi0 = rand_complex(rng, n, m, scale=0.5)
    K = rand_hermitian(rng, n, scale=K_scale)
    return GBDTTriple.symmetric_from_S0(np.eye(n), Pi0, J, K)


def random_general_triple(rng, n, m):
    A1 = np.diag(rng.uniform(1.0, 2.0, n)) + rand_complex(rng, n, n, scale=0.1)
    A2 = -np.diag(rng.uniform(1.0, 2.0, n)) + rand_complex(rng, n, n, scale=0.1)
    return GBDTTriple.general_from_sylvester(A1, A2, rand_complex(rng, n, m, scale=0.3),
                                             rand_complex(rng, n, m, scale=0.3))


def free_shin_zettl(omega=1.0, interval=(-1.0, 1.0)):
    z = Constant(0.0)
    w = Sign() if omega == "sign" else Constant(omega)
    return ShinZettlSystem(z, z, Constant(1.0), z, w, interval)


def sample_sl(interval=(-1.0, 1.0)):
    return SturmLiouvilleSystem(Polynomial((2.0, 0.5)), Trig(0.5, 2.0, 0.0), Sign(), interval)
