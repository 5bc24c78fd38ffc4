import numpy as np
import pytest

from darboux import dynamics as dyn
from darboux.errors import InvariantViolationError, SingularMatrixError
from darboux.gbdt import GBDTTriple, propagate
from darboux.matcore import J_STANDARD, expm, min_eig, norm
from darboux.model_indef import IndefModelParams, model_system
from darboux.systems import HamiltonianSystem, MatrixField
from helpers import canonical_system, random_hamiltonian, random_symmetric_triple, sample_sl

J = J_STANDARD


@pytest.fixture(scope="module")
def small():
    """n = 1, 2x2 Hamiltonian scenario with S0 = 1 on [0, 1], h = 1e-3."""
    sys = HamiltonianSystem(J, MatrixField.constant(np.diag([1.0, 0.0])),
                            MatrixField.constant(np.diag([0.0, 1.0])))
    t = GBDTTriple.symmetric_from_S0([[1]], [[1, 0.5j]], J, [[0.3]])
    return sys, propagate(t, sys, (0.0, 1.0, 1000))


@pytest.fixture(scope="module")
def rich():
    rng = np.random.default_rng(12)
    sys = random_hamiltonian(rng, m=2, interval=(-1, 1), varying=True)
    t = random_symmetric_triple(rng, 2, J)
    return sys, propagate(t, sys, (0.0, 1.0, 2000))


def test_zero_h(small):  # [TRIVIAL]
    _, path = small
    sol = dyn.dynamical_solution(path, [0.0], [0.0, 1.0])
    assert np.all(sol.z == 0)


def test_zero_A_is_time_independent():  # [TRIVIAL]
    # A = 0 needs Pi0 J Pi0* = 0: take Pi0 real
    t = GBDTTriple.symmetric([[0]], [[1]], [[1, 0.5]], J)
    path = propagate(t, canonical_system(), (0.0, 1.0, 100))
    sol = dyn.dynamical_solution(path, [1.0], [0.0, 0.5, 1.0])
    dz = dyn._dzdt(sol, 1e-3)
    assert np.max(np.abs(dz)) <= 1e-10


def test_solution_formula(small):  # [TRIVIAL] pointwise definition
    _, path = small
    h = np.array([1.0 + 0.5j])
    sol = dyn.dynamical_solution(path, h, [0.7])
    i = 400
    Pi, S = path.Pi[i], path.S[i]
    z = J @ Pi.conj().T @ np.linalg.solve(S, expm(-0.7 * path.triple.A) @ h)
    assert norm(sol.z[i, 0] - z) <= 1e-13


def test_pde_residual(small):  # [DERIVED] finite-difference oracle
    _, path = small
    sol = dyn.dynamical_solution(path, [1.0], [0.0, 0.5, 1.0])
    res, mask = dyn.dynamical_residual(sol, dt=1e-3)
    assert mask.sum() > 0 and np.max(res[mask]) <= 1e-4


def test_pde_residual_on_time_grid(rich):
    _, path = rich
    t = np.linspace(0.49, 0.51, 21)  # dt = 1e-3
    sol = dyn.dynamical_solution(path, [1.0, 1j], t)
    res, mask = dyn.dynamical_residual(sol)
    assert np.max(res[mask]) <= 1e-4


def test_derivative_law_second_order(rich):
    sys, _ = rich
    t = random_symmetric_triple(np.random.default_rng(12), 2, J)
    worst = []
    for steps in (250, 500, 1000):
        res, ok = dyn.derivative_law_residual(propagate(t, sys, (0.0, 1.0, steps)))
        interior = ok.copy()
        interior[[0, -1]] = False  # one-sided stencils are less accurate
        worst.append(np.max(res[interior]))
    orders = np.log2(np.array(worst[:-1]) / np.array(worst[1:]))
    assert np.all(orders > 1.7)


def test_require_all_raises():
    t = GBDTTriple.symmetric([[0]], [[1]], [[1, 0]], J)  # S = 1 + x
    path = propagate(t, canonical_system(), (-1, 1, 10))
    with pytest.raises(SingularMatrixError):
        dyn.dynamical_solution(path, [1.0], [0.0], require_all=True)
    sol = dyn.dynamical_solution(path, [1.0], [0.0])
    assert not sol.valid[0] and np.all(np.isnan(sol.z[0]))


# energy --------------------------------------------------------------------------

def test_energy_zero_h(small):  # [TRIVIAL]
    _, path = small
    assert dyn.energy_formula(path, [0.0], 0.5, 1.0) == 0


def test_energy_zero_H1():  # [TRIVIAL] S' = 0
    sys = HamiltonianSystem(J, MatrixField.zeros(2), MatrixField.constant(np.eye(2)))
    t = GBDTTriple.symmetric_from_S0([[1]], [[1, 0.5j]], J)
    path = propagate(t, sys, (0.0, 1.0, 50))
    assert dyn.energy_formula(path, [1.0], 0.3, 1.0) == 0


@pytest.mark.parametrize("t", [0.0, 0.5, 1.0])
def test_energy_matches_quadrature(rich, t):  # [DERIVED] quadrature oracle
    _, path = rich
    h = [1.0, 0.5j]
    e, q = dyn.energy_formula(path, h, t, 1.0), dyn.energy_quadrature(path, h, t, 1.0)
    assert abs(e - q) <= 1e-5 * q


def test_energy_radicand_nonneg_everywhere(rich):
    sys, path = rich
    S0inv = np.linalg.inv(path.S[0])
    for i in range(1, len(path), 97):
        D = S0inv - np.linalg.inv(path.S[i])
        assert min_eig(0.5 * (D + D.conj().T)) >= -1e-10


def test_energy_negative_radicand_detected():
    sys = HamiltonianSystem(J, MatrixField.constant(-np.eye(2)), MatrixField.zeros(2))
    t = GBDTTriple.symmetric_from_S0([[1]], [[1, 0.5j]], J)
    path = propagate(t, sys, (0.0, 0.5, 50))
    with pytest.raises(InvariantViolationError):
        dyn.energy_formula(path, [1.0], 0.0, 0.5)


# two-way diffusion ------------------------------------------------------------------

def test_two_way_zero_h():  # [TRIVIAL]
    sys = sample_sl((0.0, 1.0))
    t = GBDTTriple.symmetric_from_S0([[1]], [[1, 0.3]], J, [[0.2]])
    path = propagate(t, sys, (0.0, 1.0, 100))
    tw = dyn.two_way_solution(path, [0.0], [0.0, 0.5], dt=1e-3)
    assert np.all(tw.z1 == 0) and np.nanmax(tw.residual) == 0


def test_two_way_zero_generator_keeps_q():  # [TRIVIAL]
    sys = sample_sl((0.0, 1.0))
    path = propagate(GBDTTriple.symmetric([[0]], [[1]], [[0, 0]], J), sys, (0.0, 1.0, 100))
    tw = dyn.two_way_solution(path, [1.0], [0.0], dt=1e-3)
    xs = path.x[1:]
    assert np.allclose(tw.q_breve[1:], [sys.q(x) for x in xs], atol=0)


def test_two_way_model():  # [DERIVED] finite-difference oracle on [0.1, 1]
    params = IndefModelParams([[1.0]], 0.5j, [1.0])
    path = propagate(params.triple(), model_system(), (-1.0, 1.0, 2000))
    tw = dyn.two_way_solution(path, [1.0], [0.0, 0.5], dt=1e-3)
    sel = tw.mask & (path.x >= 0.1)
    assert sel.sum() > 800
    assert np.max(tw.residual[sel]) <= 1e-3
