import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from darboux import model_indef as mi
from darboux.errors import DegenerateSpectralParameterError, SingularMatrixError, UsageError
from darboux.gbdt import propagate, transform_coefficients, transformed_sl_potential
from darboux.matcore import J_STANDARD, adjoint, is_hermitian, is_nonneg_definite, norm
from darboux.systems import SturmLiouvilleSystem, Constant, Sign
from helpers import kalman_rank, s1_model_exact

P = mi.IndefModelParams([[1.0]], 0.5j, [1.0])


@pytest.fixture(scope="module")
def grid_tr():
    h = 1e-2
    k = np.arange(1, 101)
    x = np.concatenate([-k[::-1] * h, k * h])
    return x, mi.transformed_indefinite(P, x)


# parameters -----------------------------------------------------------------------

def test_mu_must_be_imaginary():
    with pytest.raises(UsageError):
        mi.IndefModelParams([[1.0]], 0.5, [1.0])


def test_det_condition_enforced():
    with pytest.raises(UsageError):  # mu alpha = -1 makes mu alpha + I singular
        mi.IndefModelParams([[1j]], 1j, [1.0])


def test_pi0_and_triple():  # [PAPER] Pi(0) = [-2i alpha g, 2 mu alpha g]
    assert np.array_equal(P.Pi0, [[-2j, 1j]])
    t = P.triple()
    assert np.array_equal(t.A, [[1]]) and np.array_equal(t.S0, [[0]])


def test_pi0_identity_holds():
    rng = np.random.default_rng(0)
    for _ in range(5):
        a = rng.normal(size=(3, 3))
        p = mi.IndefModelParams(a, 0.37j, rng.normal(size=3) + 1j * rng.normal(size=3))
        assert norm(p.Pi0 @ J_STANDARD @ adjoint(p.Pi0)) <= 1e-12 * (1 + norm(p.Pi0) ** 2)


# Lambda columns ----------------------------------------------------------------------

def test_columns_at_origin():  # [PAPER] both branches reduce to Pi(0)
    L1, L2 = mi.lambda_columns(P, 0.0)
    assert L1[0] == -2j and L2[0] == 1j
    rng = np.random.default_rng(1)
    p = mi.IndefModelParams(rng.normal(size=(2, 2)), -0.8j, [1.0, 2.0])
    for x in (0.0, -0.0):
        L1, L2 = mi.lambda_columns(p, x)
        assert np.allclose(np.column_stack([L1, L2]), p.Pi0, atol=1e-14)


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0])
def test_positive_branch_scalar(x):  # [DERIVED] i(cos x + 2 sin x)
    _, L2 = mi.lambda_columns(P, x)
    assert abs(L2[0] - 1j * (np.cos(x) + 2 * np.sin(x))) <= 1e-14


@pytest.mark.parametrize("x", [-0.1, -0.5, -1.0])
def test_negative_branch_scalar(x):  # [DERIVED] 1.5i e^x - 0.5i e^-x
    _, L2 = mi.lambda_columns(P, x)
    assert abs(L2[0] - (1.5j * np.exp(x) - 0.5j * np.exp(-x))) <= 1e-14


def test_columns_solve_first_order_system():
    # Lambda1' = sign(x) alpha^2 Lambda2 and Lambda2' = -Lambda1 on each half-line
    rng = np.random.default_rng(2)
    p = mi.IndefModelParams(rng.normal(size=(2, 2)), 0.3j, [1.0, -1.0])
    a2 = p.alpha @ p.alpha
    d = 1e-5
    for x in (-0.7, -0.2, 0.3, 0.8):
        L1m, L2m = mi.lambda_columns(p, x - d)
        L1p, L2p = mi.lambda_columns(p, x + d)
        L1, L2 = mi.lambda_columns(p, x)
        assert norm((L1p - L1m) / (2 * d) - np.sign(x) * a2 @ L2) <= 1e-7 * (1 + norm(L2))
        assert norm((L2p - L2m) / (2 * d) + L1) <= 1e-7 * (1 + norm(L1))


# S quadrature ---------------------------------------------------------------------------

def test_S_at_origin():  # [TRIVIAL]
    assert np.all(mi.s_quadrature(P, 0.0) == 0)


def test_S1_analytic():  # [DERIVED] analytic antiderivative
    assert abs(mi.s_quadrature(P, 1.0)[0, 0] - s1_model_exact()) <= 1e-10


def test_S_negative_analytic():  # [DERIVED] int_{-1}^0 (1.5 e^t - 0.5 e^-t)^2 dt
    exact = 2.25 * (1 - np.exp(-2)) / 2 - 1.5 + 0.25 * (np.exp(2) - 1) / 2
    assert abs(mi.s_quadrature(P, -1.0)[0, 0] - exact) <= 1e-10


def test_S_vectorized_matches_scalar():
    xs = np.array([0.3, -0.2, 1.0, -1.0, 0.05])
    Sv = mi.s_quadrature(P, xs)
    for x, S in zip(xs, Sv):
        assert abs(S[0, 0] - mi.s_quadrature(P, x)[0, 0]) <= 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.floats(-1, 1, allow_nan=False))
def test_S_hermitian_nonneg(seed, x):
    rng = np.random.default_rng(seed)
    p = mi.IndefModelParams(rng.normal(size=(2, 2)), 1j * rng.uniform(0.1, 2),
                            rng.normal(size=2) + 1j * rng.normal(size=2))
    S = mi.s_quadrature(p, x)
    assert is_hermitian(S, 1e-10) and is_nonneg_definite(S, 1e-10)


# controllability -----------------------------------------------------------------------

def test_controllability_zero_g():  # [TRIVIAL]
    assert not mi.controllability_check(mi.IndefModelParams([[1.0]], 0.5j, [0.0]))


def test_controllability_scalar():  # [DERIVED] [[1, 1], [1, -1]] has rank 2
    assert mi.controllability_check(P)


def test_controllability_repeated():  # [DERIVED] Kalman-rank oracle
    assert not mi.controllability_check(mi.IndefModelParams(np.eye(2), 0.5j, [1.0, 0.0]))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_controllability_matches_rank_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    alpha = np.diag(rng.integers(-2, 3, n).astype(float)) if seed % 2 else rng.normal(size=(n, n))
    g = rng.normal(size=n) * (rng.uniform() > 0.2)
    try:
        p = mi.IndefModelParams(alpha, 0.5j, g)
    except UsageError:
        return
    a_hat = np.block([[alpha, np.zeros((n, n))], [np.zeros((n, n)), -alpha]])
    expected = kalman_rank(a_hat, np.concatenate([g, g])) == 2 * n
    assert mi.controllability_check(p) == expected


def test_controllable_means_positive_S(grid_tr):
    x, tr = grid_tr
    far = np.abs(x) >= 0.01
    assert mi.controllability_check(P) and np.all(tr.min_eig_S[far] > 0)


# initial solutions ---------------------------------------------------------------------

def test_initial_at_origin():  # [TRIVIAL]
    assert np.array_equal(mi.initial_solution(2 + 1j, 0.0, [1.0, 2.0]), [1.0, 2.0])


@pytest.mark.parametrize("x", [0.3, 0.9])
def test_initial_positive(x):  # [DERIVED] h1 cos x + h2 sin x
    y = mi.initial_solution(1.0, x, [0.7, -0.4])
    assert abs(y[0] - (0.7 * np.cos(x) - 0.4 * np.sin(x))) <= 1e-14


@pytest.mark.parametrize("x", [-0.3, -0.9])
def test_initial_negative(x):  # [DERIVED] h1 cosh x + h2 sinh x
    y = mi.initial_solution(1.0, x, [0.7, -0.4])
    assert abs(y[0] - (0.7 * np.cosh(x) - 0.4 * np.sinh(x))) <= 1e-14


def test_initial_zero_lambda():
    with pytest.raises(DegenerateSpectralParameterError):
        mi.initial_solution(0.0, 0.5, [1, 0])


@pytest.mark.parametrize("lam", [1j, -2 + 0.5j, 3.0])
def test_initial_solves_system(lam):
    sys = mi.model_system()
    d = 1e-5
    for x in (-0.6, 0.4):
        dy = (mi.initial_solution(lam, x + d, [1, 1j]) - mi.initial_solution(lam, x - d, [1, 1j]))
        resid = dy / (2 * d) - sys.F(x, lam) @ mi.initial_solution(lam, x, [1, 1j])
        assert norm(resid) <= 1e-7


# transformed model -----------------------------------------------------------------------

def test_grid_with_origin_refused():
    with pytest.raises(UsageError):
        mi.transformed_indefinite(P, [-0.1, 0.0, 0.1])


def test_strict_mode_singular():
    p = mi.IndefModelParams(np.eye(2), 0.5j, [1.0, 0.0])  # not controllable
    tr = mi.transformed_indefinite(p, [0.5])
    assert not tr.valid[0]
    with pytest.raises(SingularMatrixError):
        mi.transformed_indefinite(p, [0.5], strict=True)


def test_potential_real_and_x12_real(grid_tr):
    _, tr = grid_tr
    assert np.max(np.abs(tr.q_breve.imag)) <= 1e-9
    assert np.max(np.abs(tr.X[:, 0, 1].imag)) <= 1e-9


def test_closed_form_matches_propagation(grid_tr):
    x, tr = grid_tr
    path = propagate(P.triple(), mi.model_system(), (-1.0, 1.0, 2000))
    for i, xi in enumerate(x):
        j = path.index_of(xi, 1e-9)
        assert norm(path.Pi[j] - tr.Pi[i]) <= 1e-6
        assert norm(path.S[j] - tr.S[i]) <= 1e-6


def test_coefficients_match_general_transform(grid_tr):
    # r~, q~ and q_breve agree with the generic Shin-Zettl / Sturm-Liouville paths
    path = propagate(P.triple(), mi.model_system(), (-1.0, 1.0, 2000))
    gen = transform_coefficients(path.system, path)
    sl = SturmLiouvilleSystem(Constant(1.0), Constant(0.0), Sign())
    qb = transformed_sl_potential(sl, path)
    idx = [path.index_of(v, 1e-9) for v in (-0.8, -0.3, 0.2, 0.9)]
    tr = mi.transformed_indefinite(P, path.x[idx])
    for k, j in enumerate(idx):
        assert abs(tr.r_tilde[k] - gen.fields["r1"][j]) <= 1e-6
        assert abs(tr.q_tilde[k] - gen.fields["q"][j]) <= 1e-6
        assert abs(tr.q_breve[k] - qb.values[j]) <= 1e-6


def test_y_tilde_second_order():  # Eq. -y'' + q_breve y = lam sign(x) y
    lam = 1 + 1j
    res = []
    for d in (1e-2, 5e-3, 2.5e-3):
        x = np.array([0.5 - d, 0.5, 0.5 + d])
        tr = mi.transformed_indefinite(P, x)
        y = tr.y_tilde(lam, [1.0, 0.0])[:, 0]
        d2 = (y[2] - 2 * y[1] + y[0]) / d**2
        res.append(abs(-d2 + tr.q_breve[1] * y[1] - lam * y[1]))
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all((orders > 1.8) & (orders < 2.2))


def test_near_origin_report_shape():  # reported, not asserted
    rows = mi.near_origin_report(P)
    assert len(rows) == 8 and all(np.isfinite(v) for _, v in rows)


def test_darboux_matrix_needs_valid_node():
    p = mi.IndefModelParams(np.eye(2), 0.5j, [1.0, 0.0])
    tr = mi.transformed_indefinite(p, [0.5])
    with pytest.raises(SingularMatrixError):
        tr.darboux_matrix(0, 1j)
