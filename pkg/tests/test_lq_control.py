import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypoctrl.control import (
    Linearization,
    RiccatiSolution,
    control_forward,
    cost_eval,
    estimate_Z0,
    riccati_backward,
)
from hypoctrl.exceptions import DimensionError, NonIdentifiableError


def make_linearization(
    seed, n=6, d=2, d_U=1, d_o=1, delta=0.1, w=1.0, hypoelliptic=True, collinear=False
):
    rng = np.random.default_rng(seed)
    Abar = np.eye(d) + delta * rng.normal(size=(n, d, d))
    r = rng.normal(size=(n, d))
    Gamma = rng.normal(size=(n, d, d_U))
    if hypoelliptic:
        Gamma[:, : d - d_U] = 0.0
    if collinear:
        Gamma[:, :, 1:] = 2.0 * Gamma[:, :, :1]
    C = np.zeros((d_o, d))
    C[np.arange(d_o), np.arange(d_o)] = 1.0
    Y = rng.normal(size=(n + 1, d_o))
    return Linearization(Abar=Abar, r=r, Gamma=Gamma, delta=delta, C=C, Y=Y, w=w)


def dense_minimizer(lin, Z0):
    """Minimize the tracking cost as a stacked least-squares problem in u."""
    n, d_U = lin.n, lin.d_U

    def rollout(u):
        Z = [np.asarray(Z0, dtype=float)]
        for i in range(n):
            Z.append(
                lin.Abar[i] @ Z[-1] + lin.delta * lin.r[i] + np.sqrt(lin.delta) * lin.Gamma[i] @ u[i]
            )
        return np.array(Z)

    def residual(flat):
        Z = rollout(flat.reshape(n, d_U))
        return (Z[1:] @ lin.C.T - lin.Y[1:]).ravel()

    base = residual(np.zeros(n * d_U))
    columns = [residual(e) - base for e in np.eye(n * d_U)]
    M = np.column_stack(columns)
    design = np.vstack([M, np.eye(n * d_U) / np.sqrt(lin.w)])
    target = np.concatenate([-base, np.zeros(n * d_U)])
    u, *_ = np.linalg.lstsq(design, target, rcond=None)
    cost = float(np.sum((M @ u + base) ** 2) + np.sum(u**2) / lin.w)
    return u.reshape(n, d_U), cost


def scalar_linearization(w=1.0, n=2):
    ones = np.ones((n, 1, 1))
    return Linearization(
        Abar=ones.copy(),
        r=np.zeros((n, 1)),
        Gamma=ones.copy(),
        delta=1.0,
        C=np.ones((1, 1)),
        Y=np.zeros((n + 1, 1)),
        w=w,
    )


def test_terminal_conditions():
    lin = make_linearization(0)
    ricc = riccati_backward(lin)
    np.testing.assert_array_equal(ricc.E[-1], lin.C.T @ lin.C)
    np.testing.assert_array_equal(ricc.h[-1], -lin.C.T @ lin.Y[-1])


def test_scalar_recursion_by_hand():
    ricc = riccati_backward(scalar_linearization())
    assert ricc.E[2, 0, 0] == 1.0
    assert ricc.E[1, 0, 0] == pytest.approx(1.5)
    assert ricc.E[0, 0, 0] == pytest.approx(1.6)
    assert ricc.G[1, 0, 0] == pytest.approx(0.5)
    assert ricc.G[0, 0, 0] == pytest.approx(0.4)


def test_penalty_dominated_limit():
    ricc = riccati_backward(scalar_linearization(w=1e-16))
    assert ricc.E[0, 0, 0] == pytest.approx(3.0, abs=1e-10)

    lin = make_linearization(1, w=1e-16)
    Z0 = np.array([0.5, -0.3])
    solution = control_forward(lin, riccati_backward(lin), Z0)
    assert np.max(np.abs(solution.u_bar)) <= 1e-6
    free_flow = cost_eval(lin, np.zeros((lin.n, lin.d_U)), Z0)
    Z = [Z0]
    for i in range(lin.n):
        Z.append(lin.Abar[i] @ Z[-1] + lin.delta * lin.r[i])
    np.testing.assert_allclose(solution.Z_bar, np.array(Z), atol=1e-6)
    assert solution.cost == pytest.approx(free_flow, rel=1e-6)


def random_instance(seed):
    """Random small tracking problem: d in 2..4, d_U in 1..2, n <= 10.

    Every fifth instance has two collinear noise columns, so Gamma has rank
    below d_U as well as below d.
    """
    rng = np.random.default_rng(1000 + seed)
    collinear = seed % 5 == 0
    d = int(rng.integers(2, 5))
    d_U = 2 if collinear else int(rng.integers(1, 3))
    d_o = int(rng.integers(1, d + 1))
    n = int(rng.integers(2, 11))
    w = float(10.0 ** rng.uniform(-1.0, 1.0))
    lin = make_linearization(seed, n=n, d=d, d_U=d_U, d_o=d_o, w=w, collinear=collinear)
    return lin, rng.normal(size=d)


@pytest.mark.parametrize("seed", range(50))
def test_matches_dense_least_squares(seed):
    lin, Z0 = random_instance(seed)
    if seed % 5 == 0:
        assert np.linalg.matrix_rank(lin.Gamma[0]) < lin.d_U
    solution = control_forward(lin, riccati_backward(lin), Z0)
    u_dense, cost_dense = dense_minimizer(lin, Z0)
    np.testing.assert_allclose(solution.u_bar, u_dense, atol=1e-7)
    assert solution.cost == pytest.approx(cost_dense, rel=1e-8)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), log_w=st.floats(-2, 4))
def test_riccati_symmetric_and_psd(seed, log_w):
    lin = make_linearization(seed, n=20, d=3, d_U=1, w=10.0**log_w)
    ricc = riccati_backward(lin)
    for E in ricc.E:
        np.testing.assert_array_equal(E, E.T)
        scale = max(1.0, np.max(np.abs(E)))
        assert np.linalg.eigvalsh(E).min() >= -1e-8 * scale


@pytest.mark.parametrize("seed", range(10))
def test_optimal_control_beats_random_controls(seed):
    lin, Z0 = random_instance(seed)
    solution = control_forward(lin, riccati_backward(lin), Z0)
    best = cost_eval(lin, solution.u_bar, Z0)
    rng = np.random.default_rng(42 + seed)
    for _ in range(100):
        u = solution.u_bar + rng.normal(scale=0.5, size=solution.u_bar.shape)
        assert cost_eval(lin, u, Z0) >= best - 1e-9


def test_forward_pass_satisfies_dynamics_and_cost():
    lin = make_linearization(5, n=12, d=3, d_U=1)
    Z0 = np.array([0.2, 0.1, 0.0])
    solution = control_forward(lin, riccati_backward(lin), Z0)
    for i in range(lin.n):
        expected = (
            lin.Abar[i] @ solution.Z_bar[i]
            + lin.delta * lin.r[i]
            + np.sqrt(lin.delta) * lin.Gamma[i] @ solution.u_bar[i]
        )
        np.testing.assert_allclose(solution.Z_bar[i + 1], expected, rtol=1e-12, atol=1e-12)
    assert cost_eval(lin, solution.u_bar, Z0) == pytest.approx(solution.cost, rel=1e-10)
    np.testing.assert_array_equal(solution.Z0_used, Z0)


def _noiseless(seed, n=30, delta=0.1, offset=0.0):
    lin = make_linearization(seed, n=n, d=3, d_U=1, delta=delta)
    Z0 = np.array([1.0, -0.5, 0.25])
    Z = [Z0]
    for i in range(n):
        Z.append(lin.Abar[i] @ Z[-1] + delta * lin.r[i])
    Y = np.array(Z) @ lin.C.T + offset
    exact = Linearization(lin.Abar, lin.r, lin.Gamma, delta, lin.C, Y, lin.w)
    return exact, Z0


def test_exact_fit_has_zero_control():
    lin, Z0 = _noiseless(11)
    solution = control_forward(lin, riccati_backward(lin), Z0)
    np.testing.assert_allclose(solution.u_bar, 0.0, atol=1e-8)
    assert solution.cost == pytest.approx(0.0, abs=1e-12)
    assert cost_eval(lin, np.zeros((lin.n, 1)), Z0) == pytest.approx(0.0, abs=1e-20)


def test_cost_of_constant_offset():
    lin, Z0 = _noiseless(12, n=15, offset=0.3)
    assert cost_eval(lin, np.zeros((15, 1)), Z0) == pytest.approx(15 * 0.09)
    assert cost_eval(lin, np.zeros((15, 1)), Z0, include_initial=True) == pytest.approx(16 * 0.09)


def test_estimate_z0_recovers_noiseless_start():
    lin, Z0 = _noiseless(13)
    np.testing.assert_allclose(estimate_Z0(riccati_backward(lin)), Z0, atol=1e-6)


def test_estimate_z0_identity_algebra():
    ricc = RiccatiSolution(
        E=np.stack([np.eye(3), np.eye(3)]),
        h=np.array([[-1.0, -2.0, -3.0], [0.0, 0.0, 0.0]]),
        G=np.ones((1, 1, 1)),
    )
    np.testing.assert_allclose(estimate_Z0(ricc), [1.0, 2.0, 3.0])


def test_estimate_z0_singular():
    ricc = RiccatiSolution(
        E=np.stack([np.diag([1.0, 0.0]), np.eye(2)]),
        h=np.zeros((2, 2)),
        G=np.ones((1, 1, 1)),
    )
    with pytest.raises(NonIdentifiableError):
        estimate_Z0(ricc)


def test_profiled_start_is_optimal():
    lin = make_linearization(21, n=25, d=3, d_U=1, delta=0.1)
    ricc = riccati_backward(lin)
    z0_hat = estimate_Z0(ricc)

    def profiled(z0):
        solution = control_forward(lin, ricc, z0)
        return cost_eval(lin, solution.u_bar, z0, include_initial=True)

    best = profiled(z0_hat)
    rng = np.random.default_rng(8)
    for _ in range(100):
        assert profiled(z0_hat + rng.normal(scale=0.3, size=3)) >= best - 1e-10


def test_linearization_validation():
    lin = make_linearization(0)
    with pytest.raises(ValueError):
        Linearization(lin.Abar, lin.r, lin.Gamma, lin.delta, lin.C, lin.Y, 0.0)
    with pytest.raises(DimensionError):
        Linearization(lin.Abar, lin.r, lin.Gamma, lin.delta, lin.C, lin.Y[:-1], lin.w)
    with pytest.raises(DimensionError):
        control_forward(lin, riccati_backward(lin), np.zeros(3))
