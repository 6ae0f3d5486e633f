import numpy as np
import pytest

from hypoctrl.exceptions import DimensionError, SimulationError
from hypoctrl.models import ModelSpec, Parameter, ParameterLayout
from hypoctrl.simulation import observe, simulate


def test_grid_and_shapes(cyclic, cyclic_truth):
    trajectory = simulate(cyclic, cyclic_truth, np.zeros(3), T=10.0, n=1000, seed=1)
    assert trajectory.states.shape == (1001, 3)
    assert trajectory.observations.shape == (1001, 1)
    assert trajectory.n == 1000
    assert trajectory.delta == pytest.approx(0.01)
    assert trajectory.times[0] == 0.0
    assert trajectory.times[-1] == pytest.approx(10.0)
    np.testing.assert_array_equal(trajectory.states[0], np.zeros(3))


def test_observations_are_c_times_states(fhn, fhn_truth):
    trajectory = simulate(fhn, fhn_truth, np.zeros(2), T=1.0, n=100, seed=4)
    np.testing.assert_array_equal(trajectory.observations[:, 0], trajectory.states[:, 0])
    np.testing.assert_array_equal(observe(trajectory), trajectory.observations)


def test_same_seed_same_path(fhn, fhn_truth):
    a = simulate(fhn, fhn_truth, np.zeros(2), T=1.0, n=200, seed=11)
    b = simulate(fhn, fhn_truth, np.zeros(2), T=1.0, n=200, seed=11)
    c = simulate(fhn, fhn_truth, np.zeros(2), T=1.0, n=200, seed=12)
    np.testing.assert_array_equal(a.states, b.states)
    assert not np.array_equal(a.states, c.states)
    assert a.seed == 11


def test_noiseless_cyclic_decay(cyclic):
    psi = cyclic.param_layout.make({"nu": 0.2, "c": 0.0}, allow_boundary=True)
    T, n = 5.0, 500
    trajectory = simulate(cyclic, psi, np.array([1.0, 0.0, 0.0]), T=T, n=n, seed=0)
    assert trajectory.states[-1, 0] == pytest.approx((1 - 0.2 * T / n) ** n, rel=1e-12)
    np.testing.assert_array_equal(trajectory.states[:, 1:], 0.0)


def test_smooth_coordinates_receive_no_direct_noise(cyclic, cyclic_truth):
    # first step from 0: only the rough coordinate moves
    trajectory = simulate(cyclic, cyclic_truth, np.zeros(3), T=1.0, n=10, seed=5)
    np.testing.assert_array_equal(trajectory.states[1, :2], 0.0)
    assert trajectory.states[1, 2] != 0.0


def test_rough_increment_variance(cyclic, cyclic_truth):
    T, n = 20.0, 10_000
    trajectory = simulate(cyclic, cyclic_truth, np.zeros(3), T=T, n=n, seed=2)
    increments = np.diff(trajectory.states[:, 2])
    assert np.var(increments, ddof=1) == pytest.approx(0.15**2 * T / n, rel=0.15)


def test_argument_checks(cyclic, cyclic_truth):
    with pytest.raises(ValueError):
        simulate(cyclic, cyclic_truth, np.zeros(3), T=0.0, n=10, seed=0)
    with pytest.raises(ValueError):
        simulate(cyclic, cyclic_truth, np.zeros(3), T=1.0, n=0, seed=0)
    with pytest.raises(DimensionError):
        simulate(cyclic, cyclic_truth, np.zeros(2), T=1.0, n=10, seed=0)


def test_explosion_is_reported():
    model = ModelSpec(
        name="growth",
        d_V=0,
        d_U=1,
        drift=lambda z, t, theta: theta["a"] * np.asarray(z),
        pseudo_A=lambda z, t, theta: np.array([[theta["a"]]]),
        pseudo_r=lambda t, theta: np.zeros(1),
        diffusion_B=lambda z, t, sigma: np.array([[sigma["s"]]]),
        obs_matrix=np.eye(1),
        param_layout=ParameterLayout(
            (Parameter("a", "drift"), Parameter("s", "diffusion", positive=True))
        ),
    )
    psi = model.params(a=1000.0, s=0.1)
    with pytest.raises(SimulationError) as info:
        simulate(model, psi, np.ones(1), T=10.0, n=10, seed=0)
    assert 1 <= info.value.step <= 10
