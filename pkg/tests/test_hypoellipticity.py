import numpy as np
import pytest

from hypoctrl.analysis import (
    connexity_lags,
    h1_rank_check,
    verify_lag_finite_difference,
)
from hypoctrl.exceptions import ConnexityError, DimensionError
from hypoctrl.models import BENCHMARKS, ModelSpec, Parameter, ParameterLayout, get_model
from hypoctrl.simulation import simulate


def make_disconnected_model() -> ModelSpec:
    """Smooth coordinate 1 only feeds itself: no path from the noise."""

    def drift(z, t, theta):
        return np.array([-z[0] + z[2], -z[1], -z[2]])

    def pseudo_A(z, t, theta):
        return np.array([[-1.0, 0.0, 1.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]])

    return ModelSpec(
        name="disconnected",
        d_V=2,
        d_U=1,
        drift=drift,
        pseudo_A=pseudo_A,
        pseudo_r=lambda t, theta: np.zeros(3),
        diffusion_B=lambda z, t, sigma: np.array([[sigma["s"]]]),
        obs_matrix=np.array([[1.0, 0.0, 0.0]]),
        param_layout=ParameterLayout((Parameter("s", "diffusion", positive=True),)),
    )


def test_cyclic_lags(cyclic, cyclic_truth):
    report = connexity_lags(cyclic, cyclic_truth)
    assert report.m_l == (2, 1)
    assert report.m_B == 2
    assert report.connected
    assert set(report.edges) == {(1, 0), (2, 1)}


def test_fhn_lags(fhn, fhn_truth):
    report = connexity_lags(fhn, fhn_truth)
    assert report.m_l == (1,)
    assert report.m_B == 1


def test_synaptic_lags(synaptic):
    psi = synaptic.params(tau_E=0.5, tau_I=1.0, g_I=9.4, sigma_E=0.1, sigma_I=0.1)
    report = connexity_lags(synaptic, psi)
    assert report.m_l == (1,)
    assert report.m_B == 1


@pytest.mark.parametrize("model_id", ["cyclic", "fhn", "synaptic"])
def test_lags_do_not_depend_on_parameter_values(model_id):
    model = get_model(model_id)
    truth = BENCHMARKS[model_id].truth
    reference = connexity_lags(model, model.params(**truth))
    rng = np.random.default_rng(17)
    for _ in range(10):
        drawn = {name: value * rng.uniform(0.2, 5.0) for name, value in truth.items()}
        report = connexity_lags(model, model.params(**drawn))
        assert report.m_l == reference.m_l
        assert report.m_B == reference.m_B
        assert set(report.edges) == set(reference.edges)


def test_elliptic_model_has_zero_lag(ou):
    psi = ou.params(a=1.0, b=0.5, s1=0.3, s2=0.4)
    report = connexity_lags(ou, psi)
    assert report.m_l == ()
    assert report.m_B == 0
    assert report.connected


def test_disconnected_coordinate_is_reported():
    model = make_disconnected_model()
    psi = model.params(s=1.0)
    with pytest.raises(ConnexityError) as info:
        connexity_lags(model, psi)
    assert info.value.unreachable == [1]

    report = connexity_lags(model, psi, strict=False)
    assert report.m_l == (1, None)
    assert not report.connected
    assert report.to_dict()["connected"] is False


def test_probe_states_validation(cyclic, cyclic_truth):
    with pytest.raises(DimensionError):
        connexity_lags(cyclic, cyclic_truth, probe_states=np.empty((0, 3)))
    with pytest.raises(DimensionError):
        connexity_lags(cyclic, cyclic_truth, probe_states=[np.zeros(2)])


def test_explicit_probe_states(cyclic, cyclic_truth):
    report = connexity_lags(cyclic, cyclic_truth, probe_states=[np.array([0.5, -1.0, 2.0])])
    assert report.m_B == 2


@pytest.mark.parametrize("watched, expected", [(0, 3), (1, 2), (2, 0)])
def test_cyclic_finite_difference_lags(cyclic, cyclic_truth, watched, expected):
    lag = verify_lag_finite_difference(
        cyclic, cyclic_truth, np.array([0.3, -0.2, 0.1]), 0.01, j=0, l=watched
    )
    assert lag == expected


def test_finite_difference_lag_matches_connexity(fhn, fhn_truth):
    report = connexity_lags(fhn, fhn_truth)
    lag = verify_lag_finite_difference(fhn, fhn_truth, np.array([0.5, 0.2]), 0.01, j=0, l=0)
    assert lag == report.m_l[0] + 1


@pytest.mark.parametrize("j", [0, 1])
def test_synaptic_finite_difference_lags(synaptic, j):
    psi = synaptic.params(tau_E=0.5, tau_I=1.0, g_I=9.4, sigma_E=0.1, sigma_I=0.1)
    report = connexity_lags(synaptic, psi)
    z0 = np.array([-60.0, 10.0, 5.0])
    assert verify_lag_finite_difference(synaptic, psi, z0, 0.01, j=j, l=0) == report.m_l[0] + 1
    assert verify_lag_finite_difference(synaptic, psi, z0, 0.01, j=j, l=1 + j) == 0
    # the two conductances do not feed each other
    assert verify_lag_finite_difference(synaptic, psi, z0, 0.01, j=j, l=2 - j) is None


def test_finite_difference_lag_unreachable():
    model = make_disconnected_model()
    psi = model.params(s=1.0)
    assert verify_lag_finite_difference(model, psi, np.ones(3), 0.01, j=0, l=1) is None


def test_finite_difference_argument_checks(cyclic, cyclic_truth):
    with pytest.raises(ValueError):
        verify_lag_finite_difference(cyclic, cyclic_truth, np.zeros(3), 0.0, j=0, l=0)
    with pytest.raises(ValueError):
        verify_lag_finite_difference(cyclic, cyclic_truth, np.zeros(3), 0.01, j=1, l=0)


def test_h1_fhn_is_nonzero(fhn, fhn_truth):
    trajectory = simulate(fhn, fhn_truth, np.zeros(2), T=1.0, n=100, seed=0)
    smallest = h1_rank_check(fhn, fhn_truth, trajectory, m_B=1)
    # C (I + delta A) Gamma = -delta sigma / epsilon
    assert smallest == pytest.approx(0.01 * 0.3 / 0.1, rel=1e-9)


def test_h1_cyclic_scales_like_delta_squared(cyclic, cyclic_truth):
    trajectory = simulate(cyclic, cyclic_truth, np.zeros(3), T=1.0, n=100, seed=0)
    smallest = h1_rank_check(cyclic, cyclic_truth, trajectory, m_B=2)
    assert smallest == pytest.approx(0.01**2 * 0.15, rel=1e-9)


def test_h1_fails_without_noise(cyclic):
    psi = cyclic.param_layout.make({"nu": 0.2, "c": 0.0}, allow_boundary=True)
    trajectory = simulate(cyclic, psi, np.array([1.0, 0.0, 0.0]), T=1.0, n=50, seed=0)
    assert h1_rank_check(cyclic, psi, trajectory, m_B=2) == 0.0


def test_h1_trajectory_too_short(cyclic, cyclic_truth):
    trajectory = simulate(cyclic, cyclic_truth, np.zeros(3), T=1.0, n=1, seed=0)
    with pytest.raises(DimensionError):
        h1_rank_check(cyclic, cyclic_truth, trajectory, m_B=2)
