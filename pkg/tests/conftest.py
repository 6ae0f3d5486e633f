import numpy as np
import pytest

from hypoctrl.models import ModelSpec, Parameter, ParameterLayout, get_model


def make_ou_model() -> ModelSpec:
    """Two-dimensional fully observed Ornstein-Uhlenbeck process (elliptic, d_V = 0)."""

    def drift(z, t, theta):
        return -theta["a"] * np.asarray(z) + theta["b"]

    def pseudo_A(z, t, theta):
        return -theta["a"] * np.eye(2)

    def pseudo_r(t, theta):
        return np.full(2, theta["b"])

    def diffusion_B(z, t, sigma):
        return np.diag([sigma["s1"], sigma["s2"]])

    return ModelSpec(
        name="ou",
        d_V=0,
        d_U=2,
        drift=drift,
        pseudo_A=pseudo_A,
        pseudo_r=pseudo_r,
        diffusion_B=diffusion_B,
        obs_matrix=np.eye(2),
        param_layout=ParameterLayout(
            (
                Parameter("a", "drift", positive=True),
                Parameter("b", "drift"),
                Parameter("s1", "diffusion", positive=True),
                Parameter("s2", "diffusion", positive=True),
            )
        ),
    )


@pytest.fixture
def cyclic():
    return get_model("cyclic")


@pytest.fixture
def fhn():
    return get_model("fhn")


@pytest.fixture
def synaptic():
    return get_model("synaptic")


@pytest.fixture
def ou():
    return make_ou_model()


@pytest.fixture
def cyclic_truth(cyclic):
    return cyclic.params(nu=0.2, c=0.15)


@pytest.fixture
def fhn_truth(fhn):
    return fhn.params(epsilon=0.1, gamma=1.5, beta=0.8, sigma=0.3)
