"""Built-in Benchmark Models Module.

The three partially observed hypoelliptic systems of the simulation study,
a registry to look models up by identifier, and the experimental design
(true parameters, initial conditions, weight grids, (T, n) settings) used to
reproduce the estimation tables.

Functions:
    make_cyclic_feedback: Linear monotone cyclic feedback system (3 populations).
    make_fhn: Hypoelliptic FitzHugh-Nagumo neuron.
    make_synaptic_conductance: Conductance-based neuron with diffusive synaptic input.
    get_model: Build a registered model by identifier.
    register_model: Register a user model after checking its pseudo-linear form.
    available_models: Sorted registered identifiers.

Constants:
    SYNAPTIC_FIXED_DEFAULTS: Known physical constants of the synaptic model.
    BENCHMARKS: Simulation-study presets per built-in model.

Example:
    >>> model = get_model("fhn")
    >>> model.f(np.zeros(2), 0.0, model.params(epsilon=0.1, gamma=1.5, beta=0.8, sigma=0.3))
    array([0. , 0.8])
"""

import inspect
from collections.abc import Callable, Mapping
from dataclasses import dataclass

import numpy as np

from hypoctrl.exceptions import ModelError

from ._model_spec import ModelSpec, check_pseudo_linear
from ._parameters import Parameter, ParameterLayout

#: Capacitance, leak/reversal potentials, injected current and mean excitatory
#: conductance, all assumed known when estimating the synaptic model.
SYNAPTIC_FIXED_DEFAULTS = {
    "C_c": 1.0,
    "G_L": 50.0,
    "V_L": -70.0,
    "V_E": 0.0,
    "V_I": -80.0,
    "I_inj": -60.0,
    "g_E": 17.8,
}

PSEUDO_LINEAR_TOL = 1e-10


def make_cyclic_feedback() -> ModelSpec:
    """Monotone cyclic feedback system observed through its first population.

    dX1 = (-nu X1 + X2) dt, dX2 = (-nu X2 + X3) dt, dX3 = -nu X3 dt + c dW.
    """

    def drift(z, t, theta):
        nu = theta["nu"]
        return np.array([-nu * z[0] + z[1], -nu * z[1] + z[2], -nu * z[2]])

    def pseudo_A(z, t, theta):
        nu = theta["nu"]
        return np.array([[-nu, 1.0, 0.0], [0.0, -nu, 1.0], [0.0, 0.0, -nu]])

    def pseudo_r(t, theta):
        return np.zeros(3)

    def diffusion_B(z, t, sigma):
        return np.array([[sigma["c"]]])

    return ModelSpec(
        name="cyclic",
        d_V=2,
        d_U=1,
        drift=drift,
        pseudo_A=pseudo_A,
        pseudo_r=pseudo_r,
        diffusion_B=diffusion_B,
        obs_matrix=np.array([[1.0, 0.0, 0.0]]),
        param_layout=ParameterLayout(
            (
                Parameter("nu", "drift"),
                Parameter("c", "diffusion", positive=True),
            )
        ),
        probe_box=(-3.0 * np.ones(3), 3.0 * np.ones(3)),
    )


def make_fhn() -> ModelSpec:
    """Hypoelliptic FitzHugh-Nagumo model observed through the membrane potential V.

    dV = (V - V^3 - U + s) / epsilon dt, dU = (gamma V - U + beta) dt + sigma dW,
    with the input current s known and fixed to 0.
    """

    def drift(z, t, theta):
        v, u = z
        eps = theta["epsilon"]
        return np.array(
            [(v - v**3 - u + theta["s"]) / eps, theta["gamma"] * v - u + theta["beta"]]
        )

    def pseudo_A(z, t, theta):
        v = z[0]
        eps = theta["epsilon"]
        return np.array([[(1.0 - v**2) / eps, -1.0 / eps], [theta["gamma"], -1.0]])

    def pseudo_r(t, theta):
        return np.array([theta["s"] / theta["epsilon"], theta["beta"]])

    def diffusion_B(z, t, sigma):
        return np.array([[sigma["sigma"]]])

    return ModelSpec(
        name="fhn",
        d_V=1,
        d_U=1,
        drift=drift,
        pseudo_A=pseudo_A,
        pseudo_r=pseudo_r,
        diffusion_B=diffusion_B,
        obs_matrix=np.array([[1.0, 0.0]]),
        param_layout=ParameterLayout(
            (
                Parameter("epsilon", "drift", positive=True),
                Parameter("gamma", "drift"),
                Parameter("beta", "drift"),
                Parameter("s", "drift", fixed=0.0),
                Parameter("sigma", "diffusion", positive=True),
            )
        ),
        probe_box=(-3.0 * np.ones(2), 3.0 * np.ones(2)),
    )


def make_synaptic_conductance(fixed: Mapping[str, float] | None = None) -> ModelSpec:
    """Conductance-based neuron with diffusive excitatory/inhibitory synaptic input.

    State (V, G_E, G_I); only V is observed. The conductances follow
    square-root diffusions whose argument is clamped at 0 so that Euler steps
    crossing zero stay defined.

    Args:
        fixed: Overrides of :data:`SYNAPTIC_FIXED_DEFAULTS` (C_c, G_L, V_L, V_E,
            V_I, I_inj, g_E).

    Raises:
        ModelError: On unknown constants or a non-positive capacitance C_c
    """
    constants = dict(SYNAPTIC_FIXED_DEFAULTS)
    if fixed:
        unknown = set(fixed) - set(constants)
        if unknown:
            raise ModelError(
                f"Unknown synaptic constants {sorted(unknown)}; "
                f"expected {sorted(constants)}"
            )
        constants.update({k: float(v) for k, v in fixed.items()})
    if constants["C_c"] <= 0:
        raise ModelError(f"Capacitance C_c must be > 0, got {constants['C_c']}")

    C_c, G_L, V_L = constants["C_c"], constants["G_L"], constants["V_L"]
    V_E, V_I = constants["V_E"], constants["V_I"]
    I_inj, g_E = constants["I_inj"], constants["g_E"]

    def drift(z, t, theta):
        v, ge, gi = z
        return np.array(
            [
                (-G_L * (v - V_L) - ge * (v - V_E) - gi * (v - V_I) + I_inj) / C_c,
                -(ge - g_E) / theta["tau_E"],
                -(gi - theta["g_I"]) / theta["tau_I"],
            ]
        )

    def pseudo_A(z, t, theta):
        v = z[0]
        return np.array(
            [
                [-G_L / C_c, -(v - V_E) / C_c, -(v - V_I) / C_c],
                [0.0, -1.0 / theta["tau_E"], 0.0],
                [0.0, 0.0, -1.0 / theta["tau_I"]],
            ]
        )

    def pseudo_r(t, theta):
        return np.array(
            [
                (G_L * V_L + I_inj) / C_c,
                g_E / theta["tau_E"],
                theta["g_I"] / theta["tau_I"],
            ]
        )

    def diffusion_B(z, t, sigma):
        return np.diag(
            [
                sigma["sigma_E"] * np.sqrt(max(z[1], 0.0)),
                sigma["sigma_I"] * np.sqrt(max(z[2], 0.0)),
            ]
        )

    return ModelSpec(
        name="synaptic",
        d_V=1,
        d_U=2,
        drift=drift,
        pseudo_A=pseudo_A,
        pseudo_r=pseudo_r,
        diffusion_B=diffusion_B,
        obs_matrix=np.array([[1.0, 0.0, 0.0]]),
        param_layout=ParameterLayout(
            (
                Parameter("tau_E", "drift", positive=True),
                Parameter("tau_I", "drift", positive=True),
                Parameter("g_I", "drift", positive=True),
                Parameter("sigma_E", "diffusion", positive=True),
                Parameter("sigma_I", "diffusion", positive=True),
            )
        ),
        probe_box=(np.array([-80.0, 1.0, 1.0]), np.array([-40.0, 30.0, 20.0])),
    )


_REGISTRY: dict[str, Callable[..., ModelSpec]] = {
    "cyclic": make_cyclic_feedback,
    "fhn": make_fhn,
    "synaptic": make_synaptic_conductance,
}


def available_models() -> list[str]:
    return sorted(_REGISTRY)


def get_model(model_id: str, constants: Mapping[str, float] | None = None) -> ModelSpec:
    """Build a registered model.

    Args:
        model_id: Registered identifier ("cyclic", "fhn", "synaptic", ...).
        constants: Known model constants forwarded to factories accepting them.

    Raises:
        ModelError: If the identifier is unknown or the model takes no constants
    """
    try:
        factory = _REGISTRY[model_id]
    except KeyError:
        raise ModelError(
            f"Unknown model {model_id!r}. Available models: {', '.join(available_models())}"
        )
    if constants:
        if not inspect.signature(factory).parameters:
            raise ModelError(f"Model {model_id!r} takes no constants, got {sorted(constants)}")
        return factory(constants)
    return factory()


def register_model(
    model_id: str,
    factory: Callable[..., ModelSpec],
    check_values: Mapping[str, float],
    n_samples: int = 100,
    seed: int = 0,
) -> ModelSpec:
    """Register a user model after verifying its pseudo-linear decomposition.

    The factory is called once; A z + r is compared with the drift at
    ``n_samples`` states drawn in the model probe box.

    Args:
        model_id: Identifier under which the model becomes available.
        factory: Callable returning the ModelSpec.
        check_values: Parameter values used for the self-check.
        n_samples: Number of random (z, t) samples.
        seed: Seed of the sample generator.

    Returns:
        ModelSpec: The checked model instance.

    Raises:
        ModelError: If the identifier exists or the decomposition is inconsistent
    """
    if model_id in _REGISTRY:
        raise ModelError(f"Model {model_id!r} is already registered")
    model = factory()
    psi = model.param_layout.make(check_values)
    rng = np.random.default_rng(seed)
    states = model.sample_states(n_samples, rng)
    times = rng.uniform(0.0, 1.0, size=n_samples)
    samples = list(zip(states, times))
    scale = max(1.0, max(float(np.max(np.abs(model.f(z, t, psi)))) for z, t in samples))
    residual = check_pseudo_linear(model, psi, samples)
    if residual > PSEUDO_LINEAR_TOL * scale:
        raise ModelError(
            f"Model {model_id!r}: pseudo-linear residual {residual:.3e} exceeds "
            f"{PSEUDO_LINEAR_TOL:.0e} relative tolerance"
        )
    _REGISTRY[model_id] = factory
    return model


@dataclass(frozen=True)
class BenchmarkPreset:
    """Simulation-study design of one built-in model."""

    model_id: str
    truth: Mapping[str, float]
    z0: tuple[float, ...]
    profile_z0: bool
    w_grid: tuple[float, ...]
    settings: tuple[tuple[float, int], ...]


BENCHMARKS: dict[str, BenchmarkPreset] = {
    "cyclic": BenchmarkPreset(
        model_id="cyclic",
        truth={"nu": 0.2, "c": 0.15},
        z0=(0.0, 0.0, 0.0),
        profile_z0=False,
        w_grid=(1e15, 1e20, 1e25, 1e30),
        settings=((10.0, 1000), (100.0, 1000), (10.0, 10000)),
    ),
    "fhn": BenchmarkPreset(
        model_id="fhn",
        truth={"epsilon": 0.1, "gamma": 1.5, "beta": 0.8, "sigma": 0.3},
        z0=(0.0, 0.0),
        profile_z0=True,
        w_grid=(1e16, 1e18, 1e20, 1e25),
        settings=((1.0, 1000), (10.0, 1000), (1.0, 10000)),
    ),
    "synaptic": BenchmarkPreset(
        model_id="synaptic",
        truth={"tau_E": 0.5, "tau_I": 1.0, "g_I": 9.4, "sigma_E": 0.1, "sigma_I": 0.1},
        z0=(-60.0, 10.0, 1.0),
        profile_z0=False,
        w_grid=(1e8, 5e8, 1e9, 5e9),
        settings=((20.0, 1000), (200.0, 1000), (20.0, 10000)),
    ),
}
