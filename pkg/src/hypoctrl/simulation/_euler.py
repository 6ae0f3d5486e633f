"""Euler-Maruyama Simulation Module.

Generates trajectories of the discretized SDE

    Z_{i+1} = Z_i + delta f_theta(Z_i, t_i) + sqrt(delta) Gamma_sigma(Z_i, t_i) u_i,

with u_i i.i.d. standard normal d_U-vectors, on the uniform grid
t_i = i T / n, i = 0..n, and extracts the partial observations Y_i = C Z_i.

Noise is drawn from ``numpy.random.default_rng(seed)`` (PCG64 seeded through
SeedSequence), so trajectories are bitwise reproducible and independent seeds
can be simulated concurrently.
"""

from dataclasses import dataclass

import numpy as np

from hypoctrl._config import EXPLOSION_BOUND
from hypoctrl.exceptions import DimensionError, SimulationError
from hypoctrl.models import ModelSpec, ParameterVector


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Simulated path on a uniform grid.

    Attributes:
        times: (n+1,) increasing time points with constant step.
        states: (n+1, d) simulated states.
        observations: (n+1, d_o) rows C @ states[i].
        obs_matrix: Observation matrix C used to build ``observations``.
        seed: Seed of the noise generator (None for noiseless constructions).
    """

    times: np.ndarray
    states: np.ndarray
    observations: np.ndarray
    obs_matrix: np.ndarray
    seed: int | None = None

    @property
    def n(self) -> int:
        return self.states.shape[0] - 1

    @property
    def delta(self) -> float:
        return float(self.times[1] - self.times[0])


def simulate(
    model: ModelSpec,
    psi: ParameterVector,
    z0,
    T: float,
    n: int,
    seed: int,
) -> Trajectory:
    """Simulate the Euler-Maruyama scheme of ``model`` at ``psi``.

    Args:
        model: Model to simulate.
        psi: Parameter vector.
        z0: Initial state (d-vector).
        T: Time horizon, T > 0.
        n: Number of Euler steps, n >= 1; the step is delta = T / n.
        seed: Seed of the standard normal generator.

    Returns:
        Trajectory: Grid, states and observations.

    Raises:
        ValueError: If T <= 0 or n < 1
        DimensionError: If z0 does not have d entries
        SimulationError: If a state leaves [-1e8, 1e8] or becomes non-finite
    """
    if T <= 0:
        raise ValueError(f"T must be > 0, got {T}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (model.d,):
        raise DimensionError(f"z0 has shape {z0.shape}, expected ({model.d},)")

    delta = T / n
    sqrt_delta = np.sqrt(delta)
    times = np.linspace(0.0, T, n + 1)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((n, model.d_U))

    states = np.empty((n + 1, model.d))
    states[0] = z0
    for i in range(n):
        z, t = states[i], times[i]
        z_next = (
            z
            + delta * model.f(z, t, psi)
            + sqrt_delta * (model.gamma(z, t, psi) @ noise[i])
        )
        if not np.all(np.isfinite(z_next)) or np.max(np.abs(z_next)) > EXPLOSION_BOUND:
            raise SimulationError(
                f"Trajectory of model {model.name} exploded at step {i + 1} "
                f"(psi: {psi}, seed: {seed})",
                step=i + 1,
            )
        states[i + 1] = z_next

    observations = states @ model.obs_matrix.T
    return Trajectory(times, states, observations, model.obs_matrix.copy(), seed)


def observe(traj: Trajectory) -> np.ndarray:
    """Partial observations C Z_i of a trajectory, one row per grid point."""
    return traj.states @ traj.obs_matrix.T
