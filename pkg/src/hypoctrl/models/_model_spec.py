"""SDE Model Definition Module.

This module defines the model abstraction used across hypoctrl: a stochastic
differential equation on a state Z = (V, U) with d_V smooth coordinates (no
direct noise) stacked over d_U rough coordinates,

    dZ_t = f_theta(Z_t, t) dt + Gamma_sigma(Z_t, t) dW_t,   Y_t = C Z_t,

where Gamma_sigma = [0; B_sigma] and the drift is supplied together with a
pseudo-linear decomposition f_theta(z, t) = A_theta(z, t) z + r_theta(t).

Functions:
    check_pseudo_linear: Max residual of the pseudo-linear identity over samples.

Classes:
    ModelSpec: Dimensions, evaluators, observation matrix and parameter layout.
"""

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from hypoctrl.exceptions import DimensionError, ModelError

from ._parameters import ParameterLayout, ParameterVector

DriftFn = Callable[[np.ndarray, float, Mapping[str, float]], np.ndarray]
MatrixFn = Callable[[np.ndarray, float, Mapping[str, float]], np.ndarray]
AffineFn = Callable[[float, Mapping[str, float]], np.ndarray]


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Partially observed SDE with a pseudo-linear drift decomposition.

    Evaluators must be pure functions; a ModelSpec is shared read-only between
    concurrent estimation workers.

    Attributes:
        name: Model identifier used in logs and reports.
        d_V: Number of smooth coordinates.
        d_U: Number of rough coordinates.
        drift: (z, t, theta) -> d-vector, g_theta stacked over h_theta.
        pseudo_A: (z, t, theta) -> d x d matrix A_theta(z, t).
        pseudo_r: (t, theta) -> d-vector r_theta(t).
        diffusion_B: (z, t, sigma) -> d_U x d_U matrix B_sigma(z, t).
        obs_matrix: Constant d_o x d observation matrix C of full row rank.
        param_layout: Named parameter descriptors.
        probe_box: Lower and upper corners of the region where probe states
            for the lag analysis are drawn.
    """

    name: str
    d_V: int
    d_U: int
    drift: DriftFn
    pseudo_A: MatrixFn
    pseudo_r: AffineFn
    diffusion_B: MatrixFn
    obs_matrix: np.ndarray
    param_layout: ParameterLayout
    probe_box: tuple[np.ndarray, np.ndarray] | None = field(default=None)

    def __post_init__(self):
        if self.d_V < 0 or self.d_U < 1:
            raise ModelError(
                f"Model {self.name}: need d_V >= 0 and d_U >= 1, "
                f"got d_V={self.d_V}, d_U={self.d_U}"
            )
        C = np.atleast_2d(np.asarray(self.obs_matrix, dtype=float))
        object.__setattr__(self, "obs_matrix", C)
        if C.shape[1] != self.d:
            raise DimensionError(
                f"Model {self.name}: observation matrix has {C.shape[1]} columns, "
                f"state dimension is {self.d}"
            )
        if np.linalg.matrix_rank(C) != C.shape[0]:
            raise ModelError(f"Model {self.name}: observation matrix lacks full row rank")
        if self.probe_box is not None:
            lower, upper = (np.asarray(b, dtype=float) for b in self.probe_box)
            if lower.shape != (self.d,) or upper.shape != (self.d,):
                raise DimensionError(f"Model {self.name}: probe box must have d entries")
            object.__setattr__(self, "probe_box", (lower, upper))

    @property
    def d(self) -> int:
        return self.d_V + self.d_U

    @property
    def d_o(self) -> int:
        return self.obs_matrix.shape[0]

    def params(self, **values: float) -> ParameterVector:
        """Shortcut for ``model.param_layout.make(values)``."""
        return self.param_layout.make(values)

    # Evaluators bound to a parameter vector

    def f(self, z: np.ndarray, t: float, psi: ParameterVector) -> np.ndarray:
        return np.asarray(self.drift(z, t, psi.theta), dtype=float)

    def A(self, z: np.ndarray, t: float, psi: ParameterVector) -> np.ndarray:
        return np.asarray(self.pseudo_A(z, t, psi.theta), dtype=float)

    def r(self, t: float, psi: ParameterVector) -> np.ndarray:
        return np.asarray(self.pseudo_r(t, psi.theta), dtype=float)

    def gamma(self, z: np.ndarray, t: float, psi: ParameterVector) -> np.ndarray:
        """Full d x d_U diffusion matrix Gamma_sigma = [0_{d_V x d_U}; B_sigma]."""
        B = np.atleast_2d(np.asarray(self.diffusion_B(z, t, psi.sigma), dtype=float))
        if B.shape != (self.d_U, self.d_U):
            raise DimensionError(
                f"Model {self.name}: diffusion_B returned shape {B.shape}, "
                f"expected {(self.d_U, self.d_U)}"
            )
        return np.vstack([np.zeros((self.d_V, self.d_U)), B])

    def sample_states(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``count`` states uniformly in the probe box ([-3, 3]^d by default)."""
        if self.probe_box is None:
            lower, upper = -3.0 * np.ones(self.d), 3.0 * np.ones(self.d)
        else:
            lower, upper = self.probe_box
        return rng.uniform(lower, upper, size=(count, self.d))


def check_pseudo_linear(
    model: ModelSpec,
    psi: ParameterVector,
    samples: Sequence[tuple[np.ndarray, float]],
) -> float:
    """Check the pseudo-linear decomposition A_theta(z, t) z + r_theta(t) = f_theta(z, t).

    Args:
        model: Model to check.
        psi: Parameter vector at which the evaluators are queried.
        samples: Nonempty sequence of (state, time) pairs.

    Returns:
        float: Max over samples of the infinity norm of A z + r - f.

    Raises:
        DimensionError: If samples is empty or a state has the wrong size
    """
    if len(samples) == 0:
        raise DimensionError("check_pseudo_linear needs at least one sample")
    worst = 0.0
    for z, t in samples:
        z = np.asarray(z, dtype=float)
        if z.shape != (model.d,):
            raise DimensionError(f"Sample state has shape {z.shape}, expected ({model.d},)")
        residual = model.A(z, t, psi) @ z + model.r(t, psi) - model.f(z, t, psi)
        worst = max(worst, float(np.max(np.abs(residual))))
    return worst
