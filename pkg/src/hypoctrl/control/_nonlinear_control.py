"""Nonlinear Tracking Module.

State predictor for nonlinear models by iterating frozen-coefficient LQ
problems: the pseudo-linear coefficients A(z, t) and Gamma(z, t) are evaluated
along the previous predictor, the LQ problem is solved exactly, and the loop
stops once the predictor moves less than ``epsilon`` (squared norm summed over
the grid). Linear models converge at the second pass.
"""

import logging
from dataclasses import dataclass

import numpy as np

from hypoctrl._config import TRACKING_EPS_PER_STEP, TRACKING_MAX_ITER
from hypoctrl.exceptions import DimensionError
from hypoctrl.models import ModelSpec, ParameterVector

from ._lq_control import (
    ControlSolution,
    Linearization,
    control_forward,
    estimate_Z0,
    riccati_backward,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IterationOptions:
    """Stopping rule of the iterative tracking solver.

    Attributes:
        epsilon: Threshold on sum_i ||Z_i^l - Z_i^{l-1}||^2; None means 1e-6 * n.
        max_iter: Iteration cap, >= 1.
        z0_guess: Constant starting profile when Z0 is unknown (zeros if None).
    """

    epsilon: float | None = None
    max_iter: int = TRACKING_MAX_ITER
    z0_guess: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.epsilon is not None and self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")

    def resolved_epsilon(self, n: int) -> float:
        return self.epsilon if self.epsilon is not None else TRACKING_EPS_PER_STEP * n


@dataclass(frozen=True, eq=False)
class TrackingResult:
    """Outcome of :func:`solve_tracking`.

    Attributes:
        solution: Last LQ solution (control, predictor, cost, Z0 used).
        iterations: Number of LQ solves performed.
        converged: Whether the predictor change fell below epsilon.
        linearization: Frozen dynamics of the last solve.
        changes: Predictor change after each iteration.
    """

    solution: ControlSolution
    iterations: int
    converged: bool
    linearization: Linearization
    changes: tuple[float, ...]


def linearize(
    model: ModelSpec,
    psi: ParameterVector,
    Z_ref: np.ndarray,
    times: np.ndarray,
    Y: np.ndarray,
    delta: float,
    w: float,
) -> Linearization:
    """Freeze A_bar_i = I + delta A(Z_ref_i, t_i) and Gamma(Z_ref_i, t_i) for i = 0..n-1."""
    n = Y.shape[0] - 1
    eye = np.eye(model.d)
    Abar = np.stack([eye + delta * model.A(Z_ref[i], times[i], psi) for i in range(n)])
    r = np.stack([model.r(times[i], psi) for i in range(n)])
    Gamma = np.stack([model.gamma(Z_ref[i], times[i], psi) for i in range(n)])
    return Linearization(Abar=Abar, r=r, Gamma=Gamma, delta=delta, C=model.obs_matrix, Y=Y, w=w)


def solve_tracking(
    model: ModelSpec,
    psi: ParameterVector,
    Y,
    delta: float,
    w: float,
    opts: IterationOptions | None = None,
    Z0=None,
    t0: float = 0.0,
) -> TrackingResult:
    """Compute the state predictor of a (possibly nonlinear) model.

    Args:
        model: Model whose pseudo-linear form is iterated.
        psi: Parameter vector.
        Y: (n+1, d_o) observations, n >= 1.
        delta: Observation step.
        w: Balance weight, > 0.
        opts: Stopping rule (defaults when None).
        Z0: Known initial condition; when None it is profiled at every iteration.
        t0: Time of the first observation.

    Returns:
        TrackingResult: Last solution with iteration diagnostics.

    Raises:
        DimensionError: On observation / model mismatch
        RiccatiError: If an LQ solve breaks down
        NonIdentifiableError: If Z0 is profiled and E_0 is singular
    """
    opts = opts or IterationOptions()
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[0] < 2 or Y.shape[1] != model.d_o:
        raise DimensionError(
            f"Observations of shape {Y.shape} do not fit model {model.name} (d_o={model.d_o})"
        )
    if w <= 0:
        raise ValueError(f"Weight w must be > 0, got {w}")
    n = Y.shape[0] - 1
    times = t0 + delta * np.arange(n + 1)
    epsilon = opts.resolved_epsilon(n)

    if Z0 is not None:
        start = np.asarray(Z0, dtype=float)
    elif opts.z0_guess is not None:
        start = np.asarray(opts.z0_guess, dtype=float)
    else:
        start = np.zeros(model.d)
    if start.shape != (model.d,):
        raise DimensionError(f"Initial state has shape {start.shape}, expected ({model.d},)")
    Z_ref = np.tile(start, (n + 1, 1))

    changes = []
    for iteration in range(1, opts.max_iter + 1):
        lin = linearize(model, psi, Z_ref, times, Y, delta, w)
        ricc = riccati_backward(lin)
        z0_used = start if Z0 is not None else estimate_Z0(ricc)
        solution = control_forward(lin, ricc, z0_used)
        change = float(np.sum((solution.Z_bar - Z_ref) ** 2))
        changes.append(change)
        Z_ref = solution.Z_bar
        if change < epsilon:
            return TrackingResult(solution, iteration, True, lin, tuple(changes))

    logger.warning(
        f"Tracking for model {model.name} did not converge in {opts.max_iter} iterations "
        f"(last change {changes[-1]:.3e}, epsilon {epsilon:.3e}, psi: {psi}, w={w:.3g})"
    )
    return TrackingResult(solution, opts.max_iter, False, lin, tuple(changes))
