"""Linear-Quadratic Tracking Module.

Exact solution of the penalized tracking problem for frozen coefficients:

    minimize   sum_{i=1..n} ||C Z_i - Y_i||^2 + (1/w) sum_{i=0..n-1} u_i' u_i
    subject to Z_{i+1} = A_bar_i Z_i + delta r_i + sqrt(delta) Gamma_i u_i,  Z_0 given.

Every control u_0..u_{n-1} is penalized, u_0 included, so that the problem
stays well posed when Z_0 is profiled out.

The backward Riccati recursion produces the value function
V_i(z) = z' E_i z + 2 h_i' z + alpha_i of the tail cost from index i (the
misfit at i included). The forward pass returns the optimal feedback control
and the state predictor; E_0 and h_0 give the profiled initial condition in
closed form. Only the d_U x d_U matrix (1/w) I + delta Gamma' E Gamma is ever
factorized, so rank-deficient Gamma (hypoelliptic models) needs no special care.

Functions:
    riccati_backward: Backward sequences E_i, h_i.
    control_forward: Optimal control, predictor and cost for a given Z_0.
    cost_eval: Tracking cost of an arbitrary control sequence.
    estimate_Z0: Minimizer of the profiled cost over Z_0.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from hypoctrl.exceptions import DimensionError, NonIdentifiableError, RiccatiError


@dataclass(frozen=True, eq=False)
class Linearization:
    """Frozen-coefficient dynamics and data of one tracking problem.

    Attributes:
        Abar: (n, d, d) transition matrices I + delta A(z_i, t_i).
        r: (n, d) affine terms r(t_i).
        Gamma: (n, d, d_U) diffusion matrices Gamma(z_i, t_i).
        delta: Time step.
        C: (d_o, d) observation matrix.
        Y: (n+1, d_o) observations.
        w: Balance weight between data fidelity and control penalty, > 0.
    """

    Abar: np.ndarray
    r: np.ndarray
    Gamma: np.ndarray
    delta: float
    C: np.ndarray
    Y: np.ndarray
    w: float

    def __post_init__(self):
        n, d, _ = self.Abar.shape
        if self.w <= 0:
            raise ValueError(f"Weight w must be > 0, got {self.w}")
        if self.delta <= 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if self.r.shape != (n, d) or self.Gamma.shape[:2] != (n, d):
            raise DimensionError(
                f"Inconsistent linearization: Abar {self.Abar.shape}, "
                f"r {self.r.shape}, Gamma {self.Gamma.shape}"
            )
        if self.Y.shape != (n + 1, self.C.shape[0]) or self.C.shape[1] != d:
            raise DimensionError(
                f"Observations {self.Y.shape} / observation matrix {self.C.shape} "
                f"do not match n={n}, d={d}"
            )

    @property
    def n(self) -> int:
        return self.Abar.shape[0]

    @property
    def d(self) -> int:
        return self.Abar.shape[1]

    @property
    def d_U(self) -> int:
        return self.Gamma.shape[2]


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    """Backward Riccati sequences.

    Attributes:
        E: (n+1, d, d) symmetric PSD matrices, E[n] = C'C.
        h: (n+1, d) vectors, h[n] = -C' Y_n.
        G: (n, d_U, d_U) inverses [(1/w) I + delta Gamma_i' E_{i+1} Gamma_i]^-1.
    """

    E: np.ndarray
    h: np.ndarray
    G: np.ndarray


@dataclass(frozen=True, eq=False)
class ControlSolution:
    """Optimal control, state predictor and tracking cost.

    Attributes:
        u_bar: (n, d_U) optimal controls.
        Z_bar: (n+1, d) state predictor under the frozen dynamics.
        cost: Tracking cost C_w (misfit over i=1..n, all controls penalized).
        Z0_used: Initial condition the predictor starts from.
    """

    u_bar: np.ndarray
    Z_bar: np.ndarray
    cost: float
    Z0_used: np.ndarray


def riccati_backward(lin: Linearization) -> RiccatiSolution:
    """Run the backward Riccati recursion of the tracking problem.

    E_n = C'C, h_n = -C'Y_n and for i = n-1..0, with G = [(1/w) I + delta Gamma' E Gamma]^-1:

        E_i = A' E A + C'C - delta A' E Gamma G Gamma' E A
        h_i = delta A' E r + A' h - C'Y_i - delta A' E Gamma G Gamma' (h + delta E r)

    where E, h stand for E_{i+1}, h_{i+1}. E_i is resymmetrized after each step.

    Raises:
        RiccatiError: If the inner matrix cannot be factorized or values become non-finite
    """
    n, d, d_U = lin.n, lin.d, lin.d_U
    C, Y, delta = lin.C, lin.Y, lin.delta
    CtC = C.T @ C
    penalty = np.eye(d_U) / lin.w
    eye_u = np.eye(d_U)

    E = np.empty((n + 1, d, d))
    h = np.empty((n + 1, d))
    G = np.empty((n, d_U, d_U))
    E[n] = CtC
    h[n] = -C.T @ Y[n]

    for i in range(n - 1, -1, -1):
        A, Gam, r = lin.Abar[i], lin.Gamma[i], lin.r[i]
        E1, h1 = E[i + 1], h[i + 1]
        EG = E1 @ Gam
        try:
            factor = cho_factor(penalty + delta * (Gam.T @ EG))
        except (LinAlgError, ValueError) as e:
            raise RiccatiError(f"Inner Riccati matrix not positive definite at step {i}: {e}")
        Gi = cho_solve(factor, eye_u)
        AtEG = A.T @ EG
        Er = E1 @ r
        Ei = A.T @ E1 @ A + CtC - delta * AtEG @ Gi @ AtEG.T
        E[i] = 0.5 * (Ei + Ei.T)
        h[i] = (
            delta * (A.T @ Er)
            + A.T @ h1
            - C.T @ Y[i]
            - delta * AtEG @ (Gi @ (Gam.T @ (h1 + delta * Er)))
        )
        G[i] = Gi
        if not (np.all(np.isfinite(E[i])) and np.all(np.isfinite(h[i]))):
            raise RiccatiError(f"Non-finite Riccati recursion at step {i}")

    return RiccatiSolution(E=E, h=h, G=G)


def _rollout(lin: Linearization, u: np.ndarray, Z0: np.ndarray) -> np.ndarray:
    sqrt_delta = np.sqrt(lin.delta)
    Z = np.empty((lin.n + 1, lin.d))
    Z[0] = Z0
    for i in range(lin.n):
        Z[i + 1] = lin.Abar[i] @ Z[i] + lin.delta * lin.r[i] + sqrt_delta * (lin.Gamma[i] @ u[i])
    return Z


def _tracking_cost(
    lin: Linearization, Z: np.ndarray, u: np.ndarray, include_initial: bool
) -> float:
    start = 0 if include_initial else 1
    misfit = Z[start:] @ lin.C.T - lin.Y[start:]
    return float(np.sum(misfit**2) + np.sum(u**2) / lin.w)


def control_forward(
    lin: Linearization, ricc: RiccatiSolution, Z0
) -> ControlSolution:
    """Forward pass: optimal feedback control and state predictor from Z0.

    u_i = -sqrt(delta) G_i Gamma_i' (E_{i+1} (A_i Z_i + delta r_i) + h_{i+1})

    Raises:
        DimensionError: If Z0 does not have d entries
        RiccatiError: On non-finite propagation
    """
    Z0 = np.asarray(Z0, dtype=float)
    if Z0.shape != (lin.d,):
        raise DimensionError(f"Z0 has shape {Z0.shape}, expected ({lin.d},)")
    n, delta = lin.n, lin.delta
    sqrt_delta = np.sqrt(delta)

    Z = np.empty((n + 1, lin.d))
    u = np.empty((n, lin.d_U))
    Z[0] = Z0
    for i in range(n):
        Gam = lin.Gamma[i]
        m = lin.Abar[i] @ Z[i] + delta * lin.r[i]
        u[i] = -sqrt_delta * (ricc.G[i] @ (Gam.T @ (ricc.E[i + 1] @ m + ricc.h[i + 1])))
        Z[i + 1] = m + sqrt_delta * (Gam @ u[i])
    if not (np.all(np.isfinite(Z)) and np.all(np.isfinite(u))):
        raise RiccatiError("Non-finite state predictor in forward pass")

    return ControlSolution(
        u_bar=u, Z_bar=Z, cost=_tracking_cost(lin, Z, u, False), Z0_used=Z0.copy()
    )


def cost_eval(
    lin: Linearization, u, Z0, include_initial: bool = False
) -> float:
    """Tracking cost C_w(u | Y; Z0) of an arbitrary control sequence.

    Args:
        lin: Frozen dynamics and data.
        u: (n, d_U) controls.
        Z0: Initial state.
        include_initial: Also count ||C Z_0 - Y_0||^2, which makes the result the
            profiled cost whose minimizer over Z0 is :func:`estimate_Z0`.
    """
    u = np.asarray(u, dtype=float).reshape(lin.n, lin.d_U)
    Z = _rollout(lin, u, np.asarray(Z0, dtype=float))
    return _tracking_cost(lin, Z, u, include_initial)


def estimate_Z0(ricc: RiccatiSolution) -> np.ndarray:
    """Profiled initial condition -E_0^{-1} h_0.

    Raises:
        NonIdentifiableError: If E_0 is numerically singular
    """
    E0, h0 = ricc.E[0], ricc.h[0]
    eigenvalues = np.linalg.eigvalsh(E0)
    if eigenvalues.max() <= 0 or eigenvalues.min() <= 1e-13 * eigenvalues.max():
        raise NonIdentifiableError(
            f"Initial condition is not identifiable: E_0 eigenvalues {eigenvalues}"
        )
    return -np.linalg.solve(E0, h0)
