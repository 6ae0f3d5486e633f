"""Lagged Contrast Module.

Gaussian pseudo-likelihood of the observations given a state predictor. The
residual X_i compares Y_{i+m_B+1} with the predictor pushed m_B + 1 Euler steps
forward; its covariance collects the noise injected at steps i..i+m_B and
propagated to the observations through the linearized transitions:

    X_i     = Y_{i+m_B+1} - C (A_bar_{i+m_B} ... A_bar_i) Z_i
              - sum_r delta C (A_bar_{i+m_B} ... A_bar_{i+r+1}) r_{i+r}
    G_{i+r} = sqrt(delta) C (A_bar_{i+m_B} ... A_bar_{i+r+1}) Gamma(Z_{i+r})
    Sigma_i = sum_r G_{i+r} G_{i+r}'
    H       = sum_i X_i' Sigma_i^-1 X_i + log|Sigma_i|

for i = 0..n-m_B-2, with A_bar_k = I + delta A(Z_k, t_k). With m_B = 0 this is
the usual Euler contrast of elliptic models.

Functions:
    lagged_terms: Residuals, covariances and contrast value.
    mc_covariance_check: Monte Carlo estimate of one Sigma_i.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from hypoctrl._config import JITTER
from hypoctrl.exceptions import DimensionError, H1ViolationError
from hypoctrl.models import ModelSpec, ParameterVector

logger = logging.getLogger(__name__)

MIN_MC_SAMPLES = 10_000


@dataclass(frozen=True, eq=False)
class ContrastEval:
    """Terms of the lagged contrast.

    Attributes:
        X: (N, d_o) residuals, N = n - m_B - 1.
        Sigma: (N, d_o, d_o) residual covariances (jitter included).
        value: sum_i X_i' Sigma_i^-1 X_i + log|Sigma_i|.
        logdets: (N,) log-determinants of Sigma_i.
    """

    X: np.ndarray
    Sigma: np.ndarray
    value: float
    logdets: np.ndarray


@lru_cache(maxsize=None)
def _warn_overlapping_windows(model_name: str, m_B: int) -> None:
    logger.warning(
        f"⚠️  Model {model_name}: noise of several steps reaches the observations "
        f"within one window (m_B={m_B}); residuals overlap and the contrast is used "
        f"as a pseudo-likelihood"
    )


def _frozen_coefficients(model, psi, states, times, delta, count):
    eye = np.eye(model.d)
    Abar = np.stack([eye + delta * model.A(states[k], times[k], psi) for k in range(count)])
    r = np.stack([model.r(times[k], psi) for k in range(count)])
    Gamma = np.stack([model.gamma(states[k], times[k], psi) for k in range(count)])
    return Abar, r, Gamma


def _factorize(Sigma: np.ndarray) -> np.ndarray:
    """Batched Cholesky factors after relative jitter.

    Raises:
        H1ViolationError: At the first index whose covariance is not positive definite
    """
    d_o = Sigma.shape[-1]
    traces = np.trace(Sigma, axis1=1, axis2=2)
    bad = np.flatnonzero(~np.isfinite(traces) | (traces <= 0))
    if bad.size:
        raise H1ViolationError(
            f"Contrast covariance is degenerate at index {bad[0]} (trace {traces[bad[0]]:.3e})",
            int(bad[0]),
        )
    jittered = Sigma + (JITTER * traces / d_o)[:, None, None] * np.eye(d_o)
    try:
        return np.linalg.cholesky(jittered)
    except np.linalg.LinAlgError:
        for i, S in enumerate(jittered):
            try:
                np.linalg.cholesky(S)
            except np.linalg.LinAlgError:
                raise H1ViolationError(
                    f"Contrast covariance is not positive definite at index {i}", i
                )
        raise


def lagged_terms(
    model: ModelSpec,
    psi: ParameterVector,
    Zbar,
    Y,
    delta: float,
    m_B: int,
    t0: float = 0.0,
) -> ContrastEval:
    """Evaluate the lagged contrast along a state predictor.

    Args:
        model: Model providing A, r, Gamma and C.
        psi: Parameter vector.
        Zbar: (n+1, d) state predictor, also used as linearization points.
        Y: (n+1, d_o) observations.
        delta: Observation step, > 0.
        m_B: Contrast lag, >= 0.
        t0: Time of the first observation.

    Returns:
        ContrastEval: Residuals, covariances, log-determinants and value.

    Raises:
        DimensionError: On shape mismatch or n <= m_B + 1
        H1ViolationError: If a covariance is not positive definite after jitter
    """
    Zbar = np.asarray(Zbar, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if m_B < 0:
        raise ValueError(f"m_B must be >= 0, got {m_B}")
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    n = Y.shape[0] - 1
    if Zbar.shape != (n + 1, model.d) or Y.shape[1] != model.d_o:
        raise DimensionError(
            f"Predictor {Zbar.shape} and observations {Y.shape} do not fit model "
            f"{model.name} (d={model.d}, d_o={model.d_o})"
        )
    if n <= m_B + 1:
        raise DimensionError(f"Need n > m_B + 1 observation steps, got n={n}, m_B={m_B}")

    count = n - m_B - 1
    times = t0 + delta * np.arange(n + 1)
    Abar, r, Gamma = _frozen_coefficients(model, psi, Zbar, times, delta, count + m_B)

    idx = np.arange(count)
    sqrt_delta = np.sqrt(delta)
    P = np.broadcast_to(model.obs_matrix, (count, model.d_o, model.d))
    X = Y[idx + m_B + 1].copy()
    Sigma = np.zeros((count, model.d_o, model.d_o))
    active_blocks = 0
    # left products are accumulated from the last step of the window backwards
    for lag in range(m_B, -1, -1):
        X -= delta * np.einsum("nij,nj->ni", P, r[idx + lag])
        G = sqrt_delta * (P @ Gamma[idx + lag])
        Sigma += G @ np.swapaxes(G, 1, 2)
        if np.any(np.abs(G) > 0):
            active_blocks += 1
        P = P @ Abar[idx + lag]
    X -= np.einsum("nij,nj->ni", P, Zbar[idx])

    if active_blocks > 1:
        _warn_overlapping_windows(model.name, m_B)

    L = _factorize(Sigma)
    logdets = 2.0 * np.sum(np.log(np.diagonal(L, axis1=1, axis2=2)), axis=1)
    whitened = np.linalg.solve(L, X[:, :, None])[:, :, 0]
    value = float(np.sum(whitened**2) + np.sum(logdets))
    jittered = L @ np.swapaxes(L, 1, 2)
    return ContrastEval(X=X, Sigma=jittered, value=value, logdets=logdets)


def mc_covariance_check(
    model: ModelSpec,
    psi: ParameterVector,
    z_window,
    delta: float,
    m_B: int,
    n_samples: int,
    seed: int = 0,
    t0: float = 0.0,
) -> np.ndarray:
    """Empirical covariance of sum_r G_{i+r} u_{i+r} over one window.

    Args:
        model: Model providing A, Gamma and C.
        psi: Parameter vector.
        z_window: (m_B+1, d) states Z_i..Z_{i+m_B}.
        delta: Observation step.
        m_B: Contrast lag.
        n_samples: Number of standard normal draws, >= 10000.
        seed: Seed of the draws.
        t0: Time of the first window state.

    Returns:
        np.ndarray: (d_o, d_o) empirical covariance.
    """
    if n_samples < MIN_MC_SAMPLES:
        raise ValueError(f"n_samples must be >= {MIN_MC_SAMPLES}, got {n_samples}")
    z_window = np.atleast_2d(np.asarray(z_window, dtype=float))
    if z_window.shape != (m_B + 1, model.d):
        raise DimensionError(
            f"Window has shape {z_window.shape}, expected ({m_B + 1}, {model.d})"
        )
    times = t0 + delta * np.arange(m_B + 1)
    eye = np.eye(model.d)

    blocks = []
    P = model.obs_matrix
    for lag in range(m_B, -1, -1):
        blocks.append(np.sqrt(delta) * (P @ model.gamma(z_window[lag], times[lag], psi)))
        P = P @ (eye + delta * model.A(z_window[lag], times[lag], psi))

    rng = np.random.default_rng(seed)
    u = rng.standard_normal((n_samples, len(blocks), model.d_U))
    samples = sum(u[:, k] @ G.T for k, G in enumerate(blocks))
    return np.atleast_2d(np.cov(samples, rowvar=False))
