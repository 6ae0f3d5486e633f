"""Parameter and Weight Estimation Module.

Nested estimation procedure:

1. inner level: for fixed (psi, w) the tracking solver gives the state
   predictor and the optimal control;
2. middle level: psi_hat(w) minimizes the lagged contrast evaluated along
   that predictor (derivative-free Nelder-Mead in log coordinates for
   positive parameters);
3. outer level: the weight is chosen on a grid W with the chi-square
   criterion log K(w) computed from the optimal control at psi_hat(w).

Functions:
    middle_objective: Contrast of psi for fixed data and weight (sentinel on failure).
    fit_psi: Minimize the contrast over the free parameters.
    k_criterion: Log of the chi-square weight criterion.
    select_weight: Fit every weight of the grid and pick the best one.
"""

import logging
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.optimize import minimize

from hypoctrl._config import (
    SENTINEL,
    SIMPLEX_MAX_EVALS,
    SIMPLEX_STEP,
    SIMPLEX_TOL,
    get_worker_count,
)
from hypoctrl.analysis import connexity_lags
from hypoctrl.control import IterationOptions, solve_tracking
from hypoctrl.exceptions import EstimationError, HypoCtrlError
from hypoctrl.models import ModelSpec, ParameterVector

from ._contrast import lagged_terms

logger = logging.getLogger(__name__)

KDirection = Literal["max", "min"]


def _finite_or_none(value):
    if value is None:
        return None
    value = float(value)
    return value if np.isfinite(value) else None


def middle_objective(
    psi: ParameterVector,
    Y,
    delta: float,
    w: float,
    model: ModelSpec,
    m_B: int,
    opts: IterationOptions | None = None,
    Z0=None,
) -> float:
    """Lagged contrast H(psi | Y, Z_psi) along the tracking predictor at (psi, w).

    Any numerical failure of the tracking solve or of the contrast (including
    degenerate diffusion) returns :data:`SENTINEL` instead of raising.
    """
    try:
        tracking = solve_tracking(model, psi, Y, delta, w, opts, Z0)
        contrast = lagged_terms(model, psi, tracking.solution.Z_bar, Y, delta, m_B)
    except (HypoCtrlError, FloatingPointError, np.linalg.LinAlgError) as e:
        logger.debug(f"Objective failed at {psi}, w={w:.3g}: {e}")
        return SENTINEL
    if not np.isfinite(contrast.value):
        return SENTINEL
    return contrast.value


@dataclass(frozen=True)
class PsiFit:
    """Result of :func:`fit_psi`.

    Attributes:
        psi: Best parameter vector found.
        contrast_value: Objective at ``psi`` (never the sentinel).
        evaluations: Number of objective evaluations.
        converged: Whether every simplex run (first search and restart) shrank
            below tolerance within its budget.
        runs: Convergence flag of each run, in order.
    """

    psi: ParameterVector
    contrast_value: float
    evaluations: int
    converged: bool
    runs: tuple[bool, ...] = ()


def _initial_simplex(psi: ParameterVector, x0: np.ndarray) -> np.ndarray:
    steps = np.array(
        [
            SIMPLEX_STEP if p.positive or abs(x) < 1e-8 else SIMPLEX_STEP * abs(x)
            for p, x in zip(psi.layout.free, x0)
        ]
    )
    return np.vstack([x0, x0 + np.diag(steps)])


def _simplex_xatol(x: np.ndarray) -> float:
    # diameter tolerance relative to the magnitude of the start point
    return SIMPLEX_TOL * max(1.0, float(np.max(np.abs(x))))


def fit_psi(
    Y,
    delta: float,
    w: float,
    model: ModelSpec,
    psi_init: ParameterVector,
    m_B: int,
    opts: IterationOptions | None = None,
    Z0=None,
    max_evals: int = SIMPLEX_MAX_EVALS,
) -> PsiFit:
    """Minimize the contrast over the free parameters for a fixed weight.

    Nelder-Mead runs in optimizer coordinates (log for positive parameters)
    from an explicit simplex around ``psi_init``, then restarts once from the
    best point with a fresh simplex and the remaining evaluation budget.

    Args:
        Y: (n+1, d_o) observations.
        delta: Observation step.
        w: Balance weight.
        model: Model to fit.
        psi_init: Feasible starting point (fixed entries are kept).
        m_B: Contrast lag.
        opts: Tracking solver options.
        Z0: Known initial condition, or None to profile it.
        max_evals: Total objective evaluation budget.

    Returns:
        PsiFit: Best point found and bookkeeping.

    Raises:
        EstimationError: If every evaluation hit the sentinel
    """
    best = {"value": np.inf, "x": psi_init.to_unconstrained()}
    count = 0

    def objective(x):
        nonlocal count
        count += 1
        try:
            psi = psi_init.from_unconstrained(x)
        except HypoCtrlError:
            return SENTINEL
        value = middle_objective(psi, Y, delta, w, model, m_B, opts, Z0)
        if value < best["value"]:
            best["value"], best["x"] = value, np.array(x, dtype=float)
        return value

    x0 = psi_init.to_unconstrained()
    if x0.size == 0:
        value = objective(x0)
        if value >= SENTINEL:
            raise EstimationError(f"Objective fails at the only admissible point {psi_init}")
        return PsiFit(psi_init, value, count, True, ())

    run_status = []
    for _ in range(2):
        remaining = max_evals - count
        if remaining <= x0.size + 1:
            break
        start = best["x"] if np.isfinite(best["value"]) else x0
        result = minimize(
            objective,
            start,
            method="Nelder-Mead",
            options={
                "initial_simplex": _initial_simplex(psi_init, start),
                "xatol": _simplex_xatol(start),
                "fatol": np.inf,
                "maxfev": remaining,
            },
        )
        run_status.append(bool(result.success))

    if best["value"] >= SENTINEL:
        raise EstimationError(
            f"All {count} contrast evaluations failed for model {model.name} at w={w:.3g}"
        )
    psi_hat = psi_init.from_unconstrained(best["x"])
    converged = bool(run_status) and all(run_status)
    return PsiFit(psi_hat, float(best["value"]), count, converged, tuple(run_status))


def k_criterion(u_bar, d_U: int) -> float:
    """Log of the chi-square weight criterion.

    sum_i (d_U/2 - 1) log ||u_i||^2 - ||u_i||^2 / 2, the log-density of the
    squared control norms under a chi-square law with d_U degrees of freedom
    (up to a constant). Rows with zero norm give -inf unless d_U = 2.

    Example:
        >>> k_criterion(np.ones((3, 2)), 2)
        -3.0
    """
    u_bar = np.asarray(u_bar, dtype=float).reshape(-1, d_U)
    squares = np.sum(u_bar**2, axis=1)
    if d_U == 2:
        return float(-0.5 * np.sum(squares))
    if np.any(squares == 0):
        return -np.inf
    return float(np.sum((d_U / 2 - 1) * np.log(squares) - 0.5 * squares))


@dataclass(frozen=True)
class WeightFit:
    """Outcome of the middle level for one weight of the grid."""

    w: float
    psi: ParameterVector | None
    contrast_value: float | None = None
    log_k: float | None = None
    z0: tuple[float, ...] | None = None
    mean_sq_control: float | None = None
    tracking_iterations: int | None = None
    tracking_converged: bool | None = None
    simplex_converged: bool | None = None
    evaluations: int = 0
    wall_time: float = 0.0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_row(self) -> dict:
        return {
            "w": self.w,
            "logK": _finite_or_none(self.log_k),
            "psi": self.psi.as_dict() if self.psi is not None else None,
        }


@dataclass(frozen=True)
class EstimationResult:
    """Selected estimate and the per-weight table.

    Attributes:
        model: Model name.
        psi_hat: Parameter estimate at the selected weight.
        w_hat: Selected weight (a member of the grid).
        z0_hat: Estimated or given initial condition.
        contrast_value: Contrast at psi_hat.
        weight_fits: Per-weight fits in grid order (failed ones included).
        diagnostics: Lag, direction, solver and calibration details.
        wall_time: Elapsed seconds.
    """

    model: str
    psi_hat: ParameterVector
    w_hat: float
    z0_hat: tuple[float, ...]
    contrast_value: float
    weight_fits: tuple[WeightFit, ...]
    diagnostics: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def k_values(self) -> tuple[float | None, ...]:
        return tuple(fit.log_k for fit in self.weight_fits)

    @property
    def per_w_psi(self) -> tuple[ParameterVector | None, ...]:
        return tuple(fit.psi for fit in self.weight_fits)

    def to_dict(self) -> dict:
        """JSON-ready report; non-finite numbers become None."""
        diagnostics = {
            k: _finite_or_none(v) if isinstance(v, float) else v
            for k, v in self.diagnostics.items()
        }
        return {
            "model": self.model,
            "psi_hat": {k: _finite_or_none(v) for k, v in self.psi_hat.as_dict().items()},
            "w_hat": self.w_hat,
            "z0_hat": [_finite_or_none(v) for v in self.z0_hat],
            "k_table": [fit.to_row() for fit in self.weight_fits],
            "diagnostics": diagnostics,
            "wall_time_s": round(self.wall_time, 3),
        }


def _fit_weight(Y, delta, w, model, psi_init, m_B, opts, Z0, max_evals) -> WeightFit:
    start = time.perf_counter()
    try:
        fit = fit_psi(Y, delta, w, model, psi_init, m_B, opts, Z0, max_evals)
        tracking = solve_tracking(model, fit.psi, Y, delta, w, opts, Z0)
    except HypoCtrlError as e:
        logger.error(f"❌ Fit failed for w={w:.3g}: {e}")
        return WeightFit(w=w, psi=None, wall_time=time.perf_counter() - start, error=str(e))

    u_bar = tracking.solution.u_bar
    log_k = k_criterion(u_bar, model.d_U)
    elapsed = time.perf_counter() - start
    logger.info(
        f"w={w:.3g}: {fit.psi} | contrast {fit.contrast_value:.6g} | log K {log_k:.6g} "
        f"| {fit.evaluations} evaluations"
    )
    if not fit.converged:
        logger.warning(
            f"⚠️  Simplex search at w={w:.3g} stopped on its evaluation budget "
            f"(run status {list(fit.runs)})"
        )
    return WeightFit(
        w=w,
        psi=fit.psi,
        contrast_value=fit.contrast_value,
        log_k=log_k,
        z0=tuple(float(v) for v in tracking.solution.Z0_used),
        mean_sq_control=float(np.mean(np.sum(u_bar**2, axis=1))),
        tracking_iterations=tracking.iterations,
        tracking_converged=tracking.converged,
        simplex_converged=fit.converged,
        evaluations=fit.evaluations,
        wall_time=elapsed,
    )


def _pick(fits: Sequence[WeightFit], k_direction: KDirection) -> WeightFit:
    candidates = sorted((f for f in fits if f.ok), key=lambda f: f.w)
    values = [f.log_k for f in candidates]
    target = max(values) if k_direction == "max" else min(values)
    # first match in increasing w breaks ties toward the smaller weight
    return next(f for f in candidates if f.log_k == target)


def select_weight(
    Y,
    delta: float,
    model: ModelSpec,
    w_grid: Sequence[float],
    psi_init: ParameterVector,
    opts: IterationOptions | None = None,
    Z0=None,
    m_B: int | None = None,
    k_direction: KDirection = "max",
    workers: int | None = None,
    max_evals: int = SIMPLEX_MAX_EVALS,
) -> EstimationResult:
    """Fit psi for every weight of the grid and select the weight by log K(w).

    Args:
        Y: (n+1, d_o) observations.
        delta: Observation step.
        model: Model to fit.
        w_grid: Nonempty weight grid W.
        psi_init: Starting point of every middle-level search.
        opts: Tracking solver options.
        Z0: Known initial condition, or None to profile it.
        m_B: Contrast lag; computed from the drift structure at psi_init when None.
        k_direction: "max" selects argmax log K, "min" argmin.
        workers: Concurrent weight fits (HYPOCTRL_THREADS when None).
        max_evals: Evaluation budget of each middle-level search.

    Returns:
        EstimationResult: Selected estimate with the full per-weight table.

    Raises:
        ValueError: If the grid is empty or contains a non-positive weight
        EstimationError: If every weight failed
    """
    w_grid = [float(w) for w in w_grid]
    if not w_grid:
        raise ValueError("Weight grid W must be nonempty")
    if any(w <= 0 for w in w_grid):
        raise ValueError(f"Weights must be > 0, got {w_grid}")
    if k_direction not in ("max", "min"):
        raise ValueError(f"k_direction must be 'max' or 'min', got {k_direction!r}")
    start = time.perf_counter()
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if m_B is None:
        m_B = connexity_lags(model, psi_init).m_B

    logger.warning(
        f"⚠️  Weight selection uses {'argmax' if k_direction == 'max' else 'argmin'} of "
        f"log K(w); both readings of the criterion exist, switch with k_direction"
    )
    workers = min(workers or get_worker_count(), len(w_grid))
    args = (model, psi_init, m_B, opts, Z0, max_evals)
    if workers == 1:
        fits = [_fit_weight(Y, delta, w, *args) for w in w_grid]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_fit_weight, Y, delta, w, *args) for w in w_grid]
            fits = [future.result() for future in futures]

    if not any(f.ok for f in fits):
        raise EstimationError(
            f"Estimation failed for every weight of {w_grid}: "
            + "; ".join(f"w={f.w:.3g}: {f.error}" for f in fits)
        )
    chosen = _pick(fits, k_direction)

    expected = model.d_U
    logger.info(
        f"📊 Mean squared control at w={chosen.w:.3g}: {chosen.mean_sq_control:.4g} "
        f"(chi-square mean {expected})"
    )
    if not 0.5 * expected <= chosen.mean_sq_control <= 1.5 * expected:
        logger.warning(
            f"⚠️  Mean squared control {chosen.mean_sq_control:.4g} is more than 50% away "
            f"from {expected}; the optimal control does not look Brownian at this weight"
        )

    diagnostics = {
        "m_B": m_B,
        "k_direction": k_direction,
        "contrast_value": chosen.contrast_value,
        "mean_sq_control": chosen.mean_sq_control,
        "tracking_iterations": chosen.tracking_iterations,
        "tracking_converged": chosen.tracking_converged,
        "simplex_converged": chosen.simplex_converged,
        "evaluations": chosen.evaluations,
        "z0_profiled": Z0 is None,
        "failed_weights": [f.w for f in fits if not f.ok],
    }
    return EstimationResult(
        model=model.name,
        psi_hat=chosen.psi,
        w_hat=chosen.w,
        z0_hat=chosen.z0,
        contrast_value=chosen.contrast_value,
        weight_fits=tuple(fits),
        diagnostics=diagnostics,
        wall_time=time.perf_counter() - start,
    )
