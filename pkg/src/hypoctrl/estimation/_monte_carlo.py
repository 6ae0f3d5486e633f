"""Monte Carlo Benchmark Module.

Repeats simulate -> select_weight on independently seeded trajectories and
aggregates the empirical mean and variance of each free parameter estimate.
"""

import logging
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from tqdm import tqdm

from hypoctrl._config import SIMPLEX_MAX_EVALS, get_worker_count
from hypoctrl.analysis import connexity_lags
from hypoctrl.control import IterationOptions
from hypoctrl.exceptions import EstimationError, HypoCtrlError
from hypoctrl.models import ModelSpec, ParameterVector
from hypoctrl.simulation import simulate
from hypoctrl.utils import format_duration

from ._estimator import EstimationResult, KDirection, select_weight

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MonteCarloReport:
    """Aggregated Monte Carlo estimates for one (T, n) setting.

    Attributes:
        model: Model name.
        truth: True parameter values.
        T: Horizon.
        n: Number of steps.
        trials: Number of trials run.
        failures: Number of failed trials (excluded from the statistics).
        mean: Per free parameter empirical mean over successful trials.
        variance: Per free parameter empirical variance (ddof=1, 0 for one trial).
        estimates: Successful per-trial estimates, ordered by trial index.
        w_selected: Selected weight of each successful trial.
        mean_wall_time: Mean wall time of one weight fit, per weight.
        wall_time: Elapsed seconds of the whole run.
    """

    model: str
    truth: dict[str, float]
    T: float
    n: int
    trials: int
    failures: int
    mean: dict[str, float]
    variance: dict[str, float]
    estimates: tuple[dict[str, float], ...] = field(default=())
    w_selected: tuple[float, ...] = field(default=())
    mean_wall_time: dict[float, float] = field(default_factory=dict)
    wall_time: float = 0.0

    def to_frame(self) -> pd.DataFrame:
        """One row per free parameter: truth, mean, bias and variance."""
        rows = [
            {
                "parameter": name,
                "truth": self.truth.get(name),
                "mean": self.mean[name],
                "bias": self.mean[name] - self.truth[name] if name in self.truth else None,
                "variance": self.variance[name],
            }
            for name in self.mean
        ]
        return pd.DataFrame(rows)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "T": self.T,
            "n": self.n,
            "trials": self.trials,
            "failures": self.failures,
            "truth": self.truth,
            "mean": self.mean,
            "variance": self.variance,
            "w_selected": list(self.w_selected),
            "mean_wall_time": {
                f"{w:g}": format_duration(s) for w, s in self.mean_wall_time.items()
            },
            "wall_time_s": round(self.wall_time, 3),
        }


def perturbed_guess(psi_true: ParameterVector, seed: int) -> ParameterVector:
    """Truth with every free entry multiplied by an independent U[0.5, 1.5] factor."""
    rng = np.random.default_rng([seed, 1])
    factors = rng.uniform(0.5, 1.5, size=len(psi_true.layout.free))
    return psi_true.with_free(psi_true.free_values() * factors)


def _run_trial(model, psi_true, Z0, T, n, seed, psi_init, estimate_kwargs):
    trajectory = simulate(model, psi_true, Z0, T, n, seed)
    guess = psi_init if psi_init is not None else perturbed_guess(psi_true, seed)
    return select_weight(
        trajectory.observations, trajectory.delta, model, psi_init=guess, **estimate_kwargs
    )


def monte_carlo(
    model: ModelSpec,
    psi_true: ParameterVector,
    Z0,
    T: float,
    n: int,
    w_grid,
    trials: int,
    seed0: int = 0,
    profile_z0: bool = False,
    psi_init: ParameterVector | None = None,
    opts: IterationOptions | None = None,
    m_B: int | None = None,
    k_direction: KDirection = "max",
    workers: int | None = None,
    max_evals: int = SIMPLEX_MAX_EVALS,
    progress: bool = True,
) -> MonteCarloReport:
    """Run ``trials`` seeded simulate/estimate cycles and aggregate the estimates.

    Trial k simulates with seed ``seed0 + k``; its starting point is
    ``psi_init`` or, when None, the truth perturbed by :func:`perturbed_guess`
    with the same seed. Trials run on a bounded thread pool; results are
    merged by trial index, so the report only depends on the inputs.

    Args:
        model: Model to simulate and fit.
        psi_true: True parameters.
        Z0: Initial state of the simulations.
        T: Horizon, > 0.
        n: Number of steps.
        w_grid: Weight grid W.
        trials: Number of trials, >= 1.
        seed0: Seed of the first trial.
        profile_z0: Estimate Z0 instead of using the known one.
        psi_init: Common starting point of every trial.
        opts: Tracking solver options.
        m_B: Contrast lag (computed at the truth when None).
        k_direction: Weight selection direction.
        workers: Concurrent trials (HYPOCTRL_THREADS when None).
        max_evals: Evaluation budget of each middle-level search.
        progress: Show a tqdm progress bar.

    Returns:
        MonteCarloReport: Aggregated statistics.

    Raises:
        ValueError: If trials < 1
        EstimationError: If every trial failed
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    start = time.perf_counter()
    if m_B is None:
        m_B = connexity_lags(model, psi_true).m_B
    estimate_kwargs = {
        "w_grid": tuple(w_grid),
        "opts": opts,
        "Z0": None if profile_z0 else Z0,
        "m_B": m_B,
        "k_direction": k_direction,
        "workers": 1,
        "max_evals": max_evals,
    }
    workers = min(workers or get_worker_count(), trials)

    results: dict[int, EstimationResult] = {}
    failures = 0
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {
            executor.submit(
                _run_trial, model, psi_true, Z0, T, n, seed0 + k, psi_init, estimate_kwargs
            ): k
            for k in range(trials)
        }
        with tqdm(total=trials, desc=f"{model.name} T={T:g} n={n}", disable=not progress) as bar:
            for future in as_completed(futures):
                k = futures[future]
                try:
                    results[k] = future.result()
                except HypoCtrlError as e:
                    failures += 1
                    logger.error(f"❌ Trial {k} (seed {seed0 + k}) failed: {e}")
                bar.update(1)

    if not results:
        raise EstimationError(f"All {trials} Monte Carlo trials failed for model {model.name}")

    ordered = [results[k] for k in sorted(results)]
    free_names = psi_true.layout.free_names
    estimates = pd.DataFrame(
        [{name: r.psi_hat.as_dict()[name] for name in free_names} for r in ordered]
    )
    mean = {name: float(estimates[name].mean()) for name in free_names}
    if len(estimates) >= 2:
        variance = {name: float(estimates[name].var(ddof=1)) for name in free_names}
    else:
        variance = {name: 0.0 for name in free_names}

    times = defaultdict(list)
    for r in ordered:
        for fit in r.weight_fits:
            times[fit.w].append(fit.wall_time)

    report = MonteCarloReport(
        model=model.name,
        truth={name: psi_true.as_dict()[name] for name in free_names},
        T=float(T),
        n=int(n),
        trials=trials,
        failures=failures,
        mean=mean,
        variance=variance,
        estimates=tuple(estimates.to_dict(orient="records")),
        w_selected=tuple(r.w_hat for r in ordered),
        mean_wall_time={w: float(np.mean(s)) for w, s in sorted(times.items())},
        wall_time=time.perf_counter() - start,
    )
    logger.info(
        f"✅ Monte Carlo {model.name} (T={T:g}, n={n}): {trials - failures}/{trials} trials "
        f"in {format_duration(report.wall_time)}"
    )
    return report
