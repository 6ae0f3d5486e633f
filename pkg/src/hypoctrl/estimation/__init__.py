from hypoctrl.estimation._contrast import ContrastEval, lagged_terms, mc_covariance_check
from hypoctrl.estimation._estimator import (
    EstimationResult,
    PsiFit,
    WeightFit,
    fit_psi,
    k_criterion,
    middle_objective,
    select_weight,
)
from hypoctrl.estimation._monte_carlo import MonteCarloReport, monte_carlo, perturbed_guess

__all__ = [
    "ContrastEval",
    "EstimationResult",
    "MonteCarloReport",
    "PsiFit",
    "WeightFit",
    "fit_psi",
    "k_criterion",
    "lagged_terms",
    "mc_covariance_check",
    "middle_objective",
    "monte_carlo",
    "perturbed_guess",
    "select_weight",
]
