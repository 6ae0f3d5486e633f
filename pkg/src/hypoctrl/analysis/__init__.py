from hypoctrl.analysis._hypoellipticity import (
    LagReport,
    connexity_lags,
    h1_rank_check,
    verify_lag_finite_difference,
)

__all__ = [
    "LagReport",
    "connexity_lags",
    "h1_rank_check",
    "verify_lag_finite_difference",
]
