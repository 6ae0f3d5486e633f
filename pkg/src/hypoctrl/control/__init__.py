from hypoctrl.control._lq_control import (
    ControlSolution,
    Linearization,
    RiccatiSolution,
    control_forward,
    cost_eval,
    estimate_Z0,
    riccati_backward,
)
from hypoctrl.control._nonlinear_control import (
    IterationOptions,
    TrackingResult,
    linearize,
    solve_tracking,
)

__all__ = [
    "ControlSolution",
    "IterationOptions",
    "Linearization",
    "RiccatiSolution",
    "TrackingResult",
    "control_forward",
    "cost_eval",
    "estimate_Z0",
    "linearize",
    "riccati_backward",
    "solve_tracking",
]
