"""Exceptions raised by hypoctrl."""


class HypoCtrlError(Exception):
    """Base class of all hypoctrl errors."""


class ModelError(HypoCtrlError, ValueError):
    """Invalid model definition or parameter values."""


class DimensionError(HypoCtrlError, ValueError):
    """Array shapes inconsistent with the model dimensions."""


class ConnexityError(HypoCtrlError):
    """A smooth coordinate is not reached by any rough coordinate."""

    def __init__(self, message: str, unreachable: list[int]):
        super().__init__(message)
        self.unreachable = unreachable


class SimulationError(HypoCtrlError):
    """Euler-Maruyama trajectory exploded or became non-finite."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class RiccatiError(HypoCtrlError):
    """Backward Riccati recursion or forward pass failed numerically."""


class NonIdentifiableError(HypoCtrlError):
    """The profiled initial condition is not identifiable (singular E_0)."""


class H1ViolationError(HypoCtrlError):
    """A contrast covariance is not positive definite."""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class EstimationError(HypoCtrlError):
    """Parameter or weight estimation failed for every candidate."""
