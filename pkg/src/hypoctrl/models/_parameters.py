"""Model Parameter Layout Module.

Named parameter descriptors and the flattened parameter vector psi = (theta, sigma)
consumed by the model evaluators and by the optimizers.

Each parameter belongs to the drift block (theta) or to the diffusion block
(sigma), may be flagged positive and may carry a fixed value. Optimizers work on
the free entries only, in log coordinates for the positive ones.

Example:
    >>> layout = ParameterLayout((
    ...     Parameter("nu", "drift"),
    ...     Parameter("c", "diffusion", positive=True),
    ... ))
    >>> psi = layout.make({"nu": 0.2, "c": 0.15})
    >>> psi.theta
    {'nu': 0.2}
"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np

from hypoctrl.exceptions import ModelError

ParameterKind = Literal["drift", "diffusion"]


@dataclass(frozen=True)
class Parameter:
    """Descriptor of one named model parameter."""

    name: str
    kind: ParameterKind
    positive: bool = False
    fixed: float | None = None

    @property
    def is_free(self) -> bool:
        return self.fixed is None


@dataclass(frozen=True)
class ParameterLayout:
    """Ordered parameter descriptors defining the flattened order of psi."""

    parameters: tuple[Parameter, ...]

    def __post_init__(self):
        names = [p.name for p in self.parameters]
        if len(set(names)) != len(names):
            raise ModelError(f"Duplicated parameter names in layout: {names}")
        for p in self.parameters:
            if p.kind not in ("drift", "diffusion"):
                raise ModelError(f"Parameter {p.name}: unknown kind {p.kind!r}")
            if p.fixed is not None and p.positive and p.fixed <= 0:
                raise ModelError(f"Parameter {p.name}: fixed value must be > 0")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parameters)

    @property
    def free(self) -> tuple[Parameter, ...]:
        return tuple(p for p in self.parameters if p.is_free)

    @property
    def free_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.free)

    def make(
        self, values: Mapping[str, float], allow_boundary: bool = False
    ) -> "ParameterVector":
        """Build a validated parameter vector from a name -> value mapping.

        Fixed parameters may be omitted; when given they must equal their
        declared value. With ``allow_boundary`` positive parameters may be 0
        (degenerate diffusion in simulations and diagnostics); such vectors
        cannot be mapped to optimizer coordinates.

        Raises:
            ModelError: On unknown or missing names and constraint violations
        """
        unknown = set(values) - set(self.names)
        if unknown:
            raise ModelError(
                f"Unknown parameters {sorted(unknown)}; expected {list(self.names)}"
            )
        missing = [p.name for p in self.free if p.name not in values]
        if missing:
            raise ModelError(f"Missing values for parameters {missing}")
        full = tuple(
            float(p.fixed if p.name not in values else values[p.name])
            for p in self.parameters
        )
        return ParameterVector(self, full, allow_boundary)


@dataclass(frozen=True)
class ParameterVector:
    """Flattened parameter vector psi = (theta, sigma) in layout order."""

    layout: ParameterLayout
    values: tuple[float, ...]
    allow_boundary: bool = False

    def __post_init__(self):
        if len(self.values) != len(self.layout.parameters):
            raise ModelError(
                f"Expected {len(self.layout.parameters)} values, got {len(self.values)}"
            )
        for p, v in zip(self.layout.parameters, self.values):
            if not np.isfinite(v):
                raise ModelError(f"Parameter {p.name} is not finite: {v}")
            if p.positive and (v < 0 if self.allow_boundary else v <= 0):
                raise ModelError(f"Parameter {p.name} must be > 0, got {v}")
            if p.fixed is not None and v != p.fixed:
                raise ModelError(
                    f"Parameter {p.name} is fixed to {p.fixed}, got {v}"
                )

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.layout.names, self.values))

    @property
    def theta(self) -> dict[str, float]:
        return {
            p.name: v
            for p, v in zip(self.layout.parameters, self.values)
            if p.kind == "drift"
        }

    @property
    def sigma(self) -> dict[str, float]:
        return {
            p.name: v
            for p, v in zip(self.layout.parameters, self.values)
            if p.kind == "diffusion"
        }

    def free_values(self) -> np.ndarray:
        return np.array(
            [v for p, v in zip(self.layout.parameters, self.values) if p.is_free]
        )

    def with_free(self, free: Sequence[float]) -> "ParameterVector":
        """Return a copy whose free entries are replaced by ``free``."""
        free = list(free)
        if len(free) != len(self.layout.free):
            raise ModelError(
                f"Expected {len(self.layout.free)} free values, got {len(free)}"
            )
        it = iter(free)
        values = tuple(
            float(next(it)) if p.is_free else v
            for p, v in zip(self.layout.parameters, self.values)
        )
        return ParameterVector(self.layout, values)

    def to_unconstrained(self) -> np.ndarray:
        """Free entries mapped to optimizer coordinates (log for positive ones).

        Raises:
            ModelError: If a positive entry sits on the boundary 0
        """
        at_boundary = [p.name for p, v in self._free_items() if p.positive and v <= 0]
        if at_boundary:
            raise ModelError(f"Parameters {at_boundary} are 0 and have no log coordinate")
        return np.array(
            [np.log(v) if p.positive else v for p, v in self._free_items()]
        )

    def from_unconstrained(self, x: Sequence[float]) -> "ParameterVector":
        """Inverse of :meth:`to_unconstrained`, keeping fixed entries."""
        free = [
            float(np.exp(xi)) if p.positive else float(xi)
            for p, xi in zip(self.layout.free, x)
        ]
        return self.with_free(free)

    def _free_items(self):
        return [
            (p, v) for p, v in zip(self.layout.parameters, self.values) if p.is_free
        ]

    def __str__(self) -> str:
        return ", ".join(f"{k}={v:.6g}" for k, v in self.as_dict().items())
