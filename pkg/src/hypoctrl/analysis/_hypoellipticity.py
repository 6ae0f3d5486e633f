"""Hypoellipticity Analysis Module.

Computes how many Euler steps the noise needs to reach every smooth coordinate
and checks that the propagated noise has full rank on the observations.

The drift dependency graph has an edge a -> b when d(drift_b)/d(z_a) is nonzero
at some probe state (central finite differences). For a smooth coordinate l,
m_l is the number of edges of the shortest path from any rough coordinate to l
whose intermediate nodes are all smooth; the contrast lag is m_B = max_l m_l.
With this convention the cyclic feedback system has m_B = 2, the
FitzHugh-Nagumo and synaptic models m_B = 1 and elliptic models m_B = 0.

Functions:
    connexity_lags: Lags m_l and m_B from the Jacobian sparsity pattern.
    h1_rank_check: Min singular value of C (prod A_bar) Gamma along a trajectory.
    verify_lag_finite_difference: First step at which a noise kick reaches a coordinate.
"""

import logging
from collections.abc import Sequence
from dataclasses import asdict, dataclass

import numpy as np
from scipy.sparse.csgraph import shortest_path

from hypoctrl._config import JACOBIAN_THRESHOLD
from hypoctrl.exceptions import ConnexityError, DimensionError
from hypoctrl.models import ModelSpec, ParameterVector
from hypoctrl.simulation import Trajectory

logger = logging.getLogger(__name__)

DEFAULT_PROBES = 50


@dataclass(frozen=True)
class LagReport:
    """Connexity lags of a model.

    Attributes:
        m_l: Lag per smooth coordinate, None when no rough coordinate reaches it.
        m_B: Max of the available m_l (0 for elliptic models).
        edges: Detected drift dependencies (a, b) meaning drift_b depends on z_a.
        h1_min_singular_value: Filled in by callers that ran :func:`h1_rank_check`.
    """

    m_l: tuple[int | None, ...]
    m_B: int
    edges: tuple[tuple[int, int], ...]
    h1_min_singular_value: float | None = None

    @property
    def connected(self) -> bool:
        return all(m is not None for m in self.m_l)

    def to_dict(self) -> dict:
        report = asdict(self)
        report["edges"] = [list(e) for e in self.edges]
        report["connected"] = self.connected
        return report


def _jacobian_fd(model: ModelSpec, psi: ParameterVector, z: np.ndarray, t: float):
    """Central finite-difference Jacobian, jac[b, a] = d drift_b / d z_a."""
    d = model.d
    jac = np.empty((d, d))
    for a in range(d):
        step = 1e-6 * max(1.0, abs(z[a]))
        e = np.zeros(d)
        e[a] = step
        jac[:, a] = (model.f(z + e, t, psi) - model.f(z - e, t, psi)) / (2 * step)
    return jac


def connexity_lags(
    model: ModelSpec,
    psi: ParameterVector,
    probe_states: Sequence[np.ndarray] | None = None,
    t: float = 0.0,
    seed: int = 0,
    strict: bool = True,
) -> LagReport:
    """Compute the connexity lags m_l and the contrast lag m_B.

    Args:
        model: Model to analyse.
        psi: Parameter vector at which the drift is differentiated.
        probe_states: Nonempty list of states; when None, 50 states are drawn
            uniformly in the model probe box with ``seed``.
        t: Time at which the drift is evaluated.
        seed: Seed of the default probe draw.
        strict: Raise when a smooth coordinate is unreachable; otherwise the
            report carries None for it.

    Returns:
        LagReport: Lags and detected edges.

    Raises:
        DimensionError: If probe_states is empty or has the wrong width
        ConnexityError: If strict and a smooth coordinate has no path from noise
    """
    if probe_states is None:
        probe_states = model.sample_states(DEFAULT_PROBES, np.random.default_rng(seed))
    probes = np.atleast_2d(np.asarray(probe_states, dtype=float))
    if probes.size == 0:
        raise DimensionError("connexity_lags needs at least one probe state")
    if probes.shape[1] != model.d:
        raise DimensionError(f"Probe states have width {probes.shape[1]}, expected {model.d}")

    d, d_V = model.d, model.d_V
    adjacency = np.zeros((d, d), dtype=bool)
    for z in probes:
        jac = _jacobian_fd(model, psi, z, t)
        scale = JACOBIAN_THRESHOLD * (1.0 + np.abs(model.f(z, t, psi)))
        # rows are targets b, columns sources a
        adjacency |= (np.abs(jac) > scale[:, None]).T
    np.fill_diagonal(adjacency, False)
    edges = tuple((int(a), int(b)) for a, b in zip(*np.nonzero(adjacency)))

    if d_V == 0:
        return LagReport(m_l=(), m_B=0, edges=edges)

    # only edges entering smooth nodes, so paths from noise stay smooth after the first hop
    graph = adjacency.copy()
    graph[:, d_V:] = False
    distances = shortest_path(
        graph.astype(float),
        directed=True,
        unweighted=True,
        indices=np.arange(d_V, d),
    )
    best = np.atleast_2d(distances)[:, :d_V].min(axis=0)
    m_l = tuple(int(m) if np.isfinite(m) else None for m in best)
    unreachable = [l for l, m in enumerate(m_l) if m is None]
    if unreachable:
        message = (
            f"Model {model.name}: smooth coordinates {unreachable} are not reached "
            f"by any rough coordinate (connexity violated)"
        )
        if strict:
            raise ConnexityError(message, unreachable)
        logger.warning(message)
    m_B = max((m for m in m_l if m is not None), default=0)
    return LagReport(m_l=m_l, m_B=m_B, edges=edges)


def h1_rank_check(
    model: ModelSpec,
    psi: ParameterVector,
    trajectory: Trajectory,
    m_B: int,
) -> float:
    """Minimum singular value of C (A_bar_{i+m_B} ... A_bar_{i+1}) Gamma(Z_i, t_i).

    A_bar_k = I + delta A(Z_k, t_k) is evaluated along the trajectory states;
    values below the H1 threshold mean that the lagged noise does not reach
    every observed coordinate.

    Raises:
        DimensionError: On state width mismatch or a trajectory shorter than m_B + 1
    """
    states, times = trajectory.states, trajectory.times
    if states.shape[1] != model.d:
        raise DimensionError(f"Trajectory width {states.shape[1]} != model dimension {model.d}")
    if states.shape[0] <= m_B:
        raise DimensionError(f"Trajectory of {states.shape[0]} points is too short for m_B={m_B}")

    delta = trajectory.delta
    eye = np.eye(model.d)
    C = model.obs_matrix
    smallest = np.inf
    for i in range(states.shape[0] - m_B):
        P = C
        for l in range(m_B, 0, -1):
            P = P @ (eye + delta * model.A(states[i + l], times[i + l], psi))
        M = P @ model.gamma(states[i], times[i], psi)
        smallest = min(smallest, float(np.linalg.svd(M, compute_uv=False).min()))
    return smallest


def verify_lag_finite_difference(
    model: ModelSpec,
    psi: ParameterVector,
    z0,
    delta: float,
    j: int,
    l: int,
    t0: float = 0.0,
) -> int | None:
    """First Euler step at which a noise kick on rough coordinate U_j reaches coordinate l.

    The deterministic Euler map z -> z + delta f(z, t) is run from ``z0``; the
    kick enters through the rough coordinate U_j of the next state, as the
    noise increment of step 0 does. The returned lag k is the first step such
    that coordinate l of Z_k responds, so a smooth coordinate at connexity lag
    m_l reports m_l + 1. The kicked coordinate itself reports 0.

    Args:
        model: Model to probe.
        psi: Parameter vector.
        z0: Starting state.
        delta: Euler step, > 0.
        j: Rough coordinate index in 0..d_U-1.
        l: Watched coordinate index in the full state 0..d-1.
        t0: Starting time.

    Returns:
        int | None: The lag, or None when nothing is found within d_V + 2 steps.

    Raises:
        ValueError: If delta <= 0 or an index is out of range
    """
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    if not 0 <= j < model.d_U or not 0 <= l < model.d:
        raise ValueError(f"Indices out of range: j={j} (d_U={model.d_U}), l={l} (d={model.d})")
    kicked = model.d_V + j
    if l == kicked:
        return 0

    z = np.asarray(z0, dtype=float)
    z1 = z + delta * model.f(z, t0, psi)
    eps = 1e-6 * max(1.0, abs(z1[kicked]))
    plus, minus = z1.copy(), z1.copy()
    plus[kicked] += eps
    minus[kicked] -= eps
    base = z1.copy()

    for k in range(1, model.d_V + 3):
        sensitivity = (plus[l] - minus[l]) / (2 * eps)
        if abs(sensitivity) > JACOBIAN_THRESHOLD * (1.0 + abs(base[l])):
            return k
        t = t0 + k * delta
        plus = plus + delta * model.f(plus, t, psi)
        minus = minus + delta * model.f(minus, t, psi)
        base = base + delta * model.f(base, t, psi)
    return None
