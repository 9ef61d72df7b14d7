"""Swap-regret forecaster: one low-regret expert per grid point.

Each round, every expert's closed-form prediction is rounded onto the grid,
the resulting two-point columns form a column-stochastic matrix Q, and the
forecast distribution is a fixed point p = Qp.  After the adversary reveals
the label, expert i is charged the loss scaled by its own stationary mass.
Columns have at most two consecutive nonzeros, so the fixed point is found
by warm-started power iteration with a dense linear solve as fallback.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import Grid, PADDED, build_grid
from .rounding import rounding_masses


@dataclass(frozen=True)
class SolverConfig:
    """Stationary-distribution solver knobs.

    power_budget is how many warm-started iterations are attempted per round
    before switching to the dense solve; matrices wider than
    dense_fallback_threshold never switch and instead iterate up to
    max_iterations.
    """

    tolerance: float = 1e-12
    max_iterations: int = 100_000
    dense_fallback_threshold: int = 512
    power_budget: int = 128

    def __post_init__(self) -> None:
        if self.tolerance <= 0.0:
            raise ValueError(f"SolverConfig: tolerance must be positive, {self!r}")
        if self.max_iterations < 1 or self.power_budget < 1:
            raise ValueError(f"SolverConfig: iteration budgets must be >= 1, {self!r}")
        if self.dense_fallback_threshold < 0:
            raise ValueError(f"SolverConfig: bad fallback threshold, {self!r}")


@dataclass(frozen=True)
class ForecasterState:
    """Padded grid plus per-expert sufficient statistics (read-only arrays)."""

    grid: Grid
    gamma: np.ndarray
    delta: np.ndarray
    config: SolverConfig
    # previous round's fixed point, used to warm start the next solve
    warm_start: np.ndarray | None = None


@dataclass(frozen=True)
class RoundDistribution:
    """A forecast distribution plus the columns that produced it.

    masses is the stationary fixed point of the column mixture; the three
    column arrays record each expert's two-point rounding (upper index is
    lower + 1), which is enough to re-verify the fixed point later.
    """

    masses: np.ndarray
    column_lower: np.ndarray
    column_lower_mass: np.ndarray
    column_upper_mass: np.ndarray
    solver: str
    residual: float

    def fixed_point_residual(self) -> float:
        """Recompute ||Q p - p||_1 from the stored provenance."""
        mixed = _apply_columns(
            self.column_lower, self.column_lower_mass, self.column_upper_mass,
            self.masses,
        )
        return float(np.abs(mixed - self.masses).sum())


def init_forecaster(K: int, config: SolverConfig | None = None) -> ForecasterState:
    """Fresh state on the padded grid of resolution K >= 2.

    All experts start with empty histories, so every first-step column equals
    the rounding of 0.5.
    """
    if K < 2:
        raise ValueError(f"init_forecaster: K must be at least 2, got {K!r}")
    grid = build_grid(K, PADDED)
    n = len(grid)
    gamma = np.zeros(n)
    delta = np.zeros(n)
    gamma.setflags(write=False)
    delta.setflags(write=False)
    return ForecasterState(
        grid=grid, gamma=gamma, delta=delta,
        config=config if config is not None else SolverConfig(),
    )


def expert_predictions(state: ForecasterState) -> np.ndarray:
    """Closed-form predictions of all experts, each in (0,1)."""
    return (state.gamma + 1.0) / (state.gamma + state.delta + 2.0)


def step_distribution(state: ForecasterState) -> RoundDistribution:
    """Build the round's column matrix and return a verified fixed point."""
    lower, lower_mass, upper_mass = rounding_masses(
        state.grid, expert_predictions(state)
    )
    start = state.warm_start
    masses, solver, residual = _stationary_two_point(
        lower, lower_mass, upper_mass, len(state.grid), state.config, start
    )
    return RoundDistribution(
        masses=masses,
        column_lower=lower,
        column_lower_mass=lower_mass,
        column_upper_mass=upper_mass,
        solver=solver,
        residual=residual,
    )


def forecaster_update(
    state: ForecasterState, realized: RoundDistribution, y: int
) -> ForecasterState:
    """Charge every expert the label y with weight equal to its mass."""
    if y not in (0, 1):
        raise ValueError(f"forecaster_update: binary label expected, got {y!r}")
    if len(realized.masses) != len(state.grid):
        raise ValueError("forecaster_update: distribution does not match the grid")
    if y == 1:
        gamma, delta = state.gamma + realized.masses, state.delta
    else:
        gamma, delta = state.gamma, state.delta + realized.masses
    gamma = np.asarray(gamma)
    delta = np.asarray(delta)
    gamma.setflags(write=False)
    delta.setflags(write=False)
    return replace(
        state, gamma=gamma, delta=delta, warm_start=realized.masses
    )


def stationary_distribution(
    columns: np.ndarray,
    tolerance: float = 1e-12,
    max_iterations: int = 100_000,
    dense_fallback: bool = True,
    start: np.ndarray | None = None,
) -> np.ndarray:
    """Fixed point p = Qp of a column-stochastic matrix Q.

    Power iteration from the uniform vector (or the given start); any fixed
    point is acceptable, so an identity matrix simply returns the start
    vector.  Falls back to a dense least-squares solve when iteration stalls.
    """
    Q = np.asarray(columns, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError(f"stationary_distribution: square matrix expected, {Q.shape}")
    if np.any(Q < 0.0) or np.any(np.abs(Q.sum(axis=0) - 1.0) > 1e-9):
        raise ValueError("stationary_distribution: columns must be stochastic")
    if max_iterations < 1:
        raise ValueError("stationary_distribution: max_iterations must be >= 1")
    n = Q.shape[0]
    p = np.full(n, 1.0 / n) if start is None else np.asarray(start, dtype=float)
    for _ in range(max_iterations):
        mixed = Q @ p
        residual = float(np.abs(mixed - p).sum())
        if residual <= tolerance:
            return p
        p = mixed
    if dense_fallback:
        p = _dense_fixed_point(Q)
        residual = float(np.abs(Q @ p - p).sum())
        if residual <= tolerance:
            return p
    raise ArithmeticError(
        f"stationary_distribution: no fixed point within tolerance {tolerance} "
        f"after {max_iterations} iterations (last residual {residual:.3e})"
    )


def sample_index(masses: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw of a grid index from a forecast distribution."""
    cdf = np.cumsum(masses)
    u = rng.random()
    return min(int(np.searchsorted(cdf, u, side="right")), len(masses) - 1)


# ---------------------------------------------------------------------------
# internals shared with the harness hot loop


def _apply_columns(
    lower: np.ndarray, lower_mass: np.ndarray, upper_mass: np.ndarray, p: np.ndarray
) -> np.ndarray:
    """Q p for the sparse two-point column representation."""
    n = len(p)
    mixed = np.bincount(lower, weights=lower_mass * p, minlength=n)
    mixed += np.bincount(lower + 1, weights=upper_mass * p, minlength=n)
    return mixed


def _stationary_two_point(
    lower: np.ndarray,
    lower_mass: np.ndarray,
    upper_mass: np.ndarray,
    n: int,
    config: SolverConfig,
    start: np.ndarray | None,
) -> tuple[np.ndarray, str, float]:
    """Fixed point for two-point columns; returns (p, solver tag, residual)."""
    p = np.full(n, 1.0 / n) if start is None else start
    dense_ok = n <= config.dense_fallback_threshold
    budget = config.power_budget if dense_ok else config.max_iterations
    iterations = 0
    solver = "start"
    while True:
        mixed = _apply_columns(lower, lower_mass, upper_mass, p)
        residual = float(np.abs(mixed - p).sum())
        if residual <= config.tolerance:
            p = p.copy()
            p.setflags(write=False)
            return p, solver, residual
        if iterations >= budget:
            break
        p = mixed
        iterations += 1
        solver = "power"
    if dense_ok:
        Q = np.zeros((n, n))
        cols = np.arange(n)
        Q[lower, cols] = lower_mass
        Q[lower + 1, cols] += upper_mass
        p = _dense_fixed_point(Q)
        residual = float(np.abs(_apply_columns(lower, lower_mass, upper_mass, p) - p).sum())
        if residual <= config.tolerance:
            p.setflags(write=False)
            return p, "dense", residual
    raise ArithmeticError(
        f"stationary solve failed: residual {residual:.3e} above tolerance "
        f"{config.tolerance} (n={n}, dense_fallback={'on' if dense_ok else 'off'})"
    )


def _dense_fixed_point(Q: np.ndarray) -> np.ndarray:
    """Least-squares solve of (Q - I) p = 0 with the simplex normalization."""
    n = Q.shape[0]
    system = np.vstack([Q - np.eye(n), np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    p, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    p = np.clip(p, 0.0, None)
    total = p.sum()
    if total <= 0.0:
        raise ArithmeticError("dense stationary solve produced a zero vector")
    return p / total
