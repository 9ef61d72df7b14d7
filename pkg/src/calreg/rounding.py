"""Randomized rounding of probabilities onto a padded grid, for log loss.

The two-point scheme weights the bracket endpoints by
(distance to p) / (z(1-z)); that particular tilt makes the expected
log-loss increase equal for both labels and O(1/K^2), where nearest-point
or linearly interpolated rounding incurs a constant overhead near the
boundary.  The failing baselines are kept for comparison experiments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Grid, bracket, nearest_index


@dataclass(frozen=True)
class TwoPointDistribution:
    """Probability masses on a consecutive pair of grid indices."""

    lower_index: int
    upper_index: int
    lower_mass: float
    upper_mass: float

    def __post_init__(self) -> None:
        if self.upper_index != self.lower_index + 1:
            raise ValueError(
                "TwoPointDistribution: support must be a consecutive pair, "
                f"got ({self.lower_index}, {self.upper_index})"
            )
        if self.lower_mass < 0.0 or self.upper_mass < 0.0:
            raise ValueError("TwoPointDistribution: masses must be nonnegative")
        if abs(self.lower_mass + self.upper_mass - 1.0) > 1e-15:
            raise ValueError("TwoPointDistribution: masses must sum to 1")


def rounding_distribution(grid: Grid, p: float) -> TwoPointDistribution:
    """Round p onto its bracket with the variance-tilted two-point law.

    p is clamped to the grid range first (expert predictions can land
    slightly outside it; the clamp moves p by at most z_0 = O(1/K^2)).
    An exact grid hit gets the whole mass.
    """
    lo, lower_mass, upper_mass = rounding_masses(grid, np.asarray([p], dtype=float))
    i = int(lo[0])
    return TwoPointDistribution(i, i + 1, float(lower_mass[0]), float(upper_mass[0]))


def rounding_masses(
    grid: Grid, p: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized rounding: arrays (lower_index, lower_mass, upper_mass).

    Upper indices are lower + 1.  rounding_distribution delegates here so
    the scalar and batched paths cannot drift apart.
    """
    pts = grid.points
    den = pts * (1.0 - pts)
    p = np.clip(p, pts[0], pts[-1])
    lo = np.searchsorted(pts, p, side="right") - 1
    np.clip(lo, 0, len(pts) - 2, out=lo)
    w_lower = (pts[lo + 1] - p) / den[lo + 1]
    w_upper = (p - pts[lo]) / den[lo]
    total = w_lower + w_upper
    return lo, w_lower / total, w_upper / total


def overhead_bound(grid: Grid, p: float) -> float:
    """Certified bound on E[loss(q, y)] - loss(p, y), any label.

    Equals E[p/q] - 1 and E[(1-p)/(1-q)] - 1, which coincide for this
    rounding scheme:
        (p+ - p)(p - p-) / (p + p- p+ - p (p- + p+)).
    """
    pts = grid.points
    if not pts[0] <= p <= pts[-1]:
        raise ValueError(f"overhead_bound: p={p!r} outside the grid range")
    i, j = bracket(grid, p)
    lo, hi = pts[i], pts[j]
    return (hi - p) * (p - lo) / (p + lo * hi - p * (lo + hi))


def actual_overhead(grid: Grid, p: float, y: int) -> float:
    """Exact expected log-loss change from rounding p; can be negative."""
    if y not in (0, 1):
        raise ValueError(f"actual_overhead: binary label expected, got {y!r}")
    pts = grid.points
    if not pts[0] <= p <= pts[-1]:
        raise ValueError(f"actual_overhead: p={p!r} outside the grid range")
    dist = rounding_distribution(grid, p)
    lo, hi = pts[dist.lower_index], pts[dist.upper_index]
    if y == 1:
        expected = -dist.lower_mass * math.log(lo) - dist.upper_mass * math.log(hi)
        return expected + math.log(p)
    expected = -dist.lower_mass * math.log(1.0 - lo) - dist.upper_mass * math.log(
        1.0 - hi
    )
    return expected + math.log(1.0 - p)


def baseline_nearest(grid: Grid, p: float) -> TwoPointDistribution:
    """Deterministic rounding to the nearest grid point (lower tie-break)."""
    j = nearest_index(grid, min(max(p, grid.points[0]), grid.points[-1]))
    if j < len(grid.points) - 1:
        return TwoPointDistribution(j, j + 1, 1.0, 0.0)
    return TwoPointDistribution(j - 1, j, 0.0, 1.0)


def baseline_linear(grid: Grid, p: float) -> TwoPointDistribution:
    """Distance-proportional interpolation between the bracket endpoints."""
    pts = grid.points
    p = min(max(p, pts[0]), pts[-1])
    i, j = bracket(grid, p)
    gap = pts[j] - pts[i]
    return TwoPointDistribution(i, j, (pts[j] - p) / gap, (p - pts[i]) / gap)


def expected_overhead(grid: Grid, dist: TwoPointDistribution, p: float, y: int) -> float:
    """E[loss(q, y)] - loss(p, y) under an arbitrary two-point rounding.

    Used to measure the baselines on the same footing as actual_overhead.
    """
    lo, hi = grid.points[dist.lower_index], grid.points[dist.upper_index]
    if y == 1:
        expected = -dist.lower_mass * math.log(lo) - dist.upper_mass * math.log(hi)
        return expected + math.log(p)
    expected = -dist.lower_mass * math.log(1.0 - lo) - dist.upper_mass * math.log(
        1.0 - hi
    )
    return expected + math.log(1.0 - p)
