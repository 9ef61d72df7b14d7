"""Non-uniform prediction grids clustered near the boundary.

Interior grids hold z_i = sin^2(pi*i/2K) for i = 1..K-1; padded grids add
the endpoints z_0 = sin^2(pi/4K) and z_K = cos^2(pi/4K).  The sin^2 spacing
makes the squared gap between neighbours comparable to z(1-z), which is what
keeps randomized-rounding overhead and KL quantization error at O(1/K^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INTERIOR = "interior"
PADDED = "padded"


@dataclass(frozen=True)
class Grid:
    """An increasing array of interior grid points in (0, 1).

    K is the resolution parameter; points has K-1 entries for the interior
    variant and K+1 for the padded variant.
    """

    K: int
    variant: str
    points: np.ndarray

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.points)

    def __len__(self) -> int:
        return len(self.points)


def build_grid(K: int, variant: str = PADDED) -> Grid:
    """Construct the sin^2 grid at resolution K (K >= 2).

    The upper half is mirrored from the lower half so that the symmetry
    z_i + z_{K-i} = 1 holds exactly in floating point.
    """
    if K < 2:
        raise ValueError(f"build_grid: K must be at least 2, got {K!r}")
    if variant not in (INTERIOR, PADDED):
        raise ValueError(f"build_grid: unknown variant {variant!r}")
    # z_i = sin^2(pi i / 2K) for the lower half, mirrored upward
    z = np.empty(K + 1)
    half = K // 2
    i = np.arange(0, half + 1)
    z[: half + 1] = np.sin(np.pi * i / (2.0 * K)) ** 2
    z[K - half :] = 1.0 - z[half::-1]
    if K % 2 == 0:
        z[half] = 0.5
    if variant == INTERIOR:
        pts = z[1:K].copy()
    else:
        pad = math.sin(math.pi / (4.0 * K)) ** 2
        pts = z.copy()
        pts[0] = pad
        pts[K] = 1.0 - pad
    pts.setflags(write=False)
    return Grid(K=K, variant=variant, points=pts)


def default_K(T: int) -> int:
    """Resolution matched to a horizon: max(2, round((T / ln T)^(1/3)))."""
    if T < 2:
        raise ValueError(f"default_K: horizon must be at least 2, got {T!r}")
    return max(2, round((T / math.log(T)) ** (1.0 / 3.0)))


def nearest_index(grid: Grid, p: float) -> int:
    """Index of the grid point closest to p; ties break to the lower index."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"nearest_index: probability expected, got {p!r}")
    pts = grid.points
    j = int(np.searchsorted(pts, p))
    if j == 0:
        return 0
    if j == len(pts):
        return len(pts) - 1
    # tie goes to the lower index, hence strict inequality for the upper win
    return j if pts[j] - p < p - pts[j - 1] else j - 1


def bracket(grid: Grid, p: float) -> tuple[int, int]:
    """Consecutive indices (i, i+1) with points[i] <= p < points[i+1].

    The top end maps to the last pair, so p equal to the largest point
    returns (n-2, n-1).  p outside the covered range is a range error.
    """
    pts = grid.points
    if len(pts) < 2:
        raise ValueError("bracket: grid has fewer than two points")
    if not pts[0] <= p <= pts[-1]:
        raise ValueError(
            f"bracket: p={p!r} outside the grid range [{pts[0]}, {pts[-1]}]"
        )
    i = int(np.searchsorted(pts, p, side="right")) - 1
    i = min(max(i, 0), len(pts) - 2)
    return i, i + 1


def max_grid_kl_gap(grid: Grid, resolution: int = 10_000) -> float:
    """Worst-case KL distance from any probability to its best grid point.

    Sweeps rho over [0, 1] (inclusive; the endpoint KL is one-sided and
    finite for interior grid points) and reports
    max_rho min_z KL(rho, z).
    """
    if resolution < 2:
        raise ValueError(f"max_grid_kl_gap: resolution too small, {resolution!r}")
    rho = np.linspace(0.0, 1.0, resolution)
    best = np.full(resolution, np.inf)
    for z in grid.points:
        best = np.minimum(best, _kl_vec(rho, z))
    return float(best.max())


def _kl_vec(q: np.ndarray, p: float) -> np.ndarray:
    """Vectorized Bernoulli KL with the 0*ln 0 = 0 convention; p interior."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(q > 0.0, q * (np.log(np.where(q > 0.0, q, 1.0)) - math.log(p)), 0.0)
        t2 = np.where(
            q < 1.0,
            (1.0 - q) * (np.log(np.where(q < 1.0, 1.0 - q, 1.0)) - math.log(1.0 - p)),
            0.0,
        )
    return t1 + t2


def boundary_gap_ratio(grid: Grid) -> float:
    """Worst squared endpoint gap over z(1-z) at the padded boundary.

    These are the four gap/point combinations involving the padded
    endpoints; each is certified to be at most pi^2/K^2 (the sharper
    analytic caps are 4 sin^2(pi/2K) and tan^2(pi/2K)).
    """
    if grid.variant != PADDED:
        raise ValueError("boundary_gap_ratio: padded grids only")
    z = grid.points
    d = grid.gaps
    den = z * (1.0 - z)
    ratios = (
        d[0] ** 2 / den[0],
        d[0] ** 2 / den[1],
        d[-1] ** 2 / den[-2],
        d[-1] ** 2 / den[-1],
    )
    return float(max(ratios))


def worst_gap_ratio(grid: Grid) -> float:
    """max over points of (largest adjacent gap)^2 / (z(1-z)).

    Approaches (9 pi^2 / 4) / K^2 from below on padded grids; this is the
    two-sided quantity that shows up in the bucket-deviation analysis.
    """
    z = grid.points
    d = grid.gaps
    if len(d) == 0:
        return 0.0
    adj = np.zeros(len(z))
    adj[:-1] = d
    adj[1:] = np.maximum(adj[1:], d)
    return float(np.max(adj**2 / (z * (1.0 - z))))
