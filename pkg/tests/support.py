"""Shared helpers for the test suite: regret evaluation on random scaled
log-loss sequences and random transcript generation."""
import math

import numpy as np

from calreg.ewoo import EwooState, ewoo_predict, ewoo_update
from calreg.grid import PADDED, build_grid
from calreg.metrics import Transcript

REGRET_SWEEP_POINTS = 10_000


def ewoo_regret(rng: np.random.Generator, T: int) -> float:
    """Realized regret of one expert on a random (weight, label) sequence.

    The comparator is the best fixed prediction over an interior sweep,
    which upper-bounds the continuum infimum, so the regret value returned
    here can only overstate the bound being tested.
    """
    state = EwooState()
    realized = 0.0
    for _ in range(T):
        weight = float(rng.random())
        y = int(rng.random() < 0.5)
        pred = ewoo_predict(state)
        realized += weight * (-math.log(pred) if y else -math.log(1.0 - pred))
        state = ewoo_update(state, weight, y)
    sweep = np.linspace(0.0, 1.0, REGRET_SWEEP_POINTS + 2)[1:-1]
    totals = -state.gamma * np.log(sweep) - state.delta * np.log(1.0 - sweep)
    return realized - float(totals.min())


def random_transcript(
    rng: np.random.Generator,
    max_points: int = 8,
    max_rounds: int = 50,
    one_hot: bool = False,
) -> Transcript:
    """A transcript over random interior points with random distributions."""
    n = int(rng.integers(1, max_points + 1))
    points = np.sort(rng.uniform(0.02, 0.98, size=n))
    while len(np.unique(points)) < n or np.any(np.diff(points) < 1e-3):
        points = np.sort(rng.uniform(0.02, 0.98, size=n))
    T = int(rng.integers(1, max_rounds + 1))
    if one_hot:
        dists = np.zeros((T, n))
        dists[np.arange(T), rng.integers(0, n, size=T)] = 1.0
    else:
        dists = rng.random((T, n)) + 1e-3
        dists /= dists.sum(axis=1, keepdims=True)
    indices = np.array([rng.choice(n, p=row) for row in dists])
    labels = rng.integers(0, 2, size=T)
    return Transcript(points, dists, indices, labels)


def padded_grid_transcript(
    rng: np.random.Generator, K: int, T: int
) -> Transcript:
    """Random-play transcript on a padded grid (for quantization-gap tests)."""
    grid = build_grid(K, PADDED)
    n = len(grid)
    dists = rng.random((T, n)) + 1e-3
    dists /= dists.sum(axis=1, keepdims=True)
    indices = np.array([rng.choice(n, p=row) for row in dists])
    labels = rng.integers(0, 2, size=T)
    return Transcript(grid.points, dists, indices, labels, K=K, variant=PADDED)
