"""Calibration and regret metrics computed from run transcripts.

A transcript stores, for every round, the forecast distribution over grid
values, the sampled grid index, and the adversary's label.  Realized metrics
bucket rounds by the sampled value; pseudo metrics weight each round's whole
distribution instead, which removes the sampling noise.

Swap regret admits a per-bucket closed form (the Bregman divergence between
the bucket's label mean and its grid value); brute-force evaluators over
candidate target sets, plus a literal enumerator over swap functions, act as
oracles for it.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .losses import LossSpec, bregman, kl_bernoulli, loss_value

_P_SUM_TOL = 1e-10


@dataclass(frozen=True)
class Transcript:
    """Immutable record of one run.

    points: grid values, increasing, interior to (0,1).
    distributions: (T, n) array, row t = forecast distribution P_t.
    sampled_indices: (T,) int array of realized grid indices.
    labels: (T,) array of 0/1 outcomes.
    K, variant: grid metadata when the points came from a sin^2 grid.
    """

    points: np.ndarray
    distributions: np.ndarray
    sampled_indices: np.ndarray
    labels: np.ndarray
    K: int | None = None
    variant: str = "custom"

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        dist = np.asarray(self.distributions, dtype=float)
        idx = np.asarray(self.sampled_indices)
        y = np.asarray(self.labels)
        if pts.ndim != 1 or np.any(pts <= 0.0) or np.any(pts >= 1.0):
            raise ValueError("Transcript: points must be interior probabilities")
        if np.any(np.diff(pts) <= 0.0):
            raise ValueError("Transcript: points must be strictly increasing")
        if dist.ndim != 2 or dist.shape[1] != len(pts):
            raise ValueError("Transcript: distributions must be (T, n)")
        if len(idx) != len(dist) or len(y) != len(dist):
            raise ValueError("Transcript: per-round arrays disagree on T")
        if np.any(dist < 0.0) or np.any(np.abs(dist.sum(axis=1) - 1.0) > _P_SUM_TOL):
            raise ValueError("Transcript: each P_t must be a distribution")
        if len(idx) and (idx.min() < 0 or idx.max() >= len(pts)):
            raise ValueError("Transcript: sampled index out of range")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("Transcript: labels must be 0/1")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "distributions", dist)
        object.__setattr__(self, "sampled_indices", idx.astype(np.int64))
        object.__setattr__(self, "labels", y.astype(np.int64))

    @property
    def horizon(self) -> int:
        return len(self.labels)


def transcript_from_predictions(
    points: np.ndarray,
    sampled_indices: np.ndarray,
    labels: np.ndarray,
    K: int | None = None,
    variant: str = "custom",
) -> Transcript:
    """Build a transcript with one-hot distributions (deterministic forecasts)."""
    idx = np.asarray(sampled_indices, dtype=np.int64)
    dist = np.zeros((len(idx), len(points)))
    dist[np.arange(len(idx)), idx] = 1.0
    return Transcript(points, dist, idx, np.asarray(labels), K=K, variant=variant)


@dataclass(frozen=True)
class MetricReport:
    """All scalar metrics of one run, keyed per loss where applicable."""

    cal_1: float
    cal_2: float
    klcal: float
    pcal_1: float
    pcal_2: float
    pklcal: float
    swap_regret: dict[str, float] = field(default_factory=dict)
    pseudo_swap_regret: dict[str, float] = field(default_factory=dict)
    external_regret: dict[str, float] = field(default_factory=dict)
    hp_margin: float = float("nan")
    hp_delta: float = 0.1

    def to_dict(self) -> dict:
        return {
            "cal_1": self.cal_1,
            "cal_2": self.cal_2,
            "klcal": self.klcal,
            "pcal_1": self.pcal_1,
            "pcal_2": self.pcal_2,
            "pklcal": self.pklcal,
            "swap_regret": dict(self.swap_regret),
            "pseudo_swap_regret": dict(self.pseudo_swap_regret),
            "external_regret": dict(self.external_regret),
            "hp_margin": self.hp_margin,
            "hp_delta": self.hp_delta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetricReport":
        return cls(**data)

    def scalar_items(self) -> list[tuple[str, float]]:
        """Flat (metric name, value) pairs for tabular emission."""
        items = [
            ("cal_1", self.cal_1),
            ("cal_2", self.cal_2),
            ("klcal", self.klcal),
            ("pcal_1", self.pcal_1),
            ("pcal_2", self.pcal_2),
            ("pklcal", self.pklcal),
        ]
        items += [(f"swap_regret.{k}", v) for k, v in self.swap_regret.items()]
        items += [
            (f"pseudo_swap_regret.{k}", v) for k, v in self.pseudo_swap_regret.items()
        ]
        items += [(f"external_regret.{k}", v) for k, v in self.external_regret.items()]
        items.append(("hp_margin", self.hp_margin))
        return items


# ---------------------------------------------------------------------------
# bucket statistics


def bucket_counts(t: Transcript) -> tuple[np.ndarray, np.ndarray]:
    """Realized bucket sizes n_p and label means rho_p (0 where empty)."""
    n = np.bincount(t.sampled_indices, minlength=len(t.points)).astype(float)
    ones = np.bincount(
        t.sampled_indices, weights=t.labels.astype(float), minlength=len(t.points)
    )
    rho = np.divide(ones, n, out=np.zeros_like(n), where=n > 0)
    return n, rho


def pseudo_bucket_masses(t: Transcript) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative forecast masses W_p and pseudo label means rho~_p."""
    W = t.distributions.sum(axis=0)
    ones = t.labels.astype(float) @ t.distributions
    rho = np.divide(ones, W, out=np.zeros_like(W), where=W > 0)
    return W, rho


def _kl_terms(q: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Vectorized Bernoulli KL with one-sided endpoint terms; p interior."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    t1 = np.where(q > 0.0, q * (np.log(np.where(q > 0.0, q, 1.0)) - np.log(p)), 0.0)
    t2 = np.where(
        q < 1.0,
        (1.0 - q) * (np.log(np.where(q < 1.0, 1.0 - q, 1.0)) - np.log1p(-p)),
        0.0,
    )
    return t1 + t2


# ---------------------------------------------------------------------------
# calibration metrics


def cal_q(t: Transcript, q: float) -> float:
    """Realized q-th power calibration error, empty buckets contributing 0."""
    if q < 1.0:
        raise ValueError(f"cal_q: exponent must be >= 1, got {q!r}")
    n, rho = bucket_counts(t)
    occ = n > 0
    return float(np.sum(n[occ] * np.abs(t.points[occ] - rho[occ]) ** q))


def pcal_q(t: Transcript, q: float) -> float:
    """Pseudo q-th power calibration error using cumulative forecast masses."""
    if q < 1.0:
        raise ValueError(f"pcal_q: exponent must be >= 1, got {q!r}")
    W, rho = pseudo_bucket_masses(t)
    occ = W > 0
    return float(np.sum(W[occ] * np.abs(t.points[occ] - rho[occ]) ** q))


def klcal(t: Transcript) -> float:
    """Realized KL calibration error sum_p n_p KL(rho_p, p)."""
    n, rho = bucket_counts(t)
    occ = n > 0
    return float(np.sum(n[occ] * _kl_terms(rho[occ], t.points[occ])))


def pklcal(t: Transcript) -> float:
    """Pseudo KL calibration error sum_p W_p KL(rho~_p, p)."""
    W, rho = pseudo_bucket_masses(t)
    occ = W > 0
    return float(np.sum(W[occ] * _kl_terms(rho[occ], t.points[occ])))


# ---------------------------------------------------------------------------
# swap and external regret


def swap_regret_closed_form(t: Transcript, loss: LossSpec, pseudo: bool = False) -> float:
    """Per-bucket Bregman sum; the exact value of the swap-function supremum."""
    if pseudo:
        weight, rho = pseudo_bucket_masses(t)
    else:
        weight, rho = bucket_counts(t)
    total = 0.0
    for w, r, z in zip(weight, rho, t.points):
        if w > 0.0:
            total += w * bregman(loss, float(r), float(z))
    return float(total)


def _bucket_loss_total(loss: LossSpec, v: float, n_ones: float, n_zeros: float) -> float:
    """Total loss of predicting v against a bucket's label counts.

    Zero-count labels contribute nothing even when the pointwise loss at v
    would be infinite (the 0 * inf = 0 convention).
    """
    total = 0.0
    if n_ones > 0.0:
        total += n_ones * loss_value(loss, v, 1)
    if n_zeros > 0.0:
        total += n_zeros * loss_value(loss, v, 0)
    return total


def swap_regret_bruteforce(
    t: Transcript, loss: LossSpec, candidate_targets: np.ndarray
) -> float:
    """sum_p max over candidates v of (bucket loss at p - bucket loss at v).

    With candidates = {rho_p} this equals the closed form; with candidates =
    the grid it is the grid-restricted swap regret.
    """
    n, rho = bucket_counts(t)
    total = 0.0
    for w, r, z in zip(n, rho, t.points):
        if w == 0.0:
            continue
        ones, zeros = w * r, w * (1.0 - r)
        realized = _bucket_loss_total(loss, float(z), ones, zeros)
        best_gain = -math.inf
        for v in np.atleast_1d(candidate_targets):
            try:
                alt = _bucket_loss_total(loss, float(v), ones, zeros)
            except ValueError:
                continue  # infinite loss at this candidate; never optimal
            best_gain = max(best_gain, realized - alt)
        total += best_gain
    return float(total)


def swap_regret_enumeration(
    t: Transcript, loss: LossSpec, candidate_targets: np.ndarray
) -> float:
    """Literal maximization over all swap functions sigma: buckets -> candidates.

    Exponential in the number of occupied buckets; intended as a tiny-scale
    oracle for the decomposed evaluators.
    """
    n, rho = bucket_counts(t)
    occupied = [
        (float(w * r), float(w * (1.0 - r)), float(z))
        for w, r, z in zip(n, rho, t.points)
        if w > 0.0
    ]
    candidates = [float(v) for v in np.atleast_1d(candidate_targets)]
    realized = [
        _bucket_loss_total(loss, z, ones, zeros) for ones, zeros, z in occupied
    ]
    best = -math.inf
    for sigma in itertools.product(candidates, repeat=len(occupied)):
        total = 0.0
        for (ones, zeros, _), base, v in zip(occupied, realized, sigma):
            try:
                total += base - _bucket_loss_total(loss, v, ones, zeros)
            except ValueError:
                total = -math.inf
                break
        best = max(best, total)
    return float(best)


def external_regret(
    t: Transcript, loss: LossSpec, candidates: np.ndarray | None = None
) -> float:
    """Realized loss minus the best fixed prediction from a candidate set.

    The default candidate set is the grid joined with a 1001-point interior
    sweep, which approximates the continuum comparator from above.
    """
    if candidates is None:
        sweep = np.linspace(0.0, 1.0, 1001)[1:-1]
        candidates = np.union1d(t.points, sweep)
    n, rho = bucket_counts(t)
    ones_total = float(np.sum(n * rho))
    zeros_total = float(np.sum(n)) - ones_total
    realized = 0.0
    for w, r, z in zip(n, rho, t.points):
        if w > 0.0:
            realized += _bucket_loss_total(loss, float(z), w * r, w * (1.0 - r))
    best = math.inf
    for v in np.atleast_1d(candidates):
        try:
            best = min(best, _bucket_loss_total(loss, float(v), ones_total, zeros_total))
        except ValueError:
            continue
    return float(realized - best)


def hp_margin(t: Transcript, delta: float) -> float:
    """Slack in the high-probability bound cal_2 <= 6 pcal_2 + 96|Z| ln(4|Z|/delta).

    Nonnegative means the bound held for this run.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"hp_margin: delta must be in (0,1), got {delta!r}")
    size = len(t.points)
    return 6.0 * pcal_q(t, 2) + 96.0 * size * math.log(4.0 * size / delta) - cal_q(t, 2)


def realized_loss_values(t: Transcript, loss: LossSpec) -> np.ndarray:
    """Pointwise losses of the sampled predictions, one per round."""
    z = t.points[t.sampled_indices]
    return np.array(
        [loss_value(loss, float(p), int(y)) for p, y in zip(z, t.labels)]
    )


def compute_report(
    t: Transcript, losses: list[LossSpec], hp_delta: float = 0.1
) -> MetricReport:
    """Evaluate the full metric suite for the given losses."""
    return MetricReport(
        cal_1=cal_q(t, 1),
        cal_2=cal_q(t, 2),
        klcal=klcal(t),
        pcal_1=pcal_q(t, 1),
        pcal_2=pcal_q(t, 2),
        pklcal=pklcal(t),
        swap_regret={l.name: swap_regret_closed_form(t, l) for l in losses},
        pseudo_swap_regret={
            l.name: swap_regret_closed_form(t, l, pseudo=True) for l in losses
        },
        external_regret={l.name: external_regret(t, l) for l in losses},
        hp_margin=hp_margin(t, hp_delta),
        hp_delta=hp_delta,
    )


# ---------------------------------------------------------------------------
# serialization


def save_transcript(t: Transcript, path: str | Path) -> None:
    """JSON-lines: a grid header, then one {"t", "P", "i", "y"} line per round."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        header = {
            "K": t.K,
            "variant": t.variant,
            "points": [float(p) for p in t.points],
        }
        fh.write(json.dumps(header) + "\n")
        for i in range(t.horizon):
            row = {
                "t": i,
                "P": [float(v) for v in t.distributions[i]],
                "i": int(t.sampled_indices[i]),
                "y": int(t.labels[i]),
            }
            fh.write(json.dumps(row) + "\n")


def load_transcript(path: str | Path) -> Transcript:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        dists, idx, labels = [], [], []
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            dists.append(row["P"])
            idx.append(row["i"])
            labels.append(row["y"])
    points = np.asarray(header["points"], dtype=float)
    return Transcript(
        points=points,
        distributions=np.asarray(dists, dtype=float).reshape(len(idx), len(points)),
        sampled_indices=np.asarray(idx, dtype=np.int64),
        labels=np.asarray(labels, dtype=np.int64),
        K=header.get("K"),
        variant=header.get("variant", "custom"),
    )
