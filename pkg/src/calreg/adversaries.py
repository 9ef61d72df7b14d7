"""Label-generating opponents and the mean-revealing baseline forecaster.

Oblivious adversaries draw their whole label stream up front from their own
seeded generator, so the stream cannot depend on the forecaster; the adaptive
kind sees the current forecast distribution but not the sampled value, which
preserves the simultaneous-move protocol.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import Grid, nearest_index

FIXED_SEQUENCE = "fixed_sequence"
IID_BERNOULLI = "iid_bernoulli"
PIECEWISE_DRIFT = "piecewise_drift"
ADAPTIVE_ANTIMODE = "adaptive_antimode"
FROM_FILE = "from_file"

_KINDS = (FIXED_SEQUENCE, IID_BERNOULLI, PIECEWISE_DRIFT, ADAPTIVE_ANTIMODE, FROM_FILE)

DRIFT_DEFAULT_MEANS = (0.2, 0.8, 0.35)
DRIFT_DEFAULT_BREAKPOINTS = (1.0 / 3.0, 2.0 / 3.0)


@dataclass(frozen=True)
class AdversarySpec:
    """Declarative description of an opponent; runtime state lives elsewhere.

    seed overrides the stream the harness would otherwise derive from the run
    seed, so oblivious invariance across forecaster configs is testable.
    """

    kind: str
    labels: tuple[int, ...] | None = None
    mean: float | None = None
    means: tuple[float, ...] = DRIFT_DEFAULT_MEANS
    breakpoints: tuple[float, ...] = DRIFT_DEFAULT_BREAKPOINTS
    path: str | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"AdversarySpec: unknown kind {self.kind!r}")
        if self.kind == FIXED_SEQUENCE:
            if self.labels is None or any(y not in (0, 1) for y in self.labels):
                raise ValueError("AdversarySpec: fixed_sequence needs 0/1 labels")
        if self.kind == IID_BERNOULLI:
            if self.mean is None or not 0.0 <= self.mean <= 1.0:
                raise ValueError("AdversarySpec: iid mean must lie in [0,1]")
        if self.kind == PIECEWISE_DRIFT:
            if len(self.means) != len(self.breakpoints) + 1:
                raise ValueError("AdversarySpec: need one more mean than breakpoint")
            if any(not 0.0 <= m <= 1.0 for m in self.means):
                raise ValueError("AdversarySpec: drift means must lie in [0,1]")
            bps = self.breakpoints
            if any(not 0.0 < b < 1.0 for b in bps) or any(
                b2 <= b1 for b1, b2 in zip(bps, bps[1:])
            ):
                raise ValueError(
                    "AdversarySpec: breakpoints must be increasing fractions in (0,1)"
                )
        if self.kind == FROM_FILE and not self.path:
            raise ValueError("AdversarySpec: from_file needs a path")


def fixed_sequence(labels) -> AdversarySpec:
    return AdversarySpec(kind=FIXED_SEQUENCE, labels=tuple(int(y) for y in labels))


def iid_bernoulli(mean: float, seed: int | None = None) -> AdversarySpec:
    return AdversarySpec(kind=IID_BERNOULLI, mean=float(mean), seed=seed)


def piecewise_drift(
    means=DRIFT_DEFAULT_MEANS,
    breakpoints=DRIFT_DEFAULT_BREAKPOINTS,
    seed: int | None = None,
) -> AdversarySpec:
    return AdversarySpec(
        kind=PIECEWISE_DRIFT,
        means=tuple(float(m) for m in means),
        breakpoints=tuple(float(b) for b in breakpoints),
        seed=seed,
    )


def adaptive_antimode() -> AdversarySpec:
    return AdversarySpec(kind=ADAPTIVE_ANTIMODE)


def from_file(path: str) -> AdversarySpec:
    return AdversarySpec(kind=FROM_FILE, path=str(path))


def _read_label_file(path: str) -> tuple[int, ...]:
    labels = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line:
            continue
        if line not in ("0", "1"):
            raise ValueError(f"label file {path!r}: bad line {raw!r}")
        labels.append(int(line))
    return tuple(labels)


class Adversary:
    """Runtime opponent for one run; create via make_adversary."""

    def __init__(
        self,
        spec: AdversarySpec,
        horizon: int,
        stream: np.ndarray | None,
        conditional_means: np.ndarray | None,
    ):
        self.spec = spec
        self.horizon = horizon
        self._stream = stream
        self.conditional_means = conditional_means
        self._cursor = 0

    @property
    def is_adaptive(self) -> bool:
        return self.spec.kind == ADAPTIVE_ANTIMODE

    def next_label(self, points: np.ndarray | None = None, current_P=None) -> int:
        if self._cursor >= self.horizon:
            raise ValueError("Adversary: horizon exhausted")
        if self.is_adaptive:
            if points is None or current_P is None:
                raise ValueError("Adversary: adaptive kind needs the current forecast")
            mean_forecast = float(np.dot(points, current_P))
            y = 1 if mean_forecast <= 0.5 else 0
        else:
            y = int(self._stream[self._cursor])
        self._cursor += 1
        return y


def make_adversary(
    spec: AdversarySpec,
    horizon: int,
    fallback_seed: np.random.SeedSequence | int | None = None,
) -> Adversary:
    """Instantiate an opponent, pregenerating oblivious label streams.

    Stream seeding prefers spec.seed; otherwise fallback_seed (the harness
    passes a child of the run seed); otherwise a fixed default.
    """
    if horizon < 1:
        raise ValueError(f"make_adversary: horizon must be >= 1, got {horizon!r}")
    stream = None
    cond = None
    if spec.kind in (IID_BERNOULLI, PIECEWISE_DRIFT):
        if spec.seed is not None:
            seed_seq = np.random.SeedSequence(spec.seed)
        elif isinstance(fallback_seed, np.random.SeedSequence):
            seed_seq = fallback_seed
        else:
            seed_seq = np.random.SeedSequence(fallback_seed or 0)
        rng = np.random.Generator(np.random.Philox(seed_seq))
        if spec.kind == IID_BERNOULLI:
            cond = np.full(horizon, spec.mean)
        else:
            cuts = np.array([int(round(b * horizon)) for b in spec.breakpoints])
            segment = np.searchsorted(cuts, np.arange(horizon), side="right")
            cond = np.asarray(spec.means)[segment]
        stream = (rng.random(horizon) < cond).astype(np.int64)
    elif spec.kind == FIXED_SEQUENCE:
        if len(spec.labels) < horizon:
            raise ValueError(
                f"fixed_sequence: {len(spec.labels)} labels < horizon {horizon}"
            )
        stream = np.asarray(spec.labels[:horizon], dtype=np.int64)
    elif spec.kind == FROM_FILE:
        labels = _read_label_file(spec.path)
        if len(labels) < horizon:
            raise ValueError(
                f"from_file: {spec.path!r} holds {len(labels)} labels < horizon {horizon}"
            )
        stream = np.asarray(labels[:horizon], dtype=np.int64)
    return Adversary(spec, horizon, stream, cond)


def next_label(
    adversary: Adversary,
    points: np.ndarray | None = None,
    current_P: np.ndarray | None = None,
) -> int:
    """Advance the opponent one round and return its label."""
    return adversary.next_label(points, current_P)


def dualgame_forecast(grid: Grid, revealed_mean: float) -> int:
    """Baseline that predicts the grid point nearest the revealed label mean.

    Only meaningful against stochastic opponents that expose their
    conditional mean.
    """
    return nearest_index(grid, revealed_mean)
