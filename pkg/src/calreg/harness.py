"""Experiment runner: single runs, multi-seed sweeps over the horizon, and
log-log rate fitting.

Every run is driven by one integer seed.  The seed is split into independent
child streams for the forecaster's sampling and the adversary's labels, so
oblivious label streams are bit-identical across forecaster configurations.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .adversaries import Adversary, AdversarySpec, make_adversary
from .forecaster import (
    RoundDistribution,
    forecaster_update,
    init_forecaster,
    sample_index,
    step_distribution,
)
from .grid import PADDED, build_grid, default_K, nearest_index
from .losses import get_loss
from .metrics import MetricReport, Transcript, compute_report, save_transcript

BM = "bm"
DUALGAME = "dualgame"

_FORECASTERS = (BM, DUALGAME)


@dataclass(frozen=True)
class RunConfig:
    T: int
    adversary: AdversarySpec
    K: int | None = None
    forecaster: str = BM
    losses: tuple[str, ...] = ("squared", "log")
    seed: int = 0
    out: str | None = None
    hp_delta: float = 0.1

    def __post_init__(self) -> None:
        if self.T < 2:
            raise ValueError(f"RunConfig: T must be >= 2, got {self.T!r}")
        if self.K is not None and self.K < 2:
            raise ValueError(f"RunConfig: K must be >= 2 when given, got {self.K!r}")
        if self.forecaster not in _FORECASTERS:
            raise ValueError(f"RunConfig: unknown forecaster {self.forecaster!r}")

    @property
    def resolution(self) -> int:
        return self.K if self.K is not None else default_K(self.T)


def _execute(
    config: RunConfig, keep_rounds: bool
) -> tuple[Transcript, list[RoundDistribution]]:
    K = config.resolution
    grid = build_grid(K, PADDED)
    points = grid.points
    n = len(points)
    root = np.random.SeedSequence(config.seed)
    forecaster_seed, adversary_seed = root.spawn(2)
    adversary: Adversary = make_adversary(
        config.adversary, config.T, fallback_seed=adversary_seed
    )

    dists = np.zeros((config.T, n))
    indices = np.empty(config.T, dtype=np.int64)
    labels = np.empty(config.T, dtype=np.int64)
    rounds: list[RoundDistribution] = []

    if config.forecaster == BM:
        state = init_forecaster(K)
        rng = np.random.Generator(np.random.Philox(forecaster_seed))
        for t in range(config.T):
            rd = step_distribution(state)
            dists[t] = rd.masses
            indices[t] = sample_index(rd.masses, rng)
            y = adversary.next_label(points, rd.masses)
            labels[t] = y
            state = forecaster_update(state, rd, y)
            if keep_rounds:
                rounds.append(rd)
    else:
        if adversary.conditional_means is None:
            raise ValueError(
                "dualgame forecaster needs an adversary that reveals its mean"
            )
        for t in range(config.T):
            i = nearest_index(grid, float(adversary.conditional_means[t]))
            indices[t] = i
            dists[t, i] = 1.0
            labels[t] = adversary.next_label(points, dists[t])

    transcript = Transcript(
        points=points,
        distributions=dists,
        sampled_indices=indices,
        labels=labels,
        K=K,
        variant=PADDED,
    )
    return transcript, rounds


def run_experiment(config: RunConfig) -> tuple[Transcript, MetricReport]:
    """Play the protocol for T rounds; optionally serialize both artifacts."""
    transcript, _ = _execute(config, keep_rounds=False)
    losses = [get_loss(name) for name in config.losses]
    report = compute_report(transcript, losses, hp_delta=config.hp_delta)
    if config.out is not None:
        out_dir = Path(config.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        save_transcript(transcript, out_dir / "transcript.jsonl")
        (out_dir / "report.json").write_text(
            json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
    return transcript, report


def run_rounds(config: RunConfig) -> tuple[Transcript, list[RoundDistribution]]:
    """Like run_experiment but also return per-round solver provenance.

    Each RoundDistribution can recompute its fixed-point residual post hoc,
    which is how emitted distributions get audited.
    """
    return _execute(config, keep_rounds=True)


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class RunRecord:
    T: int
    seed: int
    K: int
    report: MetricReport


@dataclass(frozen=True)
class SweepResult:
    metric_name: str
    records: tuple[RunRecord, ...]
    mean_by_t: dict[int, float]
    slope: float
    intercept: float


def _sweep_job(args: tuple[RunConfig, int, int]) -> RunRecord:
    base, T, seed = args
    config = replace(base, T=T, seed=seed, out=None)
    _, report = run_experiment(config)
    return RunRecord(T=T, seed=seed, K=config.resolution, report=report)


def metric_value(record: RunRecord, metric) -> float:
    if callable(metric):
        return float(metric(record.T, record.report))
    table = dict(record.report.scalar_items())
    if metric not in table:
        raise ValueError(f"unknown metric {metric!r}; have {sorted(table)}")
    return float(table[metric])


def sweep_and_fit_rate(
    base: RunConfig,
    t_values,
    seeds_per_t: int,
    metric="pklcal",
    workers: int = 1,
) -> SweepResult:
    """Run a (T, seed) grid and fit ln(mean metric) against ln(T).

    Means are taken across seeds per T before logging.  metric is either a
    report field name or a callable (T, report) -> value for injected
    diagnostics.
    """
    ts = sorted(set(int(T) for T in t_values))
    if len(ts) < 4:
        raise ValueError(f"sweep needs >= 4 distinct T values, got {len(ts)}")
    if seeds_per_t < 5:
        raise ValueError(f"sweep needs >= 5 seeds per T, got {seeds_per_t}")
    jobs = [(base, T, base.seed + j) for T in ts for j in range(seeds_per_t)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_sweep_job, jobs))
    else:
        records = [_sweep_job(job) for job in jobs]
    records.sort(key=lambda r: (r.T, r.seed))

    name = metric.__name__ if callable(metric) else str(metric)
    mean_by_t: dict[int, float] = {}
    for T in ts:
        vals = [metric_value(r, metric) for r in records if r.T == T]
        mean_by_t[T] = float(np.mean(vals))
    if any(m <= 0.0 for m in mean_by_t.values()):
        bad = {T: m for T, m in mean_by_t.items() if m <= 0.0}
        raise ArithmeticError(f"degenerate rate fit: nonpositive means at {bad}")
    x = np.log(np.asarray(ts, dtype=float))
    y = np.log(np.asarray([mean_by_t[T] for T in ts]))
    slope, intercept = np.polyfit(x, y, 1)
    if not (math.isfinite(slope) and math.isfinite(intercept)):
        raise ArithmeticError("degenerate rate fit: non-finite coefficients")
    return SweepResult(
        metric_name=name,
        records=tuple(records),
        mean_by_t=mean_by_t,
        slope=float(slope),
        intercept=float(intercept),
    )


# ---------------------------------------------------------------------------
# report emission

CSV_HEADER = ("T", "seed", "K", "metric", "value")


def emit_report(records, path: str | Path, format: str = "jsonl") -> Path:
    """Write run records as csv rows or json-lines mirroring MetricReport."""
    path = Path(path)
    records = list(records)
    if format == "csv":
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for rec in records:
                for metric, value in rec.report.scalar_items():
                    # repr of a builtin float round-trips exactly
                    writer.writerow([rec.T, rec.seed, rec.K, metric, repr(float(value))])
    elif format in ("jsonl", "json-lines"):
        with path.open("w", encoding="utf-8") as fh:
            for rec in records:
                line = {
                    "T": rec.T,
                    "seed": rec.seed,
                    "K": rec.K,
                    "report": rec.report.to_dict(),
                }
                fh.write(json.dumps(line) + "\n")
    else:
        raise ValueError(f"emit_report: unknown format {format!r}")
    return path


def load_report_lines(path: str | Path) -> list[RunRecord]:
    """Parse emitted json-lines back into RunRecord objects."""
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            records.append(
                RunRecord(
                    T=row["T"],
                    seed=row["seed"],
                    K=row["K"],
                    report=MetricReport.from_dict(row["report"]),
                )
            )
    return records
