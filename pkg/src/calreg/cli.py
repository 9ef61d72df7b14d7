"""Command-line front end: `calreg run` and `calreg sweep`.

A JSON config file can hold any of the flag keys (underscored); explicit
flags win over the file.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .adversaries import (
    AdversarySpec,
    adaptive_antimode,
    fixed_sequence,
    from_file,
    iid_bernoulli,
    piecewise_drift,
)
from .harness import (
    RunConfig,
    RunRecord,
    emit_report,
    run_experiment,
    sweep_and_fit_rate,
)
from .losses import get_loss

_ADVERSARY_ALIASES = {
    "fixed": "fixed_sequence",
    "fixed_sequence": "fixed_sequence",
    "iid": "iid_bernoulli",
    "iid_bernoulli": "iid_bernoulli",
    "drift": "piecewise_drift",
    "piecewise_drift": "piecewise_drift",
    "antimode": "adaptive_antimode",
    "adaptive_antimode": "adaptive_antimode",
    "file": "from_file",
    "from_file": "from_file",
}


def _parse_params(pairs) -> dict[str, str]:
    params = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValueError(f"--adversary-param expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        params[key.strip()] = value.strip()
    return params


def build_adversary(name: str, params: dict[str, str]) -> AdversarySpec:
    kind = _ADVERSARY_ALIASES.get(name)
    if kind is None:
        raise ValueError(
            f"unknown adversary {name!r}; choose from {sorted(set(_ADVERSARY_ALIASES))}"
        )
    seed = int(params["seed"]) if "seed" in params else None
    if kind == "fixed_sequence":
        labels = params.get("labels")
        if not labels:
            raise ValueError("fixed adversary needs labels=010101...")
        return fixed_sequence(int(c) for c in labels)
    if kind == "iid_bernoulli":
        return iid_bernoulli(float(params.get("mean", 0.5)), seed=seed)
    if kind == "piecewise_drift":
        kwargs = {}
        if "means" in params:
            kwargs["means"] = [float(v) for v in params["means"].split(",")]
        if "breakpoints" in params:
            kwargs["breakpoints"] = [float(v) for v in params["breakpoints"].split(",")]
        return piecewise_drift(seed=seed, **kwargs)
    if kind == "adaptive_antimode":
        return adaptive_antimode()
    path = params.get("path")
    if not path:
        raise ValueError("file adversary needs path=<label file>")
    return from_file(path)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with defaults for any flag")
    parser.add_argument("--t", type=int, help="horizon (rounds)")
    parser.add_argument("--k", type=int, help="grid resolution override")
    parser.add_argument("--forecaster", choices=("bm", "dualgame"))
    parser.add_argument("--adversary", help="fixed|iid|drift|antimode|file")
    parser.add_argument(
        "--adversary-param",
        action="append",
        metavar="KEY=VALUE",
        help="adversary parameter, repeatable (e.g. mean=0.3)",
    )
    parser.add_argument("--seed", type=int)
    parser.add_argument("--losses", help="comma-separated loss names")
    parser.add_argument("--out", help="output path (directory for run, file for sweep)")
    parser.add_argument("--format", choices=("jsonl", "csv"))


def _merged(args: argparse.Namespace, defaults: dict) -> dict:
    merged = dict(defaults)
    if args.config:
        merged.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
    for key, value in vars(args).items():
        if key in ("config", "command") or value is None:
            continue
        merged[key] = value
    return merged


_RUN_DEFAULTS = {
    "t": None,
    "k": None,
    "forecaster": "bm",
    "adversary": "iid",
    "adversary_param": [],
    "seed": 0,
    "losses": "squared,log",
    "out": None,
    "format": "jsonl",
}

_SWEEP_DEFAULTS = dict(
    _RUN_DEFAULTS, t_grid=None, seeds=5, metric="pklcal", workers=1
)


def _run_config(opts: dict, horizon: int) -> RunConfig:
    params = opts["adversary_param"]
    if isinstance(params, dict):  # config-file form
        params = {k: str(v) for k, v in params.items()}
    else:
        params = _parse_params(params)
    losses = tuple(
        name.strip() for name in str(opts["losses"]).split(",") if name.strip()
    )
    for name in losses:
        get_loss(name)  # fail fast on unknown names
    return RunConfig(
        T=horizon,
        adversary=build_adversary(str(opts["adversary"]), params),
        K=opts["k"],
        forecaster=str(opts["forecaster"]),
        losses=losses,
        seed=int(opts["seed"]),
        out=opts["out"],
    )


def _cmd_run(args: argparse.Namespace) -> int:
    opts = _merged(args, _RUN_DEFAULTS)
    if opts["t"] is None:
        raise ValueError("run needs --t (or t in the config file)")
    config = _run_config(opts, int(opts["t"]))
    transcript, report = run_experiment(config)
    if config.out is not None:
        record = RunRecord(
            T=config.T, seed=config.seed, K=config.resolution, report=report
        )
        suffix = "csv" if opts["format"] == "csv" else "jsonl"
        emit_report([record], Path(config.out) / f"records.{suffix}", opts["format"])
    print(f"T={config.T} K={config.resolution} forecaster={config.forecaster}")
    for metric, value in report.scalar_items():
        print(f"{metric} {value:.10g}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    opts = _merged(args, _SWEEP_DEFAULTS)
    if not opts["t_grid"]:
        raise ValueError("sweep needs --t-grid (or t_grid in the config file)")
    if isinstance(opts["t_grid"], str):
        t_values = [int(v) for v in opts["t_grid"].split(",")]
    else:
        t_values = [int(v) for v in opts["t_grid"]]
    base = _run_config(opts, max(min(t_values), 2))
    result = sweep_and_fit_rate(
        base,
        t_values,
        seeds_per_t=int(opts["seeds"]),
        metric=str(opts["metric"]),
        workers=int(opts["workers"]),
    )
    if opts["out"]:
        emit_report(result.records, opts["out"], opts["format"])
    print(f"metric={result.metric_name} slope={result.slope:.6f} "
          f"intercept={result.intercept:.6f}")
    for T in sorted(result.mean_by_t):
        print(f"T={T} mean={result.mean_by_t[T]:.10g}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="calreg",
        description="Online calibration experiments via swap-regret minimization",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_parser = sub.add_parser("run", help="single experiment")
    _add_common(run_parser)
    sweep_parser = sub.add_parser("sweep", help="multi-seed sweep over horizons")
    _add_common(sweep_parser)
    sweep_parser.add_argument("--t-grid", help="comma-separated horizons")
    sweep_parser.add_argument("--seeds", type=int, help="seeds per horizon")
    sweep_parser.add_argument("--metric", help="report field to fit")
    sweep_parser.add_argument("--workers", type=int, help="parallel workers")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_sweep(args)
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
