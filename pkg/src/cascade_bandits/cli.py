"""Command-line driver: JSON config in, CSV (and optionally SVG) out.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .core import ArmParams
from .harness import AggregateCurve, ConfigError, ExperimentConfig, run_experiment
from .svg import line_chart

log = logging.getLogger(__name__)

CONFIG_KEYS = {"mu", "p", "horizons", "runs", "master_seed", "policies", "checkpoint_schedule"}
REQUIRED_KEYS = CONFIG_KEYS - {"checkpoint_schedule"}

HORIZON_HEADER = ["policy", "horizon", "mean_final_regret", "stderr", "runs"]
CUMULATIVE_HEADER = ["policy", "t", "mean_cum_regret", "stderr", "runs"]


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def load_config(path) -> ExperimentConfig:
    """Parse and validate a JSON experiment config."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {str(path)!r} not found")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    for key in raw:
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
    for key in sorted(REQUIRED_KEYS - raw.keys()):
        raise ConfigError(f"missing config key {key!r}")

    for name in ("mu", "p"):
        values = raw[name]
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{name} must be a nonempty list of probabilities")
        for i, v in enumerate(values):
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ConfigError(f"{name}[{i}] = {v!r} is not a number")
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name}[{i}] = {v!r}: {name}[i] ∉ [0,1]")
    if len(raw["mu"]) != len(raw["p"]):
        raise ConfigError(f"mu and p must have equal length ({len(raw['mu'])} != {len(raw['p'])})")
    horizons = raw["horizons"]
    if not isinstance(horizons, list) or not horizons:
        raise ConfigError("horizons must be a nonempty list")
    for i, T in enumerate(horizons):
        if not _is_int(T) or T < 1:
            raise ConfigError(f"horizons[{i}] = {T!r} must be an integer >= 1")
    if not _is_int(raw["runs"]) or raw["runs"] < 1:
        raise ConfigError(f"runs = {raw['runs']!r} must be an integer >= 1")
    if not _is_int(raw["master_seed"]):
        raise ConfigError(f"master_seed = {raw['master_seed']!r} must be an integer")
    policies = raw["policies"]
    if not isinstance(policies, list) or not policies:
        raise ConfigError("policies must be a nonempty list")
    if len(set(policies)) != len(policies):
        raise ConfigError("policies must not repeat")

    return ExperimentConfig(
        params=ArmParams(tuple(raw["mu"]), tuple(raw["p"])),
        horizons=tuple(horizons),
        runs=raw["runs"],
        master_seed=raw["master_seed"],
        policies=tuple(policies),
        checkpoint_schedule=raw.get("checkpoint_schedule", "log"),
    )


def fmt(x: float) -> str:
    """Positional decimal with 10 significant digits."""
    return np.format_float_positional(float(x), precision=10, unique=False, fractional=False, trim="-")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def emit(results: dict[tuple[str, int], AggregateCurve], out_dir, emit_svg: bool = False) -> list[Path]:
    """Write ``regret_vs_horizon.csv`` and one ``cumulative_T<T>.csv`` per horizon."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    keys = sorted(results)  # (policy, horizon)
    written = []

    path = out_dir / "regret_vs_horizon.csv"
    rows = [[name, T, fmt(results[name, T].mean[-1]), fmt(results[name, T].stderr[-1]), results[name, T].runs]
            for name, T in keys]
    _write_csv(path, HORIZON_HEADER, rows)
    written.append(path)
    if emit_svg:
        series = {}
        for name, T in keys:
            xs, ys = series.setdefault(name, ([], []))
            xs.append(T)
            ys.append(results[name, T].mean[-1])
        svg = line_chart(series, "Regret vs horizon", "horizon T", "mean regret R(T)", log_x=True)
        written.append(_write_text(out_dir / "regret_vs_horizon.svg", svg))

    for T in sorted({T for _, T in keys}):
        path = out_dir / f"cumulative_T{T}.csv"
        rows = []
        series = {}
        for name in sorted(n for n, h in keys if h == T):
            curve = results[name, T]
            for t, m, se in zip(curve.t, curve.mean, curve.stderr):
                rows.append([name, t, fmt(m), fmt(se), curve.runs])
            series[name] = (curve.t, curve.mean)
        _write_csv(path, CUMULATIVE_HEADER, rows)
        written.append(path)
        if emit_svg:
            svg = line_chart(series, f"Cumulative regret, T = {T}", "slot t", "mean cumulative regret")
            written.append(_write_text(out_dir / f"cumulative_T{T}.svg", svg))
    return written


def _write_text(path: Path, text: str) -> Path:
    with open(path, "w", newline="\n") as f:
        f.write(text)
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cascade-bandits",
                                     description="Run cascade bandit regret experiments.")
    parser.add_argument("--config", required=True, help="JSON experiment config")
    parser.add_argument("--out", required=True, help="output directory (created if absent)")
    parser.add_argument("--svg", action="store_true", help="also write SVG line charts")
    parser.add_argument("--policies", help="comma-separated subset of the configured policies")
    parser.add_argument("--seed", type=int, help="override master_seed (unsigned 64-bit)")
    parser.add_argument("--workers", type=int, default=1,
                        help="worker processes (output is identical for any value)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = ExperimentConfig(config.params, config.horizons, config.runs, args.seed,
                                      config.policies, config.checkpoint_schedule)
        only = None
        if args.policies:
            only = [s.strip() for s in args.policies.split(",") if s.strip()]
            if not only:
                raise ConfigError("--policies is empty")
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        results = run_experiment(config, workers=args.workers, only=only)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    try:
        written = emit(results, args.out, args.svg)
    except OSError as exc:
        print(f"runtime error: cannot write to {args.out!r}: {exc}", file=sys.stderr)
        return 2
    for path in written:
        log.info("wrote %s", os.fspath(path))
    return 0


if __name__ == "__main__":
    sys.exit(main())
