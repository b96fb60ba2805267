"""Command-line entry point: ``snn-chemotaxis <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .arena import NoiseModel, write_grid_csv
from .ase import gradient_sweep, write_sweep_csv
from .experiment import (
    ExperimentConfig,
    aggregate,
    corner_analysis,
    export_results,
    run_episode,
    run_episodes,
    write_trajectory_csv,
)
from .network import ConfigError, write_raster_csv

SWEEP_GRADIENTS = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0)
SWEEP_THRESHOLDS = (-64.0, -62.0, -60.0)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment configuration (JSON)")
    common.add_argument("--seed", type=int)
    common.add_argument("--episodes", type=int)
    common.add_argument("--noise", action="store_true", help="enable salt-and-pepper sensor noise")
    common.add_argument("--strategy", choices=("snn", "graded", "levy"))
    common.add_argument("--out-dir", type=Path, default=Path("."))
    common.add_argument("--parallel", type=int)

    parser = argparse.ArgumentParser(prog="snn-chemotaxis", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="one episode; trajectory and spike raster CSVs")
    sub.add_parser("batch", parents=[common], help="Monte-Carlo batch; per-episode CSV and JSON summary")
    corners = sub.add_parser("corners", parents=[common], help="batches at the 8 weight-drift corners")
    corners.add_argument("--drift", type=float, default=0.10)
    sub.add_parser("obstacle", parents=[common], help="batch in the obstacle-avoidance arena")
    sub.add_parser("calibrate", parents=[common], help="detector spike rate vs ramp gradient")
    field = sub.add_parser("field", parents=[common], help="export the arena on a grid")
    field.add_argument("--grid", type=int, default=200)
    return parser


def _config(args: argparse.Namespace) -> ExperimentConfig:
    base = ExperimentConfig.from_json(args.config) if args.config else None
    if args.command == "obstacle" and (base is None or base.network.mode != "obstacle"):
        base = ExperimentConfig.obstacle(**({} if base is None else {"seed": base.seed, "n_episodes": base.n_episodes}))
    if base is None:
        base = ExperimentConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.episodes is not None:
        changes["n_episodes"] = args.episodes
    if args.noise:
        changes["noise"] = NoiseModel.salt_pepper()
    if args.strategy is not None:
        changes["strategy"] = args.strategy
    if args.parallel is not None:
        changes["parallel"] = args.parallel
    return replace(base, **changes) if changes else base


def _batch(config: ExperimentConfig, out: Path, stem: str) -> dict:
    metrics = run_episodes(config)
    stats = aggregate(metrics, config.arena.concentration_range, stem)
    export_results(stats, metrics, "csv", out / f"{stem}.csv")
    export_results(stats, metrics, "json", out / f"{stem}.json")
    return stats.to_dict()


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = _config(args)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "field": exc.field, "message": exc.message}), file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": "io", "message": str(exc)}), file=sys.stderr)
        return 2

    out: Path = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    cmd = args.command
    if cmd == "simulate":
        m = run_episode(config, config.seed, record=True)
        write_trajectory_csv(m, out / "trajectory.csv")
        if m.spike_counts is not None and len(m.spike_counts):
            t = m.trajectory[1:, 0]
            write_raster_csv(t, m.trajectory[1:, 5], m.spike_counts, out / "raster.csv")
        summary = m.summary()
    elif cmd in ("batch", "obstacle"):
        summary = _batch(config, out, cmd)
    elif cmd == "corners":
        summary = {label: stats.to_dict() for label, stats in corner_analysis(config, args.drift)}
        with (out / "corners.json").open("w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
    elif cmd == "calibrate":
        rows = gradient_sweep(config.network.ase, SWEEP_GRADIENTS, SWEEP_THRESHOLDS)
        write_sweep_csv(rows, out / "calibration.csv")
        summary = {"rows": len(rows), "path": str(out / "calibration.csv")}
    else:
        write_grid_csv(config.arena, out / "field.csv", args.grid)
        summary = {"grid": args.grid, "path": str(out / "field.csv")}
    print(json.dumps(summary, default=lambda o: None if isinstance(o, float) and not np.isfinite(o) else o, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
