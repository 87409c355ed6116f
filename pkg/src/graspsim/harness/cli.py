"""Command line interface: run / sweep / validate.

Exit codes: 0 success, 1 integrator failure during a run, 2 invalid
configuration or arguments. Log level comes from GRASPSIM_LOG_LEVEL
(DEBUG/INFO/WARNING/ERROR, default WARNING).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import multiprocessing
import os
import sys

from ..dynamics import IntegrationError
from ..scene import step
from .config import ConfigError, load_config
from .csvio import aggregate_ratios, write_summary, write_sweep, write_timeseries
from .scenarios import build_scenario, enumerate_sweep

log = logging.getLogger(__name__)


def _setup_logging():
    level = os.environ.get("GRASPSIM_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _summary_row(config, world, status, message, t_final):
    return {
        "name": config.name,
        "status": status,
        "message": message,
        "t_final": repr(float(t_final)),
        "duration": repr(float(config.duration)),
        "accepted": world.stats["accepted"],
        "rejected": world.stats["rejected"],
        "rhs_evals": world.stats["rhs_evals"],
        "warnings": world.warnings,
        "seed": config.seed,
    }


def _do_run(config, out_dir: str) -> int:
    os.makedirs(out_dir, exist_ok=True)
    world = build_scenario(config)
    ts_path = os.path.join(out_dir, f"{config.name}.csv")
    summary_path = os.path.join(out_dir, "summary.csv")
    if config.duration == 0.0:
        write_timeseries(ts_path, world, [])
        write_summary(summary_path, [_summary_row(config, world, "ok", "", 0.0)])
        return 0
    try:
        samples = step(world, config.duration)
    except IntegrationError as err:
        samples = getattr(err, "samples", [])
        write_timeseries(ts_path, world, samples)
        write_summary(
            summary_path,
            [_summary_row(config, world, "failed", str(err), err.t)],
        )
        print(f"integrator failure: {err}", file=sys.stderr)
        return 1
    write_timeseries(ts_path, world, samples)
    write_summary(summary_path, [_summary_row(config, world, "ok", "", world.time)])
    return 0


def _run_cell(args):
    index, coords, cell = args
    world = build_scenario(cell)
    try:
        samples = step(world, cell.duration)
    except IntegrationError as err:
        samples = getattr(err, "samples", [])
        mean, mx = aggregate_ratios(samples)
        log.warning("sweep cell %s failed: %s", coords, err)
        return index, {"coords": coords, "mean": mean, "max": mx, "failed": True}
    mean, mx = aggregate_ratios(samples)
    return index, {"coords": coords, "mean": mean, "max": mx, "failed": False}


def _do_sweep(config, out_dir: str, jobs: int) -> int:
    cells = enumerate_sweep(config)
    os.makedirs(out_dir, exist_ok=True)
    tasks = [(i, coords, cell) for i, (coords, cell) in enumerate(cells)]
    if jobs > 1:
        with multiprocessing.Pool(jobs) as pool:
            results = pool.map(_run_cell, tasks)
    else:
        results = [_run_cell(t) for t in tasks]
    rows = [row for _, row in sorted(results, key=lambda r: r[0])]
    write_sweep(os.path.join(out_dir, "sweep.csv"), list(config.sweep), rows)
    return 0


def main(argv=None) -> int:
    _setup_logging()
    parser = argparse.ArgumentParser(
        prog="graspsim",
        description="Penalty-contact rigid body simulation runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one scenario and write CSV output")
    p_run.add_argument("--config", required=True, help="scenario JSON file")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--duration", type=float, default=None, help="override duration (s)")
    p_run.add_argument("--h-max", type=float, default=None, help="override max step (s)")

    p_sweep = sub.add_parser("sweep", help="run every cell of the config's sweep grid")
    p_sweep.add_argument("--config", required=True, help="scenario JSON file")
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    p_val = sub.add_parser("validate", help="check a scenario file and exit")
    p_val.add_argument("--config", required=True, help="scenario JSON file")

    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "run":
            overrides = {}
            if args.duration is not None:
                if args.duration < 0:
                    print("--duration must be >= 0", file=sys.stderr)
                    return 2
                overrides["duration"] = args.duration
            if args.h_max is not None:
                if args.h_max <= 0:
                    print("--h-max must be > 0", file=sys.stderr)
                    return 2
                overrides["h_max"] = args.h_max
            if overrides:
                config = dataclasses.replace(config, **overrides)
            return _do_run(config, args.out)
        if args.command == "sweep":
            if args.jobs < 1:
                print("--jobs must be >= 1", file=sys.stderr)
                return 2
            return _do_sweep(config, args.out, args.jobs)
        print(f"ok: {args.config}")
        return 0
    except ConfigError as err:
        for line in err.errors:
            print(f"config error: {line}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
