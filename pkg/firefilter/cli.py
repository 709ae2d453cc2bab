#!/usr/bin/env python3

import argparse
import functools
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from firefilter.assimilation.enkf import enkf_run
from firefilter.assimilation.parallel import resolve_threads
from firefilter.assimilation.particle_filter import pf_run
from firefilter.data.config import RunConfig, load_config
from firefilter.data.fronts import load_front_records, load_fronts_json, write_fronts_json
from firefilter.data.outputs import (
    filter_records,
    params_trace,
    run_meta,
    simulation_records,
    variance_summary,
    write_csv,
    write_json,
)
from firefilter.data.synthetic import default_wind_series, generate_synthetic, simulate_fronts
from firefilter.data.wind_csv import load_wind_csv, write_wind_csv
from firefilter.evaluation.skill import TIME_TOLERANCE, check_alignment, skill_table
from firefilter.field.contour import extract_contour
from firefilter.field.geometry import ignition_field
from firefilter.spread.ros import estimate_params
from firefilter.utils.custom_exceptions import ConfigError, FireFilterError
from firefilter.utils.logger_config import setup_logger
from firefilter.utils.models import (
    CircleIgnition,
    FilterOutput,
    FrontContour,
    FrontRecord,
    Grid,
    Observation,
    WindSeries,
)
from firefilter.utils.seeding import SYNTH_SLOT, substream

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 4


def exit_codes(command: Callable[..., None]) -> Callable[..., int]:
    """Turns a command into one that returns a process exit code and reports failures on stderr."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> int:
        try:
            command(*args, **kwargs)
        except FireFilterError as e:
            print(f"error: {e}", file=sys.stderr)
            return e.exit_code
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_IO
        return EXIT_OK

    return wrapper


def _load(config_path: Optional[Path], seed: Optional[int]) -> RunConfig:
    config = load_config(config_path) if config_path is not None else RunConfig()
    return config.with_seed(seed) if seed is not None else config


def _wind(config: RunConfig, wind_path: Optional[Path]) -> WindSeries:
    if wind_path is not None:
        return load_wind_csv(wind_path)
    logger.info("No wind file given; using the configured synthetic wind")
    return default_wind_series(config)


def _out_dir(out_dir: Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


@exit_codes
def cmd_simulate(
    config_path: Optional[Path], out_dir: Path, seed: Optional[int] = None, wind_path: Optional[Path] = None
) -> None:
    """Baseline run with the fixed configured parameters; fronts every obs_interval."""
    started = time.perf_counter()
    config = _load(config_path, seed)
    wind_series = _wind(config, wind_path)
    out = _out_dir(out_dir)

    phi0 = ignition_field(config.grid, config.ignition)
    rng = substream(config.seed, 0) if config.solver.noise_sigma > 0 else None
    fronts, stats = simulate_fronts(phi0, config.output_times(), config.params, wind_series, config.solver, rng)
    logger.info(f"Simulated {len(fronts)} fronts in {stats.steps} steps")

    write_fronts_json(simulation_records(extract_contour(phi0), fronts), out / "fronts.json")
    steps = {"steps": stats.steps, "reinitializations": stats.reinitializations}
    meta = run_meta("simulate", config.to_dict(), 1, steps, {}, time.perf_counter() - started)
    write_json(meta, out / "run_meta.json")


def _run_filter(
    kind: str,
    config_path: Optional[Path],
    fronts_path: Path,
    wind_path: Optional[Path],
    out_dir: Path,
    seed: Optional[int],
    threads: Optional[int],
) -> None:
    started = time.perf_counter()
    config = _load(config_path, seed)
    observations = load_fronts_json(fronts_path)
    wind_series = _wind(config, wind_path)
    workers = resolve_threads(threads)
    out = _out_dir(out_dir)
    logger.info(f"Running {kind} with {len(observations)} observations on {workers} thread(s)")

    run = pf_run if kind == "pf" else enkf_run
    output = run(config.grid, config.ignition, config.prior, observations, wind_series, config, workers)
    _write_filter_outputs(kind, config, output, observations, out, workers, time.perf_counter() - started)


def _write_filter_outputs(
    kind: str,
    config: RunConfig,
    output: FilterOutput,
    observations: Sequence[Observation],
    out: Path,
    threads: int,
    wall_time_s: float,
) -> None:
    records = filter_records(output, observations)
    write_fronts_json(records, out / "fronts.json")
    write_json(variance_summary(output), out / "variance.json")
    write_csv(params_trace(output), out / "params_trace.csv")

    scored = [r for r in records if r.tag in ("forecast", "analysis") and any(o.time == r.time for o in observations)]
    write_csv(skill_table(scored, observations, config.grid), out / "skill.csv")

    steps = {"steps": output.steps, "reinitializations": output.reinitializations}
    flags: dict[str, Any] = dict(output.flags)
    if output.cycles:
        beta, gamma = output.final_params
        flags["final_params"] = {"beta": float(beta), "gamma": float(gamma)}
    write_json(run_meta(kind, config.to_dict(), threads, steps, flags, wall_time_s), out / "run_meta.json")


@exit_codes
def cmd_pf(
    config_path: Optional[Path],
    fronts_path: Path,
    wind_path: Optional[Path],
    out_dir: Path,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> None:
    """Particle-filter run against the observed fronts."""
    _run_filter("pf", config_path, fronts_path, wind_path, out_dir, seed, threads)


@exit_codes
def cmd_enkf(
    config_path: Optional[Path],
    fronts_path: Path,
    wind_path: Optional[Path],
    out_dir: Path,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> None:
    """EnKF run over (beta, gamma) against the observed fronts."""
    _run_filter("enkf", config_path, fronts_path, wind_path, out_dir, seed, threads)


@exit_codes
def cmd_synth(config_path: Optional[Path], out_dir: Path, seed: Optional[int] = None) -> None:
    """Synthetic truth from the configured parameters: fronts, wind and the parameters themselves."""
    started = time.perf_counter()
    config = _load(config_path, seed)
    out = _out_dir(out_dir)

    observations, wind_series = generate_synthetic(config, config.params, substream(config.seed, SYNTH_SLOT))
    write_fronts_json([FrontRecord.from_contour(o.front, "truth") for o in observations], out / "truth_fronts.json")
    write_wind_csv(wind_series, out / "wind.csv")
    write_json({"beta": config.params.beta, "gamma": config.params.gamma}, out / "true_params.json")
    meta = run_meta("synth", config.to_dict(), 1, {}, {}, time.perf_counter() - started)
    write_json(meta, out / "run_meta.json")


def parse_grid(value: str) -> Grid:
    """Grid from ``nx,ny,dx,dy,x0,y0``."""
    parts = value.split(",")
    if len(parts) != 6:
        raise ConfigError("grid", f"expected nx,ny,dx,dy,x0,y0, got {value!r}")
    try:
        nx, ny = int(parts[0]), int(parts[1])
        dx, dy, x0, y0 = (float(p) for p in parts[2:])
        return Grid(nx, ny, dx, dy, (x0, y0))
    except ValueError as e:
        raise ConfigError("grid", str(e)) from e


def _select_predictions(records: Sequence[FrontRecord], tag: Optional[str]) -> list[FrontRecord]:
    if tag is None:
        tags = {r.tag for r in records}
        tag = "analysis" if "analysis" in tags else "forecast" if "forecast" in tags else None
    return [r for r in records if tag is None or r.tag == tag]


@exit_codes
def cmd_score(
    pred_path: Path,
    truth_path: Path,
    grid: Optional[Grid] = None,
    config_path: Optional[Path] = None,
    tag: Optional[str] = None,
) -> None:
    """Prints per-time jaccard, symmetric-difference and Hausdorff scores as CSV on stdout."""
    if grid is None:
        grid = _load(config_path, None).grid
    predicted = _select_predictions(load_front_records(pred_path), tag)
    truth_records = load_front_records(truth_path)
    if any(r.tag == "truth" for r in truth_records):
        truth_records = [r for r in truth_records if r.tag == "truth"]
    truth = [Observation(r.time, FrontContour(r.polygons, r.time)) for r in truth_records]
    if all(abs(o.time) > TIME_TOLERANCE for o in truth):
        # the t=0 record is the ignition front, not a prediction
        predicted = [r for r in predicted if abs(r.time) > TIME_TOLERANCE]

    check_alignment(sorted({r.time for r in predicted}), [o.time for o in truth])
    table = skill_table(predicted, truth, grid)
    table.to_csv(sys.stdout, index=False, lineterminator="\n")


@exit_codes
def cmd_calibrate(fronts_path: Path, wind_path: Optional[Path], config_path: Optional[Path] = None) -> None:
    """Prints (beta, gamma) fitted to the observed fronts as JSON on stdout."""
    config = _load(config_path, None)
    observations = load_fronts_json(fronts_path)
    wind_series = _wind(config, wind_path)
    if isinstance(config.ignition, CircleIgnition):
        center = config.ignition.center
    else:
        cx, cy = np.asarray(config.ignition.polygon).mean(axis=0)
        center = (float(cx), float(cy))
    try:
        params = estimate_params(observations, wind_series, center)
    except ValueError as e:
        raise ConfigError("fronts", str(e)) from e
    print(json.dumps({"beta": params.beta, "gamma": params.gamma}))


def setup_args() -> argparse.ArgumentParser:
    """Defines and returns CLI argument parser."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--log-level",
        type=str,
        choices=["DEBUG", "INFO", "WARNING"],
        default="INFO",
        help="Logging level (default: INFO)",
    )

    parser = argparse.ArgumentParser(prog="firefilter", description="Level-set fire-front simulation and assimilation")
    commands = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return commands.add_parser(name, parents=[common], help=help_text)

    simulate = add("simulate", "Baseline level-set simulation with fixed parameters")
    pf = add("pf", "Particle filter over level-set particles")
    enkf = add("enkf", "Ensemble Kalman filter over (beta, gamma)")
    synth = add("synth", "Generate synthetic truth fronts and wind")
    score = add("score", "Score predicted fronts against truth (CSV on stdout)")
    calibrate = add("calibrate", "Fit (beta, gamma) to observed fronts")

    for sub in (simulate, pf, enkf, synth, calibrate):
        sub.add_argument("--config", type=Path, default=None, help="Run config, JSON or YAML (default: built-in)")
    for sub in (simulate, pf, enkf, synth):
        sub.add_argument("--out", type=Path, required=True, help="Output directory")
        sub.add_argument("--seed", type=int, default=None, help="Overrides the config seed")
    for sub in (pf, enkf, calibrate):
        sub.add_argument("--fronts", type=Path, required=True, help="Observed fronts JSON")
    for sub in (simulate, pf, enkf, calibrate):
        sub.add_argument("--wind", type=Path, default=None, help="Wind CSV (default: configured synthetic wind)")
    for sub in (pf, enkf):
        sub.add_argument(
            "--threads",
            type=int,
            default=None,
            help="Worker threads, 0 for all CPUs (default: FIREFILTER_THREADS or 1)",
        )

    score.add_argument("--pred", type=Path, required=True, help="Predicted fronts JSON")
    score.add_argument("--truth", type=Path, required=True, help="Truth fronts JSON")
    grid_source = score.add_mutually_exclusive_group(required=True)
    grid_source.add_argument("--config", type=Path, help="Run config whose grid is used")
    grid_source.add_argument("--grid", type=str, help="Grid as nx,ny,dx,dy,x0,y0")
    score.add_argument("--tag", type=str, default=None, help="Prediction tag to score (default: analysis or forecast)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point."""
    parser = setup_args()
    args = parser.parse_args(argv)
    setup_logger(level=getattr(logging, args.log_level), stream=sys.stderr)

    if args.command == "simulate":
        return cmd_simulate(args.config, args.out, args.seed, args.wind)
    if args.command in ("pf", "enkf"):
        command = cmd_pf if args.command == "pf" else cmd_enkf
        return command(args.config, args.fronts, args.wind, args.out, args.seed, args.threads)
    if args.command == "synth":
        return cmd_synth(args.config, args.out, args.seed)
    if args.command == "calibrate":
        return cmd_calibrate(args.fronts, args.wind, args.config)

    try:
        grid = parse_grid(args.grid) if args.grid else None
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    return cmd_score(args.pred, args.truth, grid, args.config, args.tag)


if __name__ == "__main__":
    sys.exit(main())
