"""Result files written by the command-line runs."""

import json
import logging
import platform
from pathlib import Path
from typing import Any, Sequence, Union

import numpy as np
import pandas as pd
import psutil

from firefilter.field.raster import rasterize_contour
from firefilter.utils.models import FilterOutput, FrontContour, FrontRecord, Observation

logger = logging.getLogger(__name__)


def filter_records(output: FilterOutput, observations: Sequence[Observation]) -> list[FrontRecord]:
    """Tagged fronts of a filter run in time order: truth, forecast, analysis, mean, then members."""
    records = []
    if output.initial is not None:
        records.append(FrontRecord.from_contour(output.initial, "forecast"))
    by_time = {obs.time: obs for obs in observations}
    for cycle in output.cycles:
        if cycle.has_observation and cycle.time in by_time:
            records.append(FrontRecord.from_contour(by_time[cycle.time].front, "truth"))
        records.append(FrontRecord.from_contour(cycle.forecast, "forecast"))
        if cycle.has_observation:
            records.append(FrontRecord.from_contour(cycle.analysis, "analysis"))
        if cycle.ensemble_mean is not None:
            records.append(FrontRecord.from_contour(cycle.ensemble_mean, "mean"))
        records.extend(FrontRecord.from_contour(member, f"member-{k}") for k, member in enumerate(cycle.members))
    return records


def simulation_records(initial: FrontContour, fronts: Sequence[FrontContour]) -> list[FrontRecord]:
    return [FrontRecord.from_contour(front, "forecast") for front in [initial, *fronts]]


def variance_summary(output: FilterOutput) -> list[dict[str, Any]]:
    """Per-cycle max and mean of the phi variance, and its mean over the analysis-front cells."""
    summary = []
    for cycle in output.cycles:
        values = cycle.variance.values
        on_front = rasterize_contour(cycle.analysis, cycle.variance.grid).pixels > 0
        summary.append(
            {
                "time_s": cycle.time,
                "max": float(values.max()),
                "mean": float(values.mean()),
                "front_mean": float(values[on_front].mean()) if on_front.any() else None,
            }
        )
    return summary


def params_trace(output: FilterOutput) -> pd.DataFrame:
    """One row per (cycle, particle or member) with its parameters and weight."""
    frames = [
        pd.DataFrame(
            {
                "time_s": np.full(len(cycle.weights), cycle.time),
                "index": np.arange(len(cycle.weights)),
                "beta": cycle.params[:, 0],
                "gamma": cycle.params[:, 1],
                "weight": cycle.weights,
            }
        )
        for cycle in output.cycles
    ]
    if not frames:
        return pd.DataFrame(columns=["time_s", "index", "beta", "gamma", "weight"])
    return pd.concat(frames, ignore_index=True)


def write_json(payload: Any, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> None:
    frame.to_csv(path, index=False, lineterminator="\n")


def host_summary() -> dict[str, Any]:
    sys_info = platform.uname()
    return {
        "system": f"{sys_info.system} ({sys_info.release})",
        "processor": sys_info.processor,
        "cpu_physical": psutil.cpu_count(logical=False),
        "cpu_logical": psutil.cpu_count(logical=True),
        "ram_gb": round(psutil.virtual_memory().total / (1024**3), 2),
    }


def run_meta(
    command: str,
    config: dict[str, Any],
    threads: int,
    steps: dict[str, int],
    flags: dict[str, Any],
    wall_time_s: float,
) -> dict[str, Any]:
    """Run metadata; everything except ``timing`` and ``threads`` is reproducible for a fixed seed."""
    return {
        "command": command,
        "config": config,
        "seed": config["seed"],
        "threads": threads,
        "steps": steps,
        "flags": flags,
        "timing": {"wall_time_s": round(wall_time_s, 3), "host": host_summary()},
    }
