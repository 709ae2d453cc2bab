"""Synthetic fire-front observations from a known (beta, gamma) and wind record."""

import logging
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from firefilter.data.config import RunConfig, synthetic_wind_series
from firefilter.field.contour import extract_contour
from firefilter.field.geometry import ignition_field
from firefilter.solver.level_set import PropagationStats, propagate_with_stats
from firefilter.utils.models import (
    FrontContour,
    Ignition,
    LevelSetField,
    Observation,
    RosParams,
    SolverConfig,
    WindSeries,
)
from firefilter.utils.seeding import SYNTH_SLOT, substream

logger = logging.getLogger(__name__)


def simulate_fronts(
    phi0: LevelSetField,
    times: Sequence[float],
    params: RosParams,
    wind_series: WindSeries,
    solver_config: SolverConfig,
    rng: Optional[np.random.Generator] = None,
) -> tuple[list[FrontContour], PropagationStats]:
    """Propagates ``phi0`` through ``times`` with fixed parameters, returning the front at each time."""
    phi = phi0
    fronts = []
    total = PropagationStats()
    for t in times:
        phi, stats = propagate_with_stats(phi, t, params, wind_series, solver_config, rng)
        total += stats
        fronts.append(extract_contour(phi))
    return fronts, total


def jitter_front(front: FrontContour, sigma: float, rng: np.random.Generator) -> FrontContour:
    """Moves every vertex by N(0, sigma^2) along the local polygon normal."""
    if sigma <= 0 or front.is_empty:
        return front
    polygons = []
    for polygon in front.polylines:
        tangent = np.roll(polygon, -1, axis=0) - np.roll(polygon, 1, axis=0)
        length = np.hypot(tangent[:, 0], tangent[:, 1])
        safe = np.where(length > 0, length, 1.0)
        normal = np.column_stack([tangent[:, 1], -tangent[:, 0]]) / safe[:, None]
        offsets = sigma * rng.standard_normal(len(polygon))
        offsets = np.where(length > 0, offsets, 0.0)
        polygons.append(polygon + offsets[:, None] * normal)
    return FrontContour(tuple(polygons), front.time)


def default_wind_series(config: RunConfig) -> WindSeries:
    """The wind ``generate_synthetic`` produces for ``config.seed``, for runs given no wind file."""
    wind_rng = substream(config.seed, SYNTH_SLOT).spawn(3)[0]
    return synthetic_wind_series(config, wind_rng)


def generate_synthetic(
    config: RunConfig,
    true_params: RosParams,
    rng: np.random.Generator,
    ignition: Optional[Ignition] = None,
) -> tuple[list[Observation], WindSeries]:
    """Truth fronts every ``obs_interval`` up to ``t_end`` and the per-second wind that drove them.

    Process noise (``synthetic.process_noise``) perturbs the truth field while it spreads; mapping
    error (``synthetic.obs_jitter``) perturbs the reported vertices only.
    """
    wind_rng, noise_rng, jitter_rng = rng.spawn(3)
    wind_series = synthetic_wind_series(config, wind_rng)
    solver = replace(config.solver, noise_sigma=config.synthetic.process_noise)
    phi0 = ignition_field(config.grid, ignition if ignition is not None else config.ignition)
    fronts, stats = simulate_fronts(phi0, config.output_times(), true_params, wind_series, solver, noise_rng)
    observations = [Observation(f.time, jitter_front(f, config.synthetic.obs_jitter, jitter_rng)) for f in fronts]
    logger.info(
        f"Generated {len(observations)} synthetic fronts with beta={true_params.beta}, gamma={true_params.gamma} "
        f"in {stats.steps} steps"
    )
    return observations, wind_series
