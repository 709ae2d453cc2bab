import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.ndimage import gaussian_filter

from firefilter.solver import differences
from firefilter.solver.reinit import has_front, reinitialize_values
from firefilter.spread.ros import max_speed, normal_speed_field
from firefilter.spread.wind import next_sample_time, wind_at
from firefilter.utils.custom_exceptions import CflViolationError, DomainTooSmallError
from firefilter.utils.models import Grid, LevelSetField, RosParams, ScalarField, SolverConfig, WindSeries

logger = logging.getLogger(__name__)

GUARD_CELLS = 2
NOISE_SMOOTHING = 1.0
_MIN_GRADIENT = 1e-9
_DT_TOLERANCE = 1e-12


@dataclass
class PropagationStats:
    """Work done by one propagation."""

    steps: int = 0
    reinitializations: int = 0

    def __iadd__(self, other: "PropagationStats") -> "PropagationStats":
        self.steps += other.steps
        self.reinitializations += other.reinitializations
        return self


def grad_mag_upwind(phi: LevelSetField, order: int = 2) -> ScalarField:
    """Godunov upwind |grad phi| for an expanding front."""
    if order not in (1, 2):
        raise ValueError(f"ENO order must be 1 or 2, got {order}")
    padded = differences.pad(phi.values)
    dmx, dpx = differences.one_sided(padded, phi.grid.dx, axis=1, order=order)
    dmy, dpy = differences.one_sided(padded, phi.grid.dy, axis=0, order=order)
    return ScalarField(phi.grid, differences.godunov(dmx, dpx, dmy, dpy))


def stable_dt(
    phi: LevelSetField,
    params: RosParams,
    wind: tuple[float, float],
    config: SolverConfig,
    remaining: float = math.inf,
) -> float:
    """Largest CFL-safe step, capped by the remaining time budget."""
    u_max = max_speed(params, wind)
    if u_max == 0:
        return remaining
    return min(config.cfl * min(phi.grid.dx, phi.grid.dy) / u_max, remaining)


@lru_cache(maxsize=None)
def _noise_gain(sigma: float) -> float:
    """Factor that restores unit marginal variance to Gaussian-smoothed white noise."""
    impulse = np.zeros((33, 33))
    impulse[16, 16] = 1.0
    kernel = gaussian_filter(impulse, sigma, mode="constant")
    return float(1.0 / np.sqrt(np.sum(kernel**2)))


def smoothed_noise(shape: tuple[int, int], noise_sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Spatially coherent Gaussian perturbation with per-cell standard deviation ``noise_sigma``."""
    white = rng.standard_normal(shape)
    return noise_sigma * _noise_gain(NOISE_SMOOTHING) * gaussian_filter(white, NOISE_SMOOTHING, mode="nearest")


def _advance(
    values: np.ndarray,
    grid: Grid,
    dt: float,
    params: RosParams,
    wind: tuple[float, float],
    config: SolverConfig,
    rng: Optional[np.random.Generator],
) -> np.ndarray:
    padded = differences.pad(values)
    gx = differences.central(padded, grid.dx, axis=1)
    gy = differences.central(padded, grid.dy, axis=0)
    norm = np.hypot(gx, gy)
    flat = norm < _MIN_GRADIENT
    safe = np.where(flat, 1.0, norm)
    speed = normal_speed_field(params, wind, gx / safe, gy / safe, config.clamp_upwind)
    speed = np.where(flat, params.beta, speed)

    dmx, dpx = differences.one_sided(padded, grid.dx, axis=1, order=config.eno_order)
    dmy, dpy = differences.one_sided(padded, grid.dy, axis=0, order=config.eno_order)
    updated = values - dt * speed * differences.godunov(dmx, dpx, dmy, dpy, speed)

    if config.noise_sigma > 0:
        if rng is None:
            raise ValueError("process noise is enabled but no random generator was given")
        updated = updated + smoothed_noise(values.shape, config.noise_sigma, rng)
    return updated


def step(
    phi: LevelSetField,
    dt: float,
    params: RosParams,
    wind: tuple[float, float],
    config: SolverConfig,
    rng: Optional[np.random.Generator] = None,
) -> LevelSetField:
    """One forward-Euler step of phi_t + u |grad phi| = 0; raises when dt breaks the CFL bound."""
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    dt_max = stable_dt(phi, params, wind, config)
    if dt > dt_max * (1.0 + _DT_TOLERANCE):
        raise CflViolationError(dt, dt_max)
    if dt == 0:
        return phi
    return phi.with_values(_advance(phi.values, phi.grid, dt, params, wind, config, rng), phi.time + dt)


def touches_border(values: np.ndarray, band: int = GUARD_CELLS) -> bool:
    """True when a burned cell lies within ``band`` cells of the grid border."""
    burned = values <= 0
    return bool(burned[:band, :].any() or burned[-band:, :].any() or burned[:, :band].any() or burned[:, -band:].any())


def propagate_with_stats(
    phi: LevelSetField,
    t_end: float,
    params: RosParams,
    wind_series: WindSeries,
    config: SolverConfig,
    rng: Optional[np.random.Generator] = None,
) -> tuple[LevelSetField, PropagationStats]:
    """Integrates phi to ``t_end``, stepping on CFL limits and wind-sample boundaries."""
    if t_end < phi.time:
        raise ValueError(f"t_end={t_end} is before the field time {phi.time}")
    stats = PropagationStats()
    if t_end == phi.time:
        return phi, stats

    grid = phi.grid
    values = np.array(phi.values)
    t = phi.time
    while t < t_end:
        wind = wind_at(wind_series, t)
        remaining = t_end - t
        dt = stable_dt(phi, params, wind, config, remaining)
        dt = min(dt, next_sample_time(wind_series, t) - t)
        values = _advance(values, grid, dt, params, wind, config, rng)
        t = t_end if dt >= remaining else t + dt
        stats.steps += 1

        if config.reinit_every > 0 and stats.steps % config.reinit_every == 0:
            if has_front(values):
                values = reinitialize_values(values, grid, config.reinit_iterations, config.eno_order)
                stats.reinitializations += 1
            else:
                logger.warning(f"Skipping reinitialization at t={t:.3f} s: field has no front")

        if touches_border(values):
            raise DomainTooSmallError(t)

    logger.debug(f"Propagated to t={t_end:.3f} s in {stats.steps} steps ({stats.reinitializations} reinits)")
    return LevelSetField.from_values(grid, values, t_end), stats


def propagate(
    phi: LevelSetField,
    t_end: float,
    params: RosParams,
    wind_series: WindSeries,
    config: SolverConfig,
    rng: Optional[np.random.Generator] = None,
) -> LevelSetField:
    """Integrates phi to ``t_end``; see ``propagate_with_stats``."""
    return propagate_with_stats(phi, t_end, params, wind_series, config, rng)[0]
