import logging
from typing import Sequence

import numpy as np

from firefilter.spread.wind import mean_wind
from firefilter.utils.models import Observation, RosParams, RosPrior, WindSeries

logger = logging.getLogger(__name__)


def normal_speed(
    params: RosParams, wind: tuple[float, float], normal: tuple[float, float], clamp_upwind: bool = True
) -> float:
    """Rate of spread along a unit front normal: beta + gamma * max(0, wind . normal)."""
    nx, ny = normal
    if abs(np.hypot(nx, ny) - 1.0) > 1e-6:
        raise ValueError(f"normal ({nx}, {ny}) is not a unit vector")
    omega = wind[0] * nx + wind[1] * ny
    if clamp_upwind:
        omega = max(0.0, omega)
    return params.beta + params.gamma * omega


def normal_speed_field(
    params: RosParams,
    wind: tuple[float, float],
    normal_x: np.ndarray,
    normal_y: np.ndarray,
    clamp_upwind: bool = True,
) -> np.ndarray:
    """Vectorized ``normal_speed`` over arrays of unit normal components."""
    omega = wind[0] * normal_x + wind[1] * normal_y
    if clamp_upwind:
        omega = np.maximum(omega, 0.0)
    return params.beta + params.gamma * omega


def max_speed(params: RosParams, wind: tuple[float, float]) -> float:
    """Upper bound of |normal_speed| over all normals."""
    return params.beta + abs(params.gamma) * float(np.hypot(*wind))


def sample_prior(prior: RosPrior, rng: np.random.Generator) -> RosParams:
    """Independent Gaussian draws; beta is truncated at zero."""
    beta = prior.mu_beta + prior.sigma_beta * rng.standard_normal()
    gamma = prior.mu_gamma + prior.sigma_gamma * rng.standard_normal()
    return RosParams(max(0.0, float(beta)), float(gamma))


def estimate_params(
    observations: Sequence[Observation],
    wind_series: WindSeries,
    ignition_center: tuple[float, float],
    t0: float = 0.0,
) -> RosParams:
    """Calibrates (beta, gamma) from mapped fronts.

    beta comes from how far the front travels across the wind, gamma from the extra distance it
    travels along the wind. Extents are measured from the ignition point and fitted against elapsed
    time by least squares with a free intercept; a single front falls back to extent over time.
    """
    if not observations:
        raise ValueError("at least one observation is needed to calibrate")
    t_last = observations[-1].time
    wx, wy = mean_wind(wind_series, t0, t_last)
    speed = float(np.hypot(wx, wy))
    along = np.array([wx, wy]) / speed if speed > 0 else np.array([1.0, 0.0])
    across = np.array([-along[1], along[0]])

    elapsed, downwind, crosswind = [], [], []
    for obs in observations:
        if obs.front.is_empty:
            continue
        rel = obs.front.vertices() - np.asarray(ignition_center)
        elapsed.append(obs.time - t0)
        downwind.append((rel @ along).max())
        # both flanks, averaged
        crosswind.append(0.5 * ((rel @ across).max() - (rel @ across).min()))
    if not elapsed:
        raise ValueError("all observations are empty")

    t = np.array(elapsed)
    # initial radius is the common intercept; fit rates with a free intercept when there is more than one front
    if len(t) > 1:
        design = np.column_stack([t, np.ones_like(t)])
        rate_down = float(np.linalg.lstsq(design, np.array(downwind), rcond=None)[0][0])
        rate_cross = float(np.linalg.lstsq(design, np.array(crosswind), rcond=None)[0][0])
    else:
        rate_down = downwind[0] / t[0]
        rate_cross = crosswind[0] / t[0]

    beta = max(0.0, rate_cross)
    if speed == 0:
        logger.warning("Mean wind is zero; gamma cannot be identified and is set to 0")
        return RosParams(beta, 0.0)
    gamma = (rate_down - beta) / speed
    logger.info(f"Calibrated beta={beta:.4f} m/s, gamma={gamma:.4f} from {len(t)} fronts")
    return RosParams(beta, gamma)
